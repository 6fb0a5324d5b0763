#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rlap/cli.hpp"

int main(int argc, char** argv) {
  using namespace rlap::cli;
  CLI::App app{"rlap: spectral community detection with the regularized random-walk Laplacian"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a DC-SBM graph; writes <out>.edges and <out>.labels");
  generate->add_option("--config", gen.config, "INI file with a [model] section")->required()->check(CLI::ExistingFile);
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--out", gen.out, "output prefix")->required();

  ClusterArgs cl;
  double c_phi = 0.0;
  auto* clust = app.add_subcommand("cluster", "Estimate k and cluster an edge list (JSON output)");
  clust->add_option("edges", cl.edges, "edge-list file")->required();
  clust->add_option("--truth", cl.truth, "ground-truth label file; adds an overlap report");
  clust->add_option("--config", cl.config, "INI file with an optional [solver] section");
  clust->add_option("--seed", cl.seed, "k-means seed");
  clust->add_option("--out", cl.out, "JSON destination (default stdout)");
  auto* c_phi_opt = clust->add_option("--c-phi", c_phi, "inject cPhi instead of the degree estimate");

  SweepArgs sw;
  std::uint64_t sweep_seed = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a (c_in, c_out) x policy x seed grid to CSV");
  sweep->add_option("--config", sw.config, "INI file with [model], [sweep], [solver]")->required()->check(CLI::ExistingFile);
  auto* seed_opt = sweep->add_option("--seed", sweep_seed, "override sweep.seed");
  sweep->add_option("--workers", sw.workers, "parallel trials")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sw.out, "CSV destination (overrides sweep.out)");

  SpectrumArgs sp;
  double tau = 0.0;
  auto* spectrum = app.add_subcommand("spectrum", "Leading eigenvalues of the regularized random-walk Laplacian");
  spectrum->add_option("edges", sp.edges, "edge-list file")->required();
  auto* tau_opt = spectrum->add_option("--tau", tau, "fixed regularization (shorthand for --policy fixed:<tau>)");
  auto* sp_policy = spectrum->add_option("--policy", sp.policy, "tau policy");
  spectrum->add_option("--count", sp.count, "number of eigenvalues")->check(CLI::PositiveNumber);
  spectrum->add_flag("--scale-by-r", sp.scale_by_r, "report r * eigenvalues with r = sqrt(tau + 1)");
  spectrum->add_flag("--giant", sp.giant, "restrict to the largest connected component");
  spectrum->add_option("--out", sp.out, "CSV destination (default stdout)");
  tau_opt->excludes(sp_policy);

  EigvecArgs ev;
  auto* eigvec = app.add_subcommand("eigvec", "Per-node entries of the p-th informative eigenvector");
  eigvec->add_option("edges", ev.edges, "edge-list file")->required();
  eigvec->add_option("--truth", ev.truth, "ground-truth label file");
  eigvec->add_option("--policy", ev.policy, "tau policy");
  eigvec->add_option("--p", ev.p, "eigenvector index (>= 2)");
  eigvec->add_option("--out", ev.out, "CSV destination (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) return cmd_generate(gen, std::cerr);
  if (clust->parsed()) {
    if (c_phi_opt->count()) cl.c_phi = c_phi;
    return cmd_cluster(cl, std::cout, std::cerr);
  }
  if (sweep->parsed()) {
    if (seed_opt->count()) sw.seed = sweep_seed;
    return cmd_sweep(sw, std::cerr);
  }
  if (spectrum->parsed()) {
    if (tau_opt->count()) {
      std::ostringstream text;
      text << std::setprecision(17) << "fixed:" << tau;
      sp.policy = text.str();
    }
    return cmd_spectrum(sp, std::cout, std::cerr);
  }
  if (eigvec->parsed()) return cmd_eigvec(ev, std::cout, std::cerr);
  return 1;
}
