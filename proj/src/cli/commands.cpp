#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "rlap/cli.hpp"
#include "rlap/errors.hpp"
#include "rlap/metrics.hpp"

namespace rlap::cli {

namespace {

using nlohmann::json;

// Maps an in-flight exception to an exit code and prints it.
int report(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  fn(out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<int> load_truth(const std::string& path, NodeId n) {
  auto labels = load_labels(path);
  if (static_cast<NodeId>(labels.size()) != n)
    throw IoError("truth file has " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " nodes");
  return labels;
}

int label_count(const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  return k;
}

double mean_degree(const SparseGraph& g) {
  return g.num_nodes() ? 2.0 * static_cast<double>(g.num_edges()) / g.num_nodes() : 0.0;
}

// tau for a single-graph command; zeta policies need the search.
double resolve_tau(const SparseGraph& graph, const TauPolicy& policy, const SolverSettings& settings) {
  if (policy.kind == TauPolicy::Kind::Fixed) return policy.fixed_tau(mean_degree(graph));
  if (graph.num_edges() == 0) throw std::invalid_argument("policy '" + policy.name() + "' needs edges");
  const double c_phi = estimate_c_phi(graph);
  if (policy.kind == TauPolicy::Kind::CPhiMinusOne) return c_phi - 1.0;
  PolicyEvaluator eval(graph, 2, mean_degree(graph), c_phi, settings);
  const double z = eval.zeta_2();
  if (std::isnan(z)) throw BeyondDetectableRank(2, 0.0);
  return z * z - 1.0;
}

}  // namespace

int cmd_generate(const GenerateArgs& args, std::ostream& err) {
  try {
    if (args.out.empty()) throw ConfigError("generate needs --out <prefix>");
    const auto config = Config::load(args.config);
    const auto model = model_from_config(config);
    const auto gen = generate_dcsbm(model, args.seed);
    std::vector<std::string> header;
    header.push_back("generator dcsbm seed " + std::to_string(args.seed));
    for (const auto& e : config.entries()) header.push_back("config " + e);
    header.push_back("model c " + num(gen.truth.c) + " phi " + num(gen.truth.phi));
    save_edge_list(gen.graph, args.out + ".edges", header);
    save_labels(gen.truth.labels, args.out + ".labels", header);
    return kOk;
  } catch (...) {
    return report(err);
  }
}

int cmd_cluster(const ClusterArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto graph = load_edge_list(args.edges);
    std::vector<int> truth;
    if (!args.truth.empty()) truth = load_truth(args.truth, graph.num_nodes());
    SolverSettings settings;
    if (!args.config.empty()) settings = solver_from_config(Config::load(args.config));

    ClusterOptions opts;
    opts.c_phi = args.c_phi;
    opts.embedding.solver.tol = settings.tol;
    opts.embedding.zeta.solver.tol = settings.tol;
    opts.embedding.zeta.r_tol = settings.r_tol;
    opts.kmeans.restarts = settings.restarts;
    opts.kmeans.seed = args.seed;
    const auto result = cluster(graph, opts);
    const auto& d = result.diagnostics;

    json j;
    j["n"] = graph.num_nodes();
    j["m"] = graph.num_edges();
    j["seed"] = args.seed;
    j["k_hat"] = result.k_hat;
    j["no_detectable_structure"] = d.no_structure;
    j["settings"] = {{"tol", settings.tol}, {"r_tol", settings.r_tol}, {"restarts", settings.restarts},
                     {"c_phi_source", args.c_phi ? "injected" : "degree_estimate"}};
    j["diagnostics"] = {{"c_phi_hat", d.c_phi_hat},
                        {"k_hat_requested", d.k_hat_requested},
                        {"k_threshold", d.k_estimate.threshold},
                        {"k_eigenvalues", d.k_estimate.values},
                        {"shrunk", d.shrunk},
                        {"zetas", d.zetas},
                        {"h_eigenvalues", d.h_eigenvalues},
                        {"h_residuals", d.h_residuals},
                        {"rw_residuals", d.rw_residuals},
                        {"gap", d.gap},
                        {"bulk_spacing", d.bulk_spacing},
                        {"wcss", d.wcss}};
    j["labels"] = result.labels;
    if (!truth.empty()) {
      const int k = std::max({2, result.k_hat, label_count(truth)});
      const auto ov = overlap(result.labels, truth, k, graph.degrees());
      j["overlap"] = {{"overlap", ov.overlap},
                      {"overlap_identity", ov.overlap_identity},
                      {"overlap_positive_degree", ov.overlap_positive_degree},
                      {"best_permutation", ov.best_permutation},
                      {"definition", "max over label permutations, chance corrected"}};
    }
    emit(args.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    if (d.no_structure) {
      err << "no detectable structure (k_hat = 1)\n";
      return kNoStructure;
    }
    return kOk;
  } catch (...) {
    return report(err);
  }
}

int cmd_sweep(const SweepArgs& args, std::ostream& err) {
  try {
    auto config = SweepConfig::from_config(Config::load(args.config));
    if (args.seed) config.seed = *args.seed;
    if (!args.out.empty()) config.out = args.out;
    if (config.out.empty()) throw ConfigError("sweep needs --out or sweep.out");
    run_sweep(config, args.workers, config.out);
    return kOk;
  } catch (...) {
    return report(err);
  }
}

int cmd_spectrum(const SpectrumArgs& args, std::ostream& out, std::ostream& err) {
  try {
    auto graph = load_edge_list(args.edges);
    const NodeId original_n = graph.num_nodes();
    if (args.giant) {
      const auto keep = largest_component(graph);
      graph = graph.induced(keep);
    }
    if (graph.num_nodes() == 0) throw std::invalid_argument("graph has no nodes");
    const auto policy = TauPolicy::parse(args.policy);
    const SolverSettings settings;
    const double tau = resolve_tau(graph, policy, settings);
    if (args.count < 1) throw ConfigError("--count must be >= 1");
    const int count = std::min<int>(args.count, graph.num_nodes());
    SolverOptions sopt;
    sopt.tol = settings.tol;
    const auto values = spectrum_report(graph, tau, count, args.scale_by_r, sopt);
    emit(args.out, out, [&](std::ostream& o) {
      o << "# rlap spectrum\n";
      o << "# policy = " << policy.name() << "\n# tau = " << num(tau) << '\n';
      o << "# scale_by_r = " << (args.scale_by_r ? "true" : "false") << '\n';
      o << "# nodes = " << graph.num_nodes() << " of " << original_n << (args.giant ? " (largest component)" : "")
        << '\n';
      o << "index,value\n";
      for (std::size_t i = 0; i < values.size(); ++i) o << i + 1 << ',' << num(values[i]) << '\n';
    });
    return kOk;
  } catch (const BeyondDetectableRank& e) {
    err << e.what() << '\n';
    return kNoStructure;
  } catch (...) {
    return report(err);
  }
}

int cmd_eigvec(const EigvecArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto graph = load_edge_list(args.edges);
    std::vector<int> truth;
    if (!args.truth.empty()) truth = load_truth(args.truth, graph.num_nodes());
    if (args.p < 2 || args.p > graph.num_nodes()) throw ConfigError("--p must be in [2, n]");
    const auto policy = TauPolicy::parse(args.policy);
    const double c_phi = graph.num_edges() > 0 ? estimate_c_phi(graph) : 0.0;
    const SolverSettings settings;
    PolicyEvaluator eval(graph, args.p, mean_degree(graph), c_phi, settings);
    const auto emb = eval.evaluate(policy);
    if (emb.k_used < args.p) {
      err << "no informative eigenvector " << args.p << " for policy " << policy.name()
          << (emb.error.empty() ? "" : " (" + emb.error + ")") << '\n';
      return kNoStructure;
    }
    const Eigen::VectorXd x = emb.data.col(args.p - 2);
    emit(args.out, out, [&](std::ostream& o) {
      o << "# rlap eigvec\n";
      o << "# policy = " << policy.name() << "\n# p = " << args.p << "\n# tau = " << num(emb.tau) << '\n';
      if (!emb.zetas.empty()) o << "# zeta = " << num(emb.zetas.back()) << '\n';
      o << (truth.empty() ? "node,degree,entry\n" : "node,degree,entry,label\n");
      for (NodeId i = 0; i < graph.num_nodes(); ++i) {
        o << i << ',' << graph.degree(i) << ',' << num(x[i]);
        if (!truth.empty()) o << ',' << truth[static_cast<std::size_t>(i)];
        o << '\n';
      }
    });
    return kOk;
  } catch (const BeyondDetectableRank& e) {
    err << e.what() << '\n';
    return kNoStructure;
  } catch (...) {
    return report(err);
  }
}

}  // namespace rlap::cli
