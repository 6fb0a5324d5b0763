#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <omp.h>

#include "rlap/cli.hpp"
#include "rlap/errors.hpp"
#include "rlap/metrics.hpp"

namespace rlap::cli {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

constexpr const char* kColumns =
    "point,c_in,c_out,seed_index,seed,alpha,alpha_c,tau_policy,tau_value,overlap,overlap_positive_degree,k_hat,gap,"
    "zeta_2,error";

std::string csv_row(const TrialRecord& r) {
  std::ostringstream out;
  out << r.point << ',' << num(r.c_in) << ',' << num(r.c_out) << ',' << r.seed_index << ',' << r.seed << ','
      << num(r.alpha) << ',' << num(r.alpha_c) << ',' << r.tau_policy << ',' << num(r.tau_value) << ','
      << num(r.overlap) << ',' << num(r.overlap_positive_degree) << ',' << r.k_hat << ',' << num(r.gap) << ','
      << num(r.zeta_2) << ',' << r.error;
  return out.str();
}

void write_header(std::ostream& out, const SweepConfig& config) {
  out << "# rlap sweep\n";
  for (const auto& line : config.provenance()) out << "# " << line << '\n';
  out << kColumns << '\n';
}

std::ofstream open_or_throw(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over a golden-ratio stride.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------

PolicyEvaluator::PolicyEvaluator(const SparseGraph& graph, int k, double c, double c_phi,
                                 const SolverSettings& settings)
    : graph_(graph), k_(k), c_(c), c_phi_(c_phi), settings_(settings) {
  if (k < 2) throw std::invalid_argument("policy evaluation needs k >= 2");
}

void PolicyEvaluator::ensure_zetas() {
  if (zetas_done_) return;
  zetas_done_ = true;
  if (!(c_phi_ > 1.0)) {
    zeta_error_ = "c_phi_not_above_one";
    return;
  }
  ZetaOptions zopt;
  zopt.r_tol = settings_.r_tol;
  zopt.solver.tol = settings_.tol;
  SolverOptions sopt;
  sopt.tol = settings_.tol;
  for (int p = 2; p <= k_; ++p) {
    try {
      const auto z = find_zeta(graph_, p, c_phi_, zopt);
      auto info = informative_eigenvector(graph_, p, z.zeta, sopt, !z.at_lower_edge);
      zetas_.push_back({info.zeta, std::move(info.vector)});
    } catch (const BeyondDetectableRank&) {
      zeta_error_ = p == 2 ? "beyond_detectable_rank" : "shrunk_at_p" + std::to_string(p);
      return;
    } catch (const SolverError&) {
      zeta_error_ = "solver_failure_p" + std::to_string(p);
      return;
    }
  }
}

double PolicyEvaluator::zeta_2() {
  ensure_zetas();
  return zetas_.empty() ? std::numeric_limits<double>::quiet_NaN() : zetas_.front().zeta;
}

const EigenPairs& PolicyEvaluator::laplacian(double tau, int count) {
  for (const auto& s : lap_cache_)
    if (s.tau == tau && s.count >= count) return s.pairs;
  SolverOptions sopt;
  sopt.tol = settings_.tol;
  lap_cache_.push_back({tau, count, reg_laplacian_eigs(graph_, tau, count, sopt)});
  return lap_cache_.back().pairs;
}

PolicyEmbedding PolicyEvaluator::evaluate(const TauPolicy& policy) {
  PolicyEmbedding out;
  const Eigen::Index n = graph_.num_nodes();
  auto note = [&](const std::string& tag) {
    if (tag.empty()) return;
    out.error += (out.error.empty() ? "" : ";") + tag;
  };
  auto gap_of = [&](const EigenPairs& pairs, int kk) {
    const auto i = static_cast<std::size_t>(kk);
    if (pairs.values.size() > i) out.gap = pairs.values[i - 1] - pairs.values[i];
  };
  auto check = [&](const EigenPairs& pairs, int upto) {
    for (int j = 0; j < upto && j < static_cast<int>(pairs.converged.size()); ++j)
      if (!pairs.converged[static_cast<std::size_t>(j)]) {
        note("unconverged");
        return;
      }
  };

  if (policy.uses_zeta()) {
    ensure_zetas();
    for (const auto& z : zetas_) out.zetas.push_back(z.zeta);
    out.k_used = 1 + static_cast<int>(zetas_.size());
    note(zeta_error_);
    if (out.k_used < 2) return out;
    const double zeta2 = zetas_.front().zeta;
    out.tau = zeta2 * zeta2 - 1.0;
    out.data.resize(n, out.k_used - 1);
    const auto& first = laplacian(out.tau, out.k_used + 1);
    gap_of(first, out.k_used);
    for (int p = 2; p <= out.k_used; ++p) {
      const auto col = static_cast<Eigen::Index>(p - 2);
      const auto& z = zetas_[static_cast<std::size_t>(p - 2)];
      if (policy.kind == TauPolicy::Kind::BetheHessianDirect) {
        out.data.col(col) = z.h_vector;
      } else {
        const auto& pairs = p == 2 ? first : laplacian(z.zeta * z.zeta - 1.0, p);
        check(pairs, p);
        out.data.col(col) = pairs.vectors.col(p - 1);
      }
    }
    return out;
  }

  out.tau = policy.kind == TauPolicy::Kind::CPhiMinusOne ? c_phi_ - 1.0 : policy.fixed_tau(c_);
  if (!(out.tau >= 0.0)) {
    note("negative_tau");
    return out;
  }
  try {
    const auto& pairs = laplacian(out.tau, k_ + 1);
    check(pairs, k_);
    gap_of(pairs, k_);
    out.k_used = k_;
    out.data = pairs.vectors.middleCols(1, k_ - 1);
  } catch (const std::domain_error&) {
    note("singular_degree_matrix");
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<TrialRecord> run_trial(const SweepConfig& config, int point, int seed_index) {
  const auto [c_in, c_out] = config.pairs[static_cast<std::size_t>(point)];
  const auto index = static_cast<std::uint64_t>(point) * static_cast<std::uint64_t>(config.seeds) +
                     static_cast<std::uint64_t>(seed_index);
  const std::uint64_t seed = trial_seed(config.seed, index);
  const auto model = DcsbmConfig::planted(config.n, config.k, c_in, c_out, config.theta);
  const auto gen = generate_dcsbm(model, seed);
  const auto& graph = gen.graph;
  const auto det = detectability(c_in, c_out, config.c, config.theta.expected_phi());

  double c_phi = config.inject_c_phi ? gen.truth.c * gen.truth.phi : 0.0;
  if (!config.inject_c_phi && graph.num_edges() > 0) c_phi = estimate_c_phi(graph);
  PolicyEvaluator eval(graph, config.k, config.c, c_phi, config.solver);
  const bool any_zeta = std::any_of(config.policies.begin(), config.policies.end(),
                                    [](const TauPolicy& p) { return p.uses_zeta(); });
  KMeansOptions km;
  km.restarts = config.solver.restarts;
  km.seed = trial_seed(seed, 1);

  std::vector<TrialRecord> rows;
  for (std::size_t q = 0; q < config.policies.size(); ++q) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord r;
    r.point = point;
    r.c_in = c_in;
    r.c_out = c_out;
    r.seed_index = seed_index;
    r.seed = seed;
    r.alpha = det.alpha;
    r.alpha_c = det.alpha_c;
    r.policy_index = static_cast<int>(q);
    r.tau_policy = config.policies[q].name();
    std::vector<int> labels(static_cast<std::size_t>(graph.num_nodes()), 0);
    try {
      const auto emb = eval.evaluate(config.policies[q]);
      r.tau_value = emb.tau;
      r.gap = emb.gap;
      r.error = emb.error;
      r.k_hat = emb.k_used;
      if (emb.k_used >= 2) labels = kmeans_non_isolated(graph, emb.data, emb.k_used, km).labels;
    } catch (const std::exception& e) {
      r.error = std::string("exception:") + e.what();
      std::replace(r.error.begin(), r.error.end(), ',', ';');
      r.k_hat = 1;
    }
    const auto ov = overlap(labels, gen.truth.labels, config.k, graph.degrees());
    r.overlap = ov.overlap;
    r.overlap_positive_degree = ov.overlap_positive_degree;
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(r));
  }
  if (any_zeta) {
    const double z2 = eval.zeta_2();
    for (auto& r : rows) r.zeta_2 = z2;
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::map<std::pair<int, int>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) groups[{r.point, r.policy_index}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, rows] : groups) {
    SummaryRow s;
    const auto& f = *rows.front();
    s.point = f.point;
    s.c_in = f.c_in;
    s.c_out = f.c_out;
    s.alpha = f.alpha;
    s.alpha_c = f.alpha_c;
    s.tau_policy = f.tau_policy;
    s.count = static_cast<int>(rows.size());
    double sum = 0.0;
    for (const auto* r : rows) {
      sum += r->overlap;
      if (!r->error.empty()) ++s.errors;
    }
    s.mean = sum / s.count;
    double ss = 0.0;
    for (const auto* r : rows) ss += (r->overlap - s.mean) * (r->overlap - s.mean);
    s.sd = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

void write_sweep_csv(const SweepConfig& config, std::vector<TrialRecord> records, const std::filesystem::path& out) {
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.point, a.policy_index, a.seed_index) < std::tie(b.point, b.policy_index, b.seed_index);
  });
  const auto tmp = std::filesystem::path(out.string() + ".tmp");
  {
    auto f = open_or_throw(tmp, std::ios::out | std::ios::trunc);
    write_header(f, config);
    for (const auto& r : records) f << csv_row(r) << '\n';
    f << "# summary: mean and sample sd of overlap per point and policy\n";
    f << "# point,c_in,c_out,alpha,alpha_c,tau_policy,mean_overlap,sd_overlap,count,errors\n";
    for (const auto& s : summarize(records))
      f << "# " << s.point << ',' << num(s.c_in) << ',' << num(s.c_out) << ',' << num(s.alpha) << ','
        << num(s.alpha_c) << ',' << s.tau_policy << ',' << num(s.mean) << ',' << num(s.sd) << ',' << s.count << ','
        << s.errors << '\n';
    if (!f) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, out);

  auto t = open_or_throw(out.string() + ".timing.csv", std::ios::out | std::ios::trunc);
  t << "point,tau_policy,seed_index,runtime_ms\n";
  for (const auto& r : records)
    t << r.point << ',' << r.tau_policy << ',' << r.seed_index << ',' << num(r.runtime_ms) << '\n';
}

std::vector<TrialRecord> run_sweep(const SweepConfig& config, int workers, const std::filesystem::path& out) {
  config.validate();
  if (workers < 1) throw ConfigError("--workers must be >= 1");
  const int points = static_cast<int>(config.pairs.size());
  const int trials = points * config.seeds;

  std::ofstream partial;
  if (!out.empty()) {
    partial = open_or_throw(out, std::ios::out | std::ios::trunc);
    write_header(partial, config);
    partial.flush();
  }

  std::vector<std::vector<TrialRecord>> results(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int t = 0; t < trials; ++t) {
    auto rows = run_trial(config, t / config.seeds, t % config.seeds);
    if (!out.empty()) {
#pragma omp critical(rlap_sweep_csv)
      {
        for (const auto& r : rows) partial << csv_row(r) << '\n';
        partial.flush();
      }
    }
    results[static_cast<std::size_t>(t)] = std::move(rows);
  }
  if (partial.is_open()) partial.close();

  std::vector<TrialRecord> all;
  for (auto& rows : results)
    for (auto& r : rows) all.push_back(std::move(r));
  if (!out.empty()) write_sweep_csv(config, all, out);
  return all;
}

}  // namespace rlap::cli
