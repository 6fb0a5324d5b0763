#include "rlap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rlap/errors.hpp"

namespace rlap {

namespace {

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa, in [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

// ---------------------------------------------------------------------------
// SparseGraph

SparseGraph SparseGraph::from_edges(NodeId n, std::span<const Edge> edges) {
  if (n < 0) throw std::invalid_argument("node count must be nonnegative");
  std::vector<EdgeOffset> counts(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") outside [0, " + std::to_string(n) + ")");
    if (i == j) throw std::invalid_argument("self-loop at node " + std::to_string(i));
    ++counts[static_cast<std::size_t>(i) + 1];
    ++counts[static_cast<std::size_t>(j) + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());

  std::vector<NodeId> cols(static_cast<std::size_t>(counts.back()));
  std::vector<EdgeOffset> fill(counts.begin(), counts.end() - 1);
  for (const auto& [i, j] : edges) {
    cols[static_cast<std::size_t>(fill[static_cast<std::size_t>(i)]++)] = j;
    cols[static_cast<std::size_t>(fill[static_cast<std::size_t>(j)]++)] = i;
  }

  SparseGraph g;
  g.n_ = n;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  g.degrees_.assign(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> out;
  out.reserve(cols.size());
  for (NodeId i = 0; i < n; ++i) {
    auto b = cols.begin() + counts[static_cast<std::size_t>(i)];
    auto e = cols.begin() + counts[static_cast<std::size_t>(i) + 1];
    std::sort(b, e);
    e = std::unique(b, e);
    out.insert(out.end(), b, e);
    g.offsets_[static_cast<std::size_t>(i) + 1] = static_cast<EdgeOffset>(out.size());
    g.degrees_[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(e - b);
  }
  g.cols_ = std::move(out);
  return g;
}

std::vector<Edge> SparseGraph::edge_list() const {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(num_edges()));
  for (NodeId i = 0; i < n_; ++i)
    for (NodeId j : neighbors(i))
      if (i < j) edges.emplace_back(i, j);
  return edges;
}

SparseGraph SparseGraph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("permutation length differs from node count");
  auto edges = edge_list();
  for (auto& [i, j] : edges) {
    i = perm[static_cast<std::size_t>(i)];
    j = perm[static_cast<std::size_t>(j)];
  }
  return from_edges(n_, edges);
}

SparseGraph SparseGraph::induced(std::span<const NodeId> keep) const {
  std::vector<NodeId> remap(static_cast<std::size_t>(n_), -1);
  for (std::size_t t = 0; t < keep.size(); ++t) remap[static_cast<std::size_t>(keep[t])] = static_cast<NodeId>(t);
  std::vector<Edge> edges;
  for (NodeId i : keep)
    for (NodeId j : neighbors(i)) {
      const NodeId a = remap[static_cast<std::size_t>(i)];
      const NodeId b = remap[static_cast<std::size_t>(j)];
      if (b >= 0 && a < b) edges.emplace_back(a, b);
    }
  return from_edges(static_cast<NodeId>(keep.size()), edges);
}

std::vector<NodeId> SparseGraph::components() const {
  std::vector<NodeId> comp(static_cast<std::size_t>(n_), -1);
  std::vector<NodeId> stack;
  NodeId next = 0;
  for (NodeId s = 0; s < n_; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    comp[static_cast<std::size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : neighbors(u)) {
        if (comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

std::string SparseGraph::check_invariants() const {
  if (offsets_.size() != static_cast<std::size_t>(n_) + 1) return "offset array length";
  if (degrees_.size() != static_cast<std::size_t>(n_)) return "degree array length";
  if (offsets_.front() != 0 || offsets_.back() != static_cast<EdgeOffset>(cols_.size()))
    return "offset endpoints";
  for (NodeId i = 0; i < n_; ++i) {
    const auto row = neighbors(i);
    if (static_cast<std::int32_t>(row.size()) != degree(i)) return "degree mismatch at " + std::to_string(i);
    for (std::size_t t = 0; t < row.size(); ++t) {
      const NodeId j = row[t];
      if (j < 0 || j >= n_) return "index out of range in row " + std::to_string(i);
      if (j == i) return "self-loop at " + std::to_string(i);
      if (t > 0 && row[t - 1] >= j) return "unsorted or duplicate entries in row " + std::to_string(i);
      const auto back = neighbors(j);
      if (!std::binary_search(back.begin(), back.end(), i))
        return "asymmetric edge (" + std::to_string(i) + ", " + std::to_string(j) + ")";
    }
  }
  return {};
}

std::vector<NodeId> largest_component(const SparseGraph& graph) {
  const auto comp = graph.components();
  if (comp.empty()) return {};
  const NodeId ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(ncomp), 0);
  for (NodeId c : comp) ++sizes[static_cast<std::size_t>(c)];
  const auto best = static_cast<NodeId>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> keep;
  for (NodeId i = 0; i < graph.num_nodes(); ++i)
    if (comp[static_cast<std::size_t>(i)] == best) keep.push_back(i);
  return keep;
}

std::vector<NodeId> non_isolated_nodes(const SparseGraph& graph) {
  std::vector<NodeId> keep;
  for (NodeId i = 0; i < graph.num_nodes(); ++i)
    if (graph.degree(i) > 0) keep.push_back(i);
  return keep;
}

// ---------------------------------------------------------------------------
// Model description

ThetaSpec ThetaSpec::parse(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  if (kind == "constant") return constant();
  if (kind != "uniform") throw ConfigError("unknown theta distribution '" + kind + "'");
  ThetaSpec spec;
  spec.kind = Kind::Uniform;
  if (!(in >> spec.low >> spec.high)) throw ConfigError("uniform theta needs 'low high'");
  std::string word;
  if (in >> word) {
    if (word != "^" && word != "power") throw ConfigError("expected '^' or 'power' in theta spec");
    if (!(in >> spec.power)) throw ConfigError("missing power exponent in theta spec");
  }
  if (in >> word) throw ConfigError("trailing text in theta spec: '" + word + "'");
  return spec;
}

std::string ThetaSpec::to_string() const {
  if (kind == Kind::Constant) return "constant";
  std::ostringstream out;
  out << "uniform " << low << ' ' << high << " ^ " << power;
  return out.str();
}

double ThetaSpec::expected_phi() const {
  if (kind == Kind::Constant) return 1.0;
  auto moment = [&](double q) {
    if (high == low) return std::pow(low, q);
    return (std::pow(high, q + 1) - std::pow(low, q + 1)) / ((q + 1) * (high - low));
  };
  const double m1 = moment(power);
  return moment(2 * power) / (m1 * m1);
}

DcsbmConfig::DcsbmConfig(NodeId n, Eigen::MatrixXd affinity, Eigen::VectorXd pi, ThetaSpec theta)
    : n_(n), affinity_(std::move(affinity)), pi_(std::move(pi)), theta_(theta) {
  const auto k = pi_.size();
  if (k < 1) throw std::invalid_argument("need at least one class");
  if (affinity_.rows() != k || affinity_.cols() != k)
    throw std::invalid_argument("affinity matrix must be k x k");
  if ((pi_.array() <= 0.0).any()) throw std::invalid_argument("class proportions must be positive");
  if (std::abs(pi_.sum() - 1.0) > 1e-9) throw std::invalid_argument("class proportions must sum to 1");
  if ((affinity_.array() < 0.0).any()) throw std::invalid_argument("affinity entries must be nonnegative");
  if (!affinity_.isApprox(affinity_.transpose(), 0.0) &&
      (affinity_ - affinity_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("affinity matrix must be symmetric");
  if (theta_.kind == ThetaSpec::Kind::Uniform && (theta_.low <= 0.0 || theta_.high < theta_.low))
    throw std::invalid_argument("uniform theta needs 0 < low <= high");

  const Eigen::VectorXd row = affinity_ * pi_;
  c_ = row.mean();
  const double scale = std::max(std::abs(c_), 1e-300);
  if (c_ > 0.0 && (row.array() - c_).abs().maxCoeff() > 1e-6 * scale)
    throw std::invalid_argument("C*Pi*1 is not a constant vector (expected degree depends on class)");
  if (c_ == 0.0 && row.cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("C*Pi*1 is not a constant vector");
}

DcsbmConfig DcsbmConfig::planted(NodeId n, int k, double c_in, double c_out, ThetaSpec theta) {
  if (k < 1) throw std::invalid_argument("need at least one class");
  Eigen::MatrixXd affinity = Eigen::MatrixXd::Constant(k, k, c_out);
  affinity.diagonal().setConstant(c_in);
  return DcsbmConfig(n, std::move(affinity), Eigen::VectorXd::Constant(k, 1.0 / k), theta);
}

// ---------------------------------------------------------------------------
// Generation

ModelGroundTruth sample_model(const DcsbmConfig& config, std::mt19937_64& rng) {
  const NodeId n = config.n();
  if (n < 2) throw std::invalid_argument("DC-SBM needs n >= 2");
  const int k = config.k();

  ModelGroundTruth truth;
  truth.labels.resize(static_cast<std::size_t>(n));
  truth.theta.resize(static_cast<std::size_t>(n));

  std::vector<double> cumulative(static_cast<std::size_t>(k));
  std::partial_sum(config.pi().begin(), config.pi().end(), cumulative.begin());
  cumulative.back() = 1.0;
  for (auto& label : truth.labels) {
    const double u = uniform01(rng);
    label = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    label = std::min(label, k - 1);
  }

  const auto& spec = config.theta_spec();
  for (auto& t : truth.theta) {
    double x = 1.0;
    if (spec.kind == ThetaSpec::Kind::Uniform) x = spec.low + (spec.high - spec.low) * uniform01(rng);
    t = std::pow(x, spec.power);
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("theta sampler produced a non-positive value");
  }
  const double mean = std::accumulate(truth.theta.begin(), truth.theta.end(), 0.0) / n;
  double second = 0.0;
  for (auto& t : truth.theta) {
    t /= mean;
    second += t * t;
  }
  truth.c = config.c();
  truth.phi = second / n;

  // CΠ = Π^{-1/2} (Π^{1/2} C Π^{1/2}) Π^{1/2}: eigenvalues from the symmetric
  // form, right eigenvectors v = Π^{-1/2} u.
  const Eigen::VectorXd sqrt_pi = config.pi().cwiseSqrt();
  const Eigen::MatrixXd sym = sqrt_pi.asDiagonal() * config.affinity() * sqrt_pi.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  truth.model_eigs = es.eigenvalues().reverse();
  truth.model_vectors = sqrt_pi.cwiseInverse().asDiagonal() * es.eigenvectors().rowwise().reverse();
  for (Eigen::Index p = 0; p < truth.model_vectors.cols(); ++p) truth.model_vectors.col(p).normalize();
  return truth;
}

SparseGraph sample_edges(const ModelGroundTruth& truth, const Eigen::MatrixXd& affinity,
                         std::mt19937_64& rng) {
  const auto n = static_cast<NodeId>(truth.labels.size());
  const auto k = static_cast<int>(affinity.rows());

  // Nodes per class, sorted by decreasing θ so the acceptance bound is monotone.
  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(k));
  for (NodeId i = 0; i < n; ++i) members[static_cast<std::size_t>(truth.labels[static_cast<std::size_t>(i)])].push_back(i);
  for (auto& m : members)
    std::stable_sort(m.begin(), m.end(), [&](NodeId a, NodeId b) {
      return truth.theta[static_cast<std::size_t>(a)] > truth.theta[static_cast<std::size_t>(b)];
    });

  std::vector<Edge> edges;
  const double inv_n = 1.0 / n;
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const double cab = affinity(a, b) * inv_n;
      if (cab <= 0.0) continue;
      const auto& rows = members[static_cast<std::size_t>(a)];
      const auto& cols = members[static_cast<std::size_t>(b)];
      const auto ncols = static_cast<std::int64_t>(cols.size());
      for (std::size_t u = 0; u < rows.size(); ++u) {
        const double tu = truth.theta[static_cast<std::size_t>(rows[u])] * cab;
        std::int64_t v = (a == b) ? static_cast<std::int64_t>(u) + 1 : 0;
        if (v >= ncols) continue;
        double p = std::min(1.0, tu * truth.theta[static_cast<std::size_t>(cols[static_cast<std::size_t>(v)])]);
        while (v < ncols && p > 0.0) {
          if (p < 1.0) {
            const double r = 1.0 - uniform01(rng);  // (0, 1]
            const double skip = std::floor(std::log(r) / std::log1p(-p));
            if (skip >= static_cast<double>(ncols - v)) break;
            v += static_cast<std::int64_t>(skip);
          }
          const double q = std::min(1.0, tu * truth.theta[static_cast<std::size_t>(cols[static_cast<std::size_t>(v)])]);
          if (uniform01(rng) < q / p) edges.emplace_back(rows[u], cols[static_cast<std::size_t>(v)]);
          p = q;
          ++v;
        }
      }
    }
  }
  return SparseGraph::from_edges(n, edges);
}

GeneratedGraph generate_dcsbm(const DcsbmConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GeneratedGraph out;
  out.truth = sample_model(config, rng);
  out.graph = sample_edges(out.truth, config.affinity(), rng);
  return out;
}

double estimate_c_phi(const SparseGraph& graph) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (auto d : graph.degrees()) {
    sum += d;
    sum_sq += static_cast<double>(d) * d;
  }
  if (sum == 0.0) throw std::invalid_argument("estimate_c_phi needs at least one edge");
  return sum_sq / sum - 1.0;
}

// ---------------------------------------------------------------------------
// Text I/O

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

// Parses "# n <N>"; returns -1 for other comments.
std::int64_t header_count(const std::string& line, std::size_t line_no) {
  std::istringstream in(line.substr(1));
  std::string key;
  if (!(in >> key) || key != "n") return -1;
  std::int64_t n = -1;
  if (!(in >> n) || n < 0) throw ParseError("malformed node-count header", line_no);
  return n;
}

}  // namespace

void save_edge_list(const SparseGraph& graph, const std::filesystem::path& path,
                    std::span<const std::string> comments) {
  auto out = open_out(path);
  out << "# n " << graph.num_nodes() << '\n';
  out << "# m " << graph.num_edges() << '\n';
  for (const auto& c : comments) out << "# " << c << '\n';
  for (const auto& [i, j] : graph.edge_list()) out << i << ' ' << j << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SparseGraph parse_edge_list(std::istream& in) {
  std::int64_t declared = -1;
  std::int64_t max_index = -1;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#' || line[first] == '%') {
      const auto n = header_count(line.substr(first), line_no);
      if (n >= 0) {
        if (!edges.empty()) throw ParseError("node-count header after edges", line_no);
        declared = n;
      }
      continue;
    }
    std::istringstream fields(line);
    std::int64_t i = 0;
    std::int64_t j = 0;
    std::string extra;
    if (!(fields >> i >> j) || (fields >> extra))
      throw ParseError("expected two integer node indices", line_no);
    if (i < 0 || j < 0) throw ParseError("negative node index", line_no);
    if (declared >= 0 && (i >= declared || j >= declared))
      throw BoundsError("node index >= declared n = " + std::to_string(declared), line_no);
    if (std::max(i, j) > std::numeric_limits<NodeId>::max() - 1) throw BoundsError("node index too large", line_no);
    if (i == j) throw ParseError("self-loop", line_no);
    max_index = std::max({max_index, i, j});
    edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
  }
  const auto n = static_cast<NodeId>(declared >= 0 ? declared : max_index + 1);
  return SparseGraph::from_edges(n, edges);
}

SparseGraph load_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_edge_list(in);
}

void save_labels(std::span<const int> labels, const std::filesystem::path& path,
                 std::span<const std::string> comments) {
  auto out = open_out(path);
  out << "# n " << labels.size() << '\n';
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ' ' << labels[i] << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::int64_t declared = -1;
  std::vector<std::pair<std::int64_t, int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const auto n = header_count(line.substr(first), line_no);
      if (n >= 0) declared = n;
      continue;
    }
    std::istringstream fields(line);
    std::int64_t node = 0;
    int label = 0;
    std::string extra;
    if (!(fields >> node >> label) || (fields >> extra)) throw ParseError("expected 'node label'", line_no);
    if (node < 0 || label < 0) throw ParseError("negative node or label", line_no);
    if (declared >= 0 && node >= declared) throw BoundsError("node index >= declared n", line_no);
    rows.emplace_back(node, label);
  }
  const std::int64_t n = declared >= 0 ? declared : static_cast<std::int64_t>(rows.size());
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (const auto& [node, label] : rows) {
    if (node >= n) throw BoundsError("node index outside label vector", 0);
    labels[static_cast<std::size_t>(node)] = label;
  }
  if (std::find(labels.begin(), labels.end(), -1) != labels.end())
    throw ParseError("label file does not cover every node", 0);
  return labels;
}

}  // namespace rlap
