#include "pardpp/dpp_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "pardpp/errors.hpp"

namespace pardpp {

namespace {

using Complex = std::complex<double>;

// Element groups for coefficient extraction: element i carries the variable
// z_{group_of[i]}; the wanted coefficient is prod_b z_b^{quotas[b]}.
struct Groups {
  std::vector<int> group_of;
  std::vector<int> quotas;
};

double mean_diagonal(const Matrix& m, const std::vector<int>& members) {
  double acc = 0.0;
  for (int i : members) acc += m(i, i);
  return members.empty() ? 0.0 : acc / static_cast<double>(members.size());
}

// Coefficient of prod_b z_b^{c_b} in det(I + Z M) with Z = diag(z_{g(i)}),
// read off from evaluations on a grid of scaled roots of unity (one circle per
// group). With `inclusion`, also fills the same coefficient of
// det(I + Z M) [Z M (I + Z M)^{-1}]_{ii} = det(I + Z M) (1 - [(I + Z M)^{-1}]_{ii}),
// the generating polynomial of the sets containing i.
double grouped_coefficient(const Matrix& m, const Groups& groups, std::vector<double>* inclusion) {
  const int n = static_cast<int>(m.rows());
  const int r = static_cast<int>(groups.quotas.size());
  std::vector<std::vector<int>> members(r);
  for (int i = 0; i < n; ++i) members[groups.group_of[i]].push_back(i);
  if (inclusion) inclusion->assign(static_cast<std::size_t>(n), 0.0);
  for (int b = 0; b < r; ++b) {
    const int c = groups.quotas[b];
    if (c < 0 || c > static_cast<int>(members[b].size())) return 0.0;
  }
  if (n == 0) return 1.0;

  const double global_mean = std::max(m.trace() / n, 0.0);
  std::vector<int> points(r);
  std::vector<double> radius(r);
  std::size_t grid = 1;
  for (int b = 0; b < r; ++b) {
    const int d = static_cast<int>(members[b].size());
    const int c = groups.quotas[b];
    points[b] = d + 1;
    grid *= static_cast<std::size_t>(d + 1);
    double mean = mean_diagonal(m, members[b]);
    if (!(mean > 1e-300)) mean = global_mean > 1e-300 ? global_mean : 1.0;
    // The coefficient of z^c in prod(1 + z lambda) peaks near this radius
    // when all lambda equal the mean.
    const double ct = std::clamp(static_cast<double>(c), 0.5, std::max(0.5, d - 0.5));
    radius[b] = d == 0 ? 1.0 : ct / ((d - ct) * mean);
  }

  Complex coeff = 0.0;
  std::vector<Complex> incl(inclusion ? static_cast<std::size_t>(n) : 0, Complex(0.0));
  std::vector<int> index(r, 0);
  std::vector<Complex> z(r);
  Eigen::MatrixXcd a(n, n);
  for (std::size_t g = 0; g < grid; ++g) {
    Complex phase = 1.0;
    for (int b = 0; b < r; ++b) {
      const double angle = 2.0 * M_PI * index[b] / points[b];
      z[b] = std::polar(radius[b], angle);
      phase *= std::polar(1.0, -angle * groups.quotas[b]);
    }
    for (int i = 0; i < n; ++i) {
      const Complex zi = z[groups.group_of[i]];
      for (int j = 0; j < n; ++j) a(i, j) = zi * m(i, j);
      a(i, i) += 1.0;
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const Complex value = lu.determinant();
    coeff += value * phase;
    if (inclusion) {
      const Eigen::MatrixXcd inv = lu.inverse();
      for (int i = 0; i < n; ++i) incl[i] += value * (1.0 - inv(i, i)) * phase;
    }
    for (int b = 0; b < r; ++b) {
      if (++index[b] < points[b]) break;
      index[b] = 0;
    }
  }
  double norm = static_cast<double>(grid);
  for (int b = 0; b < r; ++b) norm *= std::pow(radius[b], groups.quotas[b]);
  if (inclusion) {
    for (int i = 0; i < n; ++i) (*inclusion)[i] = incl[i].real() / norm;
  }
  return coeff.real() / norm;
}

// out[j] = e_degree(values without j), from prefix and suffix tables.
template <typename Scalar>
std::vector<Scalar> leave_one_out(const std::vector<Scalar>& values, int degree) {
  const int n = static_cast<int>(values.size());
  std::vector<Scalar> out(static_cast<std::size_t>(n), Scalar(0));
  if (degree < 0) return out;
  const int w = degree + 1;
  std::vector<Scalar> prefix(static_cast<std::size_t>(n + 1) * w, Scalar(0));
  std::vector<Scalar> suffix(static_cast<std::size_t>(n + 1) * w, Scalar(0));
  prefix[0] = Scalar(1);
  for (int i = 0; i < n; ++i) {
    const Scalar* prev = &prefix[static_cast<std::size_t>(i) * w];
    Scalar* cur = &prefix[static_cast<std::size_t>(i + 1) * w];
    cur[0] = prev[0];
    for (int a = 1; a < w; ++a) cur[a] = prev[a] + values[i] * prev[a - 1];
  }
  suffix[static_cast<std::size_t>(n) * w] = Scalar(1);
  for (int i = n - 1; i >= 0; --i) {
    const Scalar* next = &suffix[static_cast<std::size_t>(i + 1) * w];
    Scalar* cur = &suffix[static_cast<std::size_t>(i) * w];
    cur[0] = next[0];
    for (int a = 1; a < w; ++a) cur[a] = next[a] + values[i] * next[a - 1];
  }
  for (int j = 0; j < n; ++j) {
    const Scalar* p = &prefix[static_cast<std::size_t>(j) * w];
    const Scalar* s = &suffix[static_cast<std::size_t>(j + 1) * w];
    Scalar acc(0);
    for (int a = 0; a <= degree; ++a) acc += p[a] * s[degree - a];
    out[j] = acc;
  }
  return out;
}

bool exactly_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

// For every i, the sum of det(M_S) over |S| = c containing i:
//   sum_j V_ij W_ji lambda_j e_{c-1}(lambda without j),  W = V^{-1}.
std::vector<double> spectral_inclusion(const Matrix& m, MatrixKind kind, int c) {
  const int n = static_cast<int>(m.rows());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (c <= 0 || c > n) return out;
  if (exactly_diagonal(m)) {
    std::vector<long double> lambda(n);
    for (int i = 0; i < n; ++i) lambda[i] = m(i, i);
    const std::vector<long double> rest = leave_one_out(lambda, c - 1);
    for (int i = 0; i < n; ++i) out[i] = static_cast<double>(lambda[i] * rest[i]);
    return out;
  }
  if (kind == MatrixKind::kSymmetricPsd) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    std::vector<long double> lambda(n);
    for (int j = 0; j < n; ++j) lambda[j] = std::max(0.0, solver.eigenvalues()(j));
    const std::vector<long double> rest = leave_one_out(lambda, c - 1);
    const Matrix& v = solver.eigenvectors();
    for (int i = 0; i < n; ++i) {
      long double acc = 0.0L;
      for (int j = 0; j < n; ++j) {
        acc += static_cast<long double>(v(i, j)) * v(i, j) * lambda[j] * rest[j];
      }
      out[i] = static_cast<double>(acc);
    }
    return out;
  }
  using LComplex = std::complex<long double>;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m.cast<Complex>());
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  const Eigen::MatrixXcd w = v.inverse();
  std::vector<LComplex> lambda(n);
  for (int j = 0; j < n; ++j) lambda[j] = LComplex(solver.eigenvalues()(j).real(),
                                                   solver.eigenvalues()(j).imag());
  const std::vector<LComplex> rest = leave_one_out(lambda, c - 1);
  for (int i = 0; i < n; ++i) {
    LComplex acc = 0.0L;
    for (int j = 0; j < n; ++j) {
      const Complex vw = v(i, j) * w(j, i);
      acc += LComplex(vw.real(), vw.imag()) * lambda[j] * rest[j];
    }
    out[i] = static_cast<double>(acc.real());
  }
  return out;
}

// Hadamard-type magnitude of the counts of a residual matrix, used to tell
// roundoff from genuinely negative mass.
double count_scale(const Matrix& m) {
  double s = 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s *= 1.0 + std::abs(m(i, i));
  return s;
}

void check_range(std::span<const int> s, int n) {
  for (int i : s) {
    if (i < 0 || i >= n) {
      throw InvalidArgument("element " + std::to_string(i) + " outside ground set of size " +
                            std::to_string(n));
    }
  }
}

// Residual blocks and quotas after removing `chosen`, in residual indices;
// quotas may go negative when `chosen` is infeasible.
struct ResidualPartition {
  std::vector<int> group_of;  // per residual element
  std::vector<int> quotas;
};

ResidualPartition residual_partition(const Constraint& c, const ElementSet& chosen, int n) {
  std::vector<int> block_of(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < c.blocks.size(); ++b) {
    for (int i : c.blocks[b]) block_of[i] = static_cast<int>(b);
  }
  ResidualPartition out;
  out.quotas = c.quotas;
  for (int i : chosen) --out.quotas[block_of[i]];
  for (int i = 0; i < n; ++i) {
    if (!contains(chosen, i)) out.group_of.push_back(block_of[i]);
  }
  return out;
}

}  // namespace

Constraint Constraint::cardinality(int k) {
  Constraint c;
  c.type = Type::kCardinality;
  c.k = k;
  return c;
}

Constraint Constraint::partition(std::vector<ElementSet> blocks, std::vector<int> quotas) {
  Constraint c;
  c.type = Type::kPartition;
  for (auto& b : blocks) b = normalized(std::move(b));
  c.blocks = std::move(blocks);
  c.quotas = std::move(quotas);
  c.k = std::accumulate(c.quotas.begin(), c.quotas.end(), 0);
  return c;
}

int Constraint::target_size() const {
  switch (type) {
    case Type::kNone:
      return -1;
    case Type::kCardinality:
      return k;
    case Type::kPartition:
      return std::accumulate(quotas.begin(), quotas.end(), 0);
  }
  return -1;
}

std::string_view to_string(Constraint::Type type) {
  switch (type) {
    case Constraint::Type::kNone:
      return "none";
    case Constraint::Type::kCardinality:
      return "cardinality";
    case Constraint::Type::kPartition:
      return "partition";
  }
  return "unknown";
}

DppModel::DppModel(EnsembleMatrix ensemble, Constraint constraint, Trusted)
    : ensemble_(std::move(ensemble)), constraint_(std::move(constraint)) {}

DppModel::DppModel(EnsembleMatrix ensemble, Constraint constraint)
    : DppModel(std::move(ensemble), std::move(constraint), Trusted{}) {
  const int n = ensemble_.size();
  switch (constraint_.type) {
    case Constraint::Type::kNone:
      return;
    case Constraint::Type::kCardinality:
      if (constraint_.k < 0 || constraint_.k > n) {
        throw InvalidConstraint("cardinality " + std::to_string(constraint_.k) +
                                " outside [0, " + std::to_string(n) + "]");
      }
      break;
    case Constraint::Type::kPartition: {
      const auto r = constraint_.blocks.size();
      if (r == 0 || r > static_cast<std::size_t>(kMaxPartitionBlocks)) {
        throw InvalidConstraint("partition needs 1.." + std::to_string(kMaxPartitionBlocks) +
                                " blocks");
      }
      if (constraint_.quotas.size() != r) {
        throw InvalidConstraint("one quota per block required");
      }
      std::vector<int> seen(static_cast<std::size_t>(n), 0);
      for (std::size_t b = 0; b < r; ++b) {
        check_range(constraint_.blocks[b], n);
        for (int i : constraint_.blocks[b]) ++seen[i];
        const int q = constraint_.quotas[b];
        if (q < 0 || q > static_cast<int>(constraint_.blocks[b].size())) {
          throw InvalidConstraint("quota " + std::to_string(q) + " infeasible for block " +
                                  std::to_string(b));
        }
      }
      if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; })) {
        throw InvalidConstraint("blocks must be disjoint and cover the ground set");
      }
      break;
    }
  }
  if (!(total() > 0.0)) throw InvalidConstraint("constrained model has zero partition function");
}

std::shared_ptr<const DppModel> DppModel::make(EnsembleMatrix ensemble, Constraint constraint) {
  return std::make_shared<const DppModel>(std::move(ensemble), std::move(constraint));
}

const MarginalKernel& DppModel::kernel() const {
  std::call_once(kernel_once_, [this] { kernel_.emplace(kernel_from_ensemble(ensemble_)); });
  return *kernel_;
}

double DppModel::mass(std::span<const int> s) const {
  const ElementSet set = normalized({s.begin(), s.end()});
  check_range(set, ground_size());
  const int size = static_cast<int>(set.size());
  switch (constraint_.type) {
    case Constraint::Type::kNone:
      break;
    case Constraint::Type::kCardinality:
      if (size != constraint_.k) return 0.0;
      break;
    case Constraint::Type::kPartition:
      for (std::size_t b = 0; b < constraint_.blocks.size(); ++b) {
        const auto& block = constraint_.blocks[b];
        const auto hits = std::count_if(set.begin(), set.end(),
                                        [&](int i) { return contains(block, i); });
        if (hits != constraint_.quotas[b]) return 0.0;
      }
      break;
  }
  const Matrix sub = principal_submatrix(ensemble_.matrix(), set);
  return clamp_mass(det(sub), count_scale(sub));
}

double DppModel::count(std::span<const int> given) const {
  const int n = ground_size();
  const ElementSet t = normalized({given.begin(), given.end()});
  check_range(t, n);
  const int kt = static_cast<int>(t.size());
  ResidualPartition parts;
  if (constraint_.type == Constraint::Type::kCardinality && kt > constraint_.k) return 0.0;
  if (constraint_.type == Constraint::Type::kPartition) {
    parts = residual_partition(constraint_, t, n);
    if (std::any_of(parts.quotas.begin(), parts.quotas.end(), [](int q) { return q < 0; })) {
      return 0.0;
    }
  }
  double block_det = 1.0;
  Matrix residual;
  try {
    residual = schur_complement(ensemble_.matrix(), t, &block_det);
  } catch (const SingularBlock&) {
    return 0.0;
  }
  const double scale = std::abs(block_det) * count_scale(residual);
  double value = 0.0;
  switch (constraint_.type) {
    case Constraint::Type::kNone:
      value = block_det * det(Matrix::Identity(residual.rows(), residual.cols()) + residual);
      break;
    case Constraint::Type::kCardinality: {
      const int c = constraint_.k - kt;
      if (residual.rows() <= kInterpolationMaxOrder && !exactly_diagonal(residual)) {
        const std::vector<int> one_group(static_cast<std::size_t>(residual.rows()), 0);
        value = block_det * grouped_coefficient(residual, Groups{one_group, {c}}, nullptr);
      } else {
        const std::vector<long double> e =
            elementary_symmetric_spectral(residual, ensemble_.kind(), c);
        value = block_det * static_cast<double>(e[c]);
      }
      break;
    }
    case Constraint::Type::kPartition:
      value = block_det *
              grouped_coefficient(residual, Groups{parts.group_of, parts.quotas}, nullptr);
      break;
  }
  return clamp_mass(value, scale);
}

std::vector<double> DppModel::inclusion_counts() const {
  const Matrix& l = ensemble_.matrix();
  const int n = ground_size();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (n == 0) return out;
  const double scale = count_scale(l);
  switch (constraint_.type) {
    case Constraint::Type::kNone: {
      const double z = total();
      for (int i = 0; i < n; ++i) out[i] = z * kernel().marginal(i);
      break;
    }
    case Constraint::Type::kCardinality:
      if (n <= kInterpolationMaxOrder && !exactly_diagonal(l)) {
        std::vector<int> one_group(static_cast<std::size_t>(n), 0);
        grouped_coefficient(l, Groups{one_group, {constraint_.k}}, &out);
      } else {
        out = spectral_inclusion(l, ensemble_.kind(), constraint_.k);
      }
      break;
    case Constraint::Type::kPartition: {
      const ResidualPartition parts = residual_partition(constraint_, {}, n);
      grouped_coefficient(l, Groups{parts.group_of, parts.quotas}, &out);
      break;
    }
  }
  for (double& v : out) v = clamp_mass(v, scale);
  return out;
}

Conditioning DppModel::condition(std::span<const int> chosen) const {
  const int n = ground_size();
  const ElementSet t = normalized({chosen.begin(), chosen.end()});
  check_range(t, n);
  Conditioning out;
  Constraint residual_constraint = constraint_;
  ResidualPartition parts;
  switch (constraint_.type) {
    case Constraint::Type::kNone:
      break;
    case Constraint::Type::kCardinality:
      if (static_cast<int>(t.size()) > constraint_.k) {
        throw ZeroMassCondition("conditioning set larger than the cardinality constraint");
      }
      residual_constraint.k -= static_cast<int>(t.size());
      break;
    case Constraint::Type::kPartition:
      parts = residual_partition(constraint_, t, n);
      if (std::any_of(parts.quotas.begin(), parts.quotas.end(), [](int q) { return q < 0; })) {
        throw ZeroMassCondition("conditioning set exceeds a partition quota");
      }
      break;
  }
  Matrix residual;
  try {
    residual = schur_complement(ensemble_.matrix(), t, &out.factor);
  } catch (const SingularBlock& e) {
    throw ZeroMassCondition(e.what());
  }
  if (ensemble_.symmetric()) residual = 0.5 * (residual + residual.transpose()).eval();
  std::vector<int> rest = complement(t, n);

  if (constraint_.type == Constraint::Type::kPartition) {
    // Elements of exhausted blocks cannot appear any more; drop them.
    std::vector<int> keep;
    std::vector<int> keep_map;
    std::vector<int> renumber(parts.quotas.size(), -1);
    residual_constraint.blocks.clear();
    residual_constraint.quotas.clear();
    for (std::size_t j = 0; j < rest.size(); ++j) {
      const int b = parts.group_of[j];
      if (parts.quotas[b] == 0) continue;
      if (renumber[b] < 0) {
        renumber[b] = static_cast<int>(residual_constraint.blocks.size());
        residual_constraint.blocks.emplace_back();
        residual_constraint.quotas.push_back(parts.quotas[b]);
      }
      residual_constraint.blocks[renumber[b]].push_back(static_cast<int>(keep.size()));
      keep.push_back(static_cast<int>(j));
      keep_map.push_back(rest[j]);
    }
    for (std::size_t b = 0; b < parts.quotas.size(); ++b) {
      if (parts.quotas[b] > 0 && renumber[b] < 0) {
        throw ZeroMassCondition("a block with positive quota has no elements left");
      }
    }
    residual_constraint.k = residual_constraint.target_size();
    if (keep.size() != rest.size()) residual = principal_submatrix(residual, keep);
    rest = std::move(keep_map);
  }
  out.index_map = std::move(rest);
  out.residual = std::shared_ptr<const DppModel>(
      new DppModel(EnsembleMatrix::trusted(std::move(residual), ensemble_.kind()),
                   std::move(residual_constraint), Trusted{}));
  return out;
}

std::string DppModel::describe() const {
  std::ostringstream out;
  out << "dpp n=" << ground_size() << " " << to_string(ensemble_.kind()) << " "
      << to_string(constraint_.type);
  if (constraint_.type != Constraint::Type::kNone) out << " k=" << target_size();
  return out.str();
}

std::shared_ptr<const DppModel> DppModel::with_cardinality(int k) const {
  return make(ensemble_, Constraint::cardinality(k));
}

double count(const DppModel& model, std::span<const int> given) { return model.count(given); }

double marginal(const DppModel& model, int i, std::span<const int> given) {
  const ElementSet g = normalized({given.begin(), given.end()});
  if (contains(g, i)) throw InvalidArgument("element " + std::to_string(i) + " already given");
  const double base = model.count(g);
  if (!(base > 0.0)) throw ZeroConditional("count of " + to_string(g) + " is zero");
  ElementSet with = g;
  with.push_back(i);
  return clamp_probability(model.count(normalized(std::move(with))) / base);
}

ConditionedState condition(const DppModel& model, std::span<const int> chosen) {
  Conditioning c = model.condition(chosen);
  auto residual = std::static_pointer_cast<const DppModel>(c.residual);
  if (!(residual->total() > 0.0)) {
    throw ZeroMassCondition("conditioning set has zero mass");
  }
  ConditionedState state;
  state.chosen = normalized({chosen.begin(), chosen.end()});
  state.residual = std::move(residual);
  state.index_map = std::move(c.index_map);
  state.block_det = c.factor;
  return state;
}

std::vector<double> size_distribution(const DppModel& model) {
  if (model.constraint().type != Constraint::Type::kNone) {
    throw InvalidArgument("size distribution needs an unconstrained model");
  }
  const std::vector<long double> e =
      elementary_symmetric(model.ensemble().matrix(), model.ensemble().kind());
  long double z = 0.0L;
  for (long double v : e) z += v;
  std::vector<double> out(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) {
    out[j] = std::max(0.0, static_cast<double>(e[j] / z));
  }
  return out;
}

namespace {

Matrix matrix_from_json(const nlohmann::json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != n) {
      throw ParseError("inline matrix must be square");
    }
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

std::shared_ptr<const DppModel> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  try {
    Matrix m;
    const auto& mat = doc.at("matrix");
    if (mat.is_string()) {
      std::filesystem::path p = mat.get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(path).parent_path() / p;
      m = read_matrix_file(p.string());
    } else {
      m = matrix_from_json(mat);
    }
    Constraint c;
    if (doc.contains("constraint")) {
      const auto& cj = doc.at("constraint");
      const std::string type = cj.value("type", "none");
      if (type == "cardinality") {
        c = Constraint::cardinality(cj.at("k").get<int>());
      } else if (type == "partition") {
        c = Constraint::partition(cj.at("blocks").get<std::vector<ElementSet>>(),
                                  cj.at("quotas").get<std::vector<int>>());
      } else if (type != "none") {
        throw ParseError("unknown constraint type '" + type + "'");
      }
    }
    return DppModel::make(EnsembleMatrix(std::move(m)), std::move(c));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

Constraint parse_partition(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParseError("partition spec needs 'blocks:quotas'");
  auto parse_list = [](const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ParseError("bad integer '" + item + "' in partition spec");
      }
    }
    return out;
  };
  std::vector<ElementSet> blocks;
  std::stringstream ss(spec.substr(0, colon));
  std::string block;
  while (std::getline(ss, block, '|')) blocks.push_back(parse_list(block));
  return Constraint::partition(std::move(blocks), parse_list(spec.substr(colon + 1)));
}

}  // namespace pardpp
