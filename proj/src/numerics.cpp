#include "pardpp/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "pardpp/element_set.hpp"
#include "pardpp/errors.hpp"

namespace pardpp {

namespace {

double scale_of(const Matrix& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InvalidMatrix(std::string(what) + " is not square");
  }
  if (!m.allFinite()) {
    throw InvalidMatrix(std::string(what) + " has non-finite entries");
  }
}

bool is_symmetric(const Matrix& m, double scale) {
  if (m.size() == 0) return true;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol::kSymmetry * scale;
}

bool exactly_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

MatrixKind classify(const Matrix& m) {
  if (m.size() == 0) return MatrixKind::kSymmetricPsd;
  const double scale = scale_of(m);
  const Matrix sym = 0.5 * (m + m.transpose());
  const bool psd_part = min_symmetric_eigenvalue(sym) >= -tol::kPsd * scale;
  if (!psd_part) return MatrixKind::kUnclassified;
  return is_symmetric(m, scale) ? MatrixKind::kSymmetricPsd : MatrixKind::kNonsymmetricPsd;
}

}  // namespace

std::string_view to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::kSymmetricPsd:
      return "symmetric-psd";
    case MatrixKind::kNonsymmetricPsd:
      return "nonsymmetric-psd";
    case MatrixKind::kUnclassified:
      return "unclassified";
  }
  return "unknown";
}

EnsembleMatrix::EnsembleMatrix(Matrix entries, MatrixKind kind, bool validate)
    : entries_(std::move(entries)), kind_(kind) {
  if (!validate) return;
  require_square_finite(entries_, "ensemble matrix");
  const double scale = scale_of(entries_);
  switch (kind_) {
    case MatrixKind::kSymmetricPsd:
      if (!is_symmetric(entries_, scale)) {
        throw InvalidMatrix("ensemble matrix is not symmetric");
      }
      if (entries_.size() > 0 && min_symmetric_eigenvalue(entries_) < -tol::kPsd * scale) {
        throw InvalidMatrix("ensemble matrix is not positive semidefinite");
      }
      entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
      break;
    case MatrixKind::kNonsymmetricPsd:
      if (entries_.size() > 0 &&
          min_symmetric_eigenvalue(0.5 * (entries_ + entries_.transpose())) <
              -tol::kPsd * scale) {
        throw InvalidMatrix("L + L^T is not positive semidefinite");
      }
      break;
    case MatrixKind::kUnclassified:
      break;
  }
}

EnsembleMatrix::EnsembleMatrix(Matrix entries)
    : EnsembleMatrix(std::move(entries), MatrixKind::kUnclassified, false) {
  require_square_finite(entries_, "ensemble matrix");
  kind_ = classify(entries_);
  if (kind_ == MatrixKind::kSymmetricPsd) {
    entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
  }
}

EnsembleMatrix::EnsembleMatrix(Matrix entries, MatrixKind kind)
    : EnsembleMatrix(std::move(entries), kind, true) {}

EnsembleMatrix EnsembleMatrix::trusted(Matrix entries, MatrixKind kind) {
  return EnsembleMatrix(std::move(entries), kind, false);
}

MarginalKernel::MarginalKernel(Matrix entries) : entries_(std::move(entries)) {
  require_square_finite(entries_, "marginal kernel");
}

MarginalKernel kernel_from_ensemble(const EnsembleMatrix& ensemble) {
  const Matrix& l = ensemble.matrix();
  const auto n = l.rows();
  const Matrix shifted = Matrix::Identity(n, n) + l;
  Eigen::PartialPivLU<Matrix> lu(shifted);
  if (n > 0 && std::abs(lu.determinant()) <= tol::kSingular) {
    throw SingularMatrix("I + L is numerically singular");
  }
  Matrix k = Matrix::Identity(n, n) - lu.inverse();
  if (ensemble.symmetric()) k = 0.5 * (k + k.transpose()).eval();
  return MarginalKernel(std::move(k));
}

EnsembleMatrix ensemble_from_kernel(const MarginalKernel& kernel) {
  const Matrix& k = kernel.matrix();
  const auto n = k.rows();
  const Matrix complement = Matrix::Identity(n, n) - k;
  Eigen::PartialPivLU<Matrix> lu(complement);
  if (n > 0 && std::abs(lu.determinant()) <= tol::kSingular) {
    throw SingularMatrix("I - K is numerically singular (an element has marginal 1)");
  }
  return EnsembleMatrix(lu.inverse() - Matrix::Identity(n, n));
}

double det(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidMatrix("determinant of a non-square matrix");
  if (m.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Matrix>(m).determinant();
}

Matrix principal_submatrix(const Matrix& m, std::span<const int> index) {
  return submatrix(m, index, index);
}

Matrix submatrix(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

Matrix schur_complement(const Matrix& m, std::span<const int> conditioned,
                        double* block_det) {
  const int n = static_cast<int>(m.rows());
  const ElementSet cond = normalized({conditioned.begin(), conditioned.end()});
  for (int i : cond) {
    if (i < 0 || i >= n) throw InvalidArgument("conditioning element out of range");
  }
  if (cond.empty()) {
    if (block_det) *block_det = 1.0;
    return m;
  }
  const std::vector<int> rest = complement(cond, n);
  const Matrix d = principal_submatrix(m, cond);
  Eigen::PartialPivLU<Matrix> lu(d);
  const double dd = lu.determinant();
  if (block_det) *block_det = dd;
  if (std::abs(dd) <= tol::kSingular) {
    throw SingularBlock("det(L_{T,T}) = " + std::to_string(dd) + " for T = " +
                        to_string(cond));
  }
  if (rest.empty()) return Matrix(0, 0);
  return principal_submatrix(m, rest) -
         submatrix(m, rest, cond) * lu.solve(submatrix(m, cond, rest));
}

EnsembleMatrix schur_complement(const EnsembleMatrix& ensemble,
                                std::span<const int> conditioned, double* block_det) {
  Matrix out = schur_complement(ensemble.matrix(), conditioned, block_det);
  if (ensemble.symmetric()) out = 0.5 * (out + out.transpose()).eval();
  return EnsembleMatrix::trusted(std::move(out), ensemble.kind());
}

std::vector<double> interpolate_monomial(std::span<const double> nodes,
                                         std::span<const double> values) {
  if (nodes.size() != values.size() || nodes.empty()) {
    throw InvalidArgument("interpolation needs matching, nonempty node/value lists");
  }
  const int d = static_cast<int>(nodes.size()) - 1;
  std::vector<double> a(values.begin(), values.end());
  for (int j = 1; j <= d; ++j) {
    for (int i = d; i >= j; --i) {
      a[i] = (a[i] - a[i - 1]) / (nodes[i] - nodes[i - j]);
    }
  }
  std::vector<double> c(static_cast<std::size_t>(d) + 1, 0.0);
  c[0] = a[d];
  for (int j = d - 1; j >= 0; --j) {
    for (int i = d - j; i >= 1; --i) c[i] = c[i - 1] - nodes[j] * c[i];
    c[0] = -nodes[j] * c[0] + a[j];
  }
  return c;
}

std::vector<double> char_poly_coeffs(const Matrix& m) {
  require_square_finite(m, "matrix");
  const int n = static_cast<int>(m.rows());
  if (n == 0) return {1.0};
  using Complex = std::complex<double>;
  const int nodes = n + 1;
  const double trace_scale = std::abs(m.trace()) / n;
  const double radius = trace_scale > 1e-12 ? trace_scale : 1.0;
  const Eigen::MatrixXcd base = m.cast<Complex>();
  auto evaluate = [&](Complex z) {
    Eigen::MatrixXcd shifted = base;
    shifted.diagonal().array() += z;
    return shifted.partialPivLu().determinant();
  };
  std::vector<Complex> values(nodes);
  for (int j = 0; j < nodes; ++j) values[j] = evaluate(std::polar(radius, 2.0 * M_PI * j / nodes));

  // Inverse DFT solves the Vandermonde system on the scaled roots of unity.
  std::vector<double> mono(nodes);
  for (int p = 0; p < nodes; ++p) {
    Complex acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
      acc += values[j] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(j) * p / nodes);
    }
    mono[p] = (acc / static_cast<double>(nodes)).real() / std::pow(radius, p);
  }

  const Complex check_node = std::polar(radius, M_PI / nodes);
  const Complex expected = evaluate(check_node);
  Complex got = 0.0;
  double magnitude = 0.0;
  for (int p = nodes - 1; p >= 0; --p) {
    got = got * check_node + mono[p];
    magnitude = magnitude * radius + std::abs(mono[p]);
  }
  if (std::abs(got - expected) > tol::kInterpolation * std::max(magnitude, 1e-300)) {
    throw IllConditioned("characteristic polynomial interpolation residual " +
                         std::to_string(std::abs(got - expected) / magnitude));
  }
  std::vector<double> e(nodes);
  for (int j = 0; j < nodes; ++j) e[j] = mono[n - j];
  return e;
}

std::vector<long double> elementary_symmetric_of(std::span<const long double> values,
                                                 int max_degree) {
  const int n = static_cast<int>(values.size());
  if (max_degree < 0 || max_degree > n) max_degree = n;
  std::vector<long double> e(static_cast<std::size_t>(max_degree) + 1, 0.0L);
  e[0] = 1.0L;
  for (int i = 0; i < n; ++i) {
    for (int j = std::min(i + 1, max_degree); j >= 1; --j) e[j] += values[i] * e[j - 1];
  }
  return e;
}

std::vector<long double> elementary_symmetric_spectral(const Matrix& m, MatrixKind kind,
                                                       int max_degree) {
  require_square_finite(m, "matrix");
  const int n = static_cast<int>(m.rows());
  if (max_degree < 0 || max_degree > n) max_degree = n;
  if (exactly_diagonal(m)) {
    std::vector<long double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = m(i, i);
    return elementary_symmetric_of(diag, max_degree);
  }
  if (kind == MatrixKind::kSymmetricPsd || is_symmetric(m, scale_of(m))) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    std::vector<long double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = solver.eigenvalues()(i);
    return elementary_symmetric_of(eig, max_degree);
  }
  Eigen::EigenSolver<Matrix> solver(m, false);
  using Complex = std::complex<long double>;
  std::vector<Complex> e(static_cast<std::size_t>(max_degree) + 1, Complex(0.0L));
  e[0] = 1.0L;
  for (int i = 0; i < n; ++i) {
    const Complex lambda(solver.eigenvalues()(i).real(), solver.eigenvalues()(i).imag());
    for (int j = std::min(i + 1, max_degree); j >= 1; --j) e[j] += lambda * e[j - 1];
  }
  std::vector<long double> out(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) out[j] = e[j].real();
  return out;
}

std::vector<long double> elementary_symmetric(const Matrix& m, MatrixKind kind,
                                              int max_degree) {
  const int n = static_cast<int>(m.rows());
  if (max_degree < 0 || max_degree > n) max_degree = n;
  if (n <= kInterpolationMaxOrder && !exactly_diagonal(m)) {
    try {
      const std::vector<double> e = char_poly_coeffs(m);
      return {e.begin(), e.begin() + max_degree + 1};
    } catch (const IllConditioned&) {
      // fall through to the spectral route
    }
  }
  return elementary_symmetric_spectral(m, kind, max_degree);
}

double clamp_probability(double p) {
  if (!(p >= -tol::kClamp && p <= 1.0 + tol::kClamp)) {
    throw ProbabilityOutOfRange("probability " + std::to_string(p) + " outside [0,1]");
  }
  return std::clamp(p, 0.0, 1.0);
}

double clamp_mass(double mass, double scale) {
  if (std::isnan(mass) || mass < -tol::kClamp * std::max(scale, 1.0)) {
    throw NegativeMass("mass " + std::to_string(mass) + " is negative beyond roundoff");
  }
  return std::max(mass, 0.0);
}

double min_symmetric_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double max_symmetric_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(m.rows() - 1);
}

namespace {

bool content_line(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first != std::string::npos && line[first] != '#';
}

std::vector<double> parse_numbers(const std::string& line, int line_no) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    if (*p == '+') ++p;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r')) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid number");
    }
    out.push_back(v);
    p = next;
  }
  return out;
}

}  // namespace

Matrix parse_matrix(std::istream& in) {
  std::string line;
  int line_no = 0;
  long n = -1;
  Matrix m;
  int row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!content_line(line)) continue;
    if (n < 0) {
      const std::vector<double> head = parse_numbers(line, line_no);
      if (head.size() != 1 || head[0] < 0 || head[0] != std::floor(head[0])) {
        throw ParseError("line " + std::to_string(line_no) + ": expected dimension n");
      }
      n = static_cast<long>(head[0]);
      m.resize(n, n);
      continue;
    }
    if (row >= n) throw ParseError("line " + std::to_string(line_no) + ": extra row");
    const std::vector<double> values = parse_numbers(line, line_no);
    if (static_cast<long>(values.size()) != n) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n) + " entries");
    }
    for (long j = 0; j < n; ++j) m(row, j) = values[j];
    ++row;
  }
  if (n < 0) throw ParseError("missing dimension line");
  if (row != n) throw ParseError("expected " + std::to_string(n) + " rows");
  return m;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file " + path);
  return parse_matrix(in);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << m.rows() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) buf << (j ? " " : "") << m(i, j);
    buf << '\n';
  }
  out << buf.str();
}

}  // namespace pardpp
