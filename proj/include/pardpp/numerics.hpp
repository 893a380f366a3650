#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pardpp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Floating-point cutoffs. The algorithms are exact in exact arithmetic; these
// separate roundoff from genuine violations.
namespace tol {
inline constexpr double kSymmetry = 1e-8;
inline constexpr double kPsd = 1e-8;
inline constexpr double kSingular = 1e-12;
inline constexpr double kNumeric = 1e-9;
inline constexpr double kDetRelative = 1e-9;
inline constexpr double kInterpolation = 1e-6;
inline constexpr double kMinor = 1e-9;
inline constexpr double kClamp = 1e-9;
}  // namespace tol

// Largest order for which elementary symmetric polynomials are obtained by
// determinant interpolation; larger matrices use the spectral route.
inline constexpr int kInterpolationMaxOrder = 16;

enum class MatrixKind { kSymmetricPsd, kNonsymmetricPsd, kUnclassified };

std::string_view to_string(MatrixKind kind);

// The ensemble matrix L of a DPP together with its symmetry/PSD class.
class EnsembleMatrix {
 public:
  // Classifies `entries`: symmetric-PSD, else nonsymmetric-PSD (L + L^T >= 0),
  // else unclassified. Throws InvalidMatrix on non-square or non-finite input.
  explicit EnsembleMatrix(Matrix entries);

  // Checks that `entries` satisfies the invariants of `kind`.
  EnsembleMatrix(Matrix entries, MatrixKind kind);

  // Skips validation. For matrices whose class follows algebraically from a
  // validated parent (Schur complements, positive rescaling).
  static EnsembleMatrix trusted(Matrix entries, MatrixKind kind);

  [[nodiscard]] int size() const { return static_cast<int>(entries_.rows()); }
  [[nodiscard]] const Matrix& matrix() const { return entries_; }
  [[nodiscard]] MatrixKind kind() const { return kind_; }
  [[nodiscard]] bool symmetric() const { return kind_ == MatrixKind::kSymmetricPsd; }
  [[nodiscard]] double operator()(int i, int j) const { return entries_(i, j); }

 private:
  EnsembleMatrix(Matrix entries, MatrixKind kind, bool validate);

  Matrix entries_;
  MatrixKind kind_;
};

// K = L (I + L)^{-1}. Diagonal entries are the inclusion probabilities.
class MarginalKernel {
 public:
  explicit MarginalKernel(Matrix entries);

  [[nodiscard]] int size() const { return static_cast<int>(entries_.rows()); }
  [[nodiscard]] const Matrix& matrix() const { return entries_; }
  [[nodiscard]] double marginal(int i) const { return entries_(i, i); }

 private:
  Matrix entries_;
};

MarginalKernel kernel_from_ensemble(const EnsembleMatrix& ensemble);
EnsembleMatrix ensemble_from_kernel(const MarginalKernel& kernel);

// Determinant by LU with partial pivoting. Returns 0 for an empty product of
// pivots that vanishes exactly; never throws for square finite input.
double det(const Matrix& m);

Matrix principal_submatrix(const Matrix& m, std::span<const int> index);
Matrix submatrix(const Matrix& m, std::span<const int> rows, std::span<const int> cols);

// L^T = L_{~T} - L_{~T,T} L_{T,T}^{-1} L_{T,~T} on the complement of T (in
// ascending index order). Throws SingularBlock if |det(L_{T,T})| <= kSingular.
// `block_det`, when given, receives det(L_{T,T}).
Matrix schur_complement(const Matrix& m, std::span<const int> conditioned,
                        double* block_det = nullptr);
EnsembleMatrix schur_complement(const EnsembleMatrix& ensemble,
                                std::span<const int> conditioned,
                                double* block_det = nullptr);

// Coefficients e_0..e_n of det(L + zI) = sum_j e_j z^{n-j}, i.e. e_j is the sum
// of the j x j principal minors. Obtained by evaluating det(L + zI) at the
// n+1 roots of unity scaled by |tr(L)|/n and solving the Vandermonde system
// with an inverse DFT. Throws IllConditioned if the reconstructed polynomial
// misses a held-out evaluation by more than kInterpolation (relative).
std::vector<double> char_poly_coeffs(const Matrix& m);

// Same quantities via eigenvalues (exact diagonal shortcut, self-adjoint
// solver, or complex eigenvalues for nonsymmetric input), accumulated in
// extended precision. Entries above `max_degree` are not computed.
std::vector<long double> elementary_symmetric_spectral(const Matrix& m, MatrixKind kind,
                                                       int max_degree = -1);

// Dispatches between interpolation (small orders) and the spectral route.
std::vector<long double> elementary_symmetric(const Matrix& m, MatrixKind kind,
                                              int max_degree = -1);

// e_0..e_{max_degree} of a list of numbers.
std::vector<long double> elementary_symmetric_of(std::span<const long double> values,
                                                 int max_degree);

// Newton divided differences at real `nodes`, converted to monomial
// coefficients c_0..c_d with p(z) = sum_j c_j z^j. Fine for low degree; the
// determinant expansions above use roots of unity instead.
std::vector<double> interpolate_monomial(std::span<const double> nodes,
                                         std::span<const double> values);

// Clamps p to [0,1] when within kClamp of the interval; throws
// ProbabilityOutOfRange otherwise.
double clamp_probability(double p);

// Clamps small negative masses to 0; throws NegativeMass below -kClamp
// (relative to `scale`).
double clamp_mass(double mass, double scale = 1.0);

double min_symmetric_eigenvalue(const Matrix& m);
double max_symmetric_eigenvalue(const Matrix& m);

// Parses the matrix text format: first non-comment line holds n, followed by
// n rows of n whitespace-separated decimals. Lines starting with '#' are
// ignored. Locale independent.
Matrix parse_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);
void write_matrix(std::ostream& out, const Matrix& m);

}  // namespace pardpp
