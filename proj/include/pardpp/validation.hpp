#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pardpp/element_set.hpp"
#include "pardpp/measure.hpp"

namespace pardpp {

inline constexpr int kMaxBruteForceSize = 20;

// A normalized distribution over finitely many subsets.
struct ExactDistribution {
  std::vector<ElementSet> support;
  std::vector<double> probabilities;

  // Drops zero masses and normalizes. Throws ZeroMass on a zero total.
  static ExactDistribution from_masses(std::vector<ElementSet> sets, std::vector<double> masses);
  [[nodiscard]] double probability(const ElementSet& s) const;
  [[nodiscard]] std::map<ElementSet, double> as_map() const;
  // Throws InvariantViolation unless probabilities are nonnegative, sum to 1
  // within 1e-12 and sets are distinct.
  void validate() const;
};

// Enumerates every subset (only those of the target size for fixed-size
// measures). Throws GroundSetTooLarge for n > 20.
ExactDistribution brute_force_distribution(const SubsetMeasure& measure);

// mu D_{k -> l}: each set hands its mass evenly to its size-l subsets.
// Throws MixedSizes unless all sets have the same size >= l.
ExactDistribution downsample_distribution(const ExactDistribution& d, int l);

// Keep each element of a draw independently with probability alpha.
ExactDistribution thin_distribution(const ExactDistribution& d, double alpha);

// Relative frequencies with exact set keys.
ExactDistribution empirical_distribution(std::span<const ElementSet> samples);

// Half the l1 distance over the union of supports.
double tv_distance(const ExactDistribution& a, const ExactDistribution& b);

// 3 sqrt(support / (2 N)): Monte-Carlo allowance for N-sample TV tests.
double statistical_tv_tolerance(double support_size, double samples);

// sum q_i log(q_i / p_i). Throws SupportMismatch if some q_i > 0 has p_i = 0.
double kl_divergence(std::span<const double> q, std::span<const double> p);
// sum q_i^lambda p_i^(1 - lambda), lambda >= 1.
double renyi_divergence(std::span<const double> q, std::span<const double> p, double lambda);
// C^(lambda-1) (1 + n^(lambda-1) lambda (lambda-1) (KL(q||p) + log C)), an
// upper bound on the Renyi moment when 1/(C n) <= p_i <= C/n for all i.
double klrenyi_bound(std::span<const double> q, std::span<const double> p, double lambda,
                     double c);
// Smallest C >= 1 with 1/(C n) <= p_i <= C/n for all i (infinite if some p_i = 0).
double near_uniformity_constant(std::span<const double> p);

struct EiSpotCheck {
  int trials = 0;
  int failures = 0;
  double worst_ratio = 0.0;  // max KL(nu_1 || mu_1) / KL(nu || mu)
  double bound = 0.0;        // 1 / (alpha k)
  bool pass = false;
};

// Tests KL(nu_1 || mu_1) <= KL(nu || mu) / (alpha k) with slack 1e-9. The
// first trial is nu = mu, the next ones are point masses on support sets, the
// rest random (Dirichlet) distributions on the support. Requires n <= 12 and
// a fixed target size.
EiSpotCheck ei_spot_check(const SubsetMeasure& measure, double alpha, int trials,
                          std::uint64_t seed);

// Uniform measure over unions of k/2 of the pairs {2i, 2i+1}.
class HardInstance final : public SubsetMeasure,
                           public std::enable_shared_from_this<HardInstance> {
 public:
  // Throws BadParity for odd k and InvalidArgument unless 0 <= k <= 2 n_pairs.
  HardInstance(int n_pairs, int k);

  [[nodiscard]] int ground_size() const override { return 2 * pairs_; }
  [[nodiscard]] int target_size() const override { return k_; }
  [[nodiscard]] double mass(std::span<const int> s) const override;
  [[nodiscard]] double count(std::span<const int> given) const override;
  [[nodiscard]] std::vector<double> inclusion_counts() const override;
  [[nodiscard]] Conditioning condition(std::span<const int> chosen) const override;
  [[nodiscard]] std::string describe() const override;

 private:
  int pairs_;
  int k_;
};

std::shared_ptr<const HardInstance> hard_instance(int n_pairs, int k);

// Number of pairs {2i, 2i+1} contained in s.
int duplicates(std::span<const int> s);

// P[a draw from mu_l has exactly t duplicates], closed form.
double duplicate_probability(int k, int l, int t);

// P[t duplicates] for t = 0..l/2, from an exact distribution over size-l sets.
std::vector<double> duplicate_distribution(const ExactDistribution& d, int l);

// For every l: P[t duplicates] next to (l^2/k)^t, and for every l whose
// double 2l is also listed, the ratio P[t dup at 2l] / P[t dup at l] next
// to 4^t.
nlohmann::json duplicate_scaling_report(int n_pairs, int k, std::span<const int> ls);

// max over |T| >= 2 of P[T in S] / prod_{i in T} P[i in S]; at most 1 for
// negatively correlated measures. Requires n <= 12.
double negative_correlation_ratio(const SubsetMeasure& measure);

// One acceptance-style check: named value against a threshold.
struct CriterionReport {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

nlohmann::json to_json(const CriterionReport& report);
nlohmann::json to_json(const EiSpotCheck& check);

}  // namespace pardpp
