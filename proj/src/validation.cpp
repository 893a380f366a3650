#include "pardpp/validation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "pardpp/errors.hpp"
#include "pardpp/rng.hpp"

namespace pardpp {
namespace {

// Calls f on every size-r subset of {0..n-1}, in lexicographic order.
template <typename F>
void for_each_combination(int n, int r, F&& f) {
  if (r < 0 || r > n) return;
  std::vector<int> c(r);
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    f(std::span<const int>(c));
    int i = r - 1;
    while (i >= 0 && c[i] == n - r + i) --i;
    if (i < 0) return;
    ++c[i];
    for (int j = i + 1; j < r; ++j) c[j] = c[j - 1] + 1;
  }
}

long double binomial(int n, int r) {
  if (r < 0 || n < 0 || r > n) return 0.0L;
  r = std::min(r, n - r);
  long double value = 1.0L;
  for (int i = 1; i <= r; ++i) value = value * (n - r + i) / i;
  return value;
}

std::vector<double> marginals_of(const ExactDistribution& d, int n) {
  std::vector<double> m(n, 0.0);
  for (std::size_t s = 0; s < d.support.size(); ++s) {
    for (int i : d.support[s]) m[i] += d.probabilities[s];
  }
  return m;
}

}  // namespace

ExactDistribution ExactDistribution::from_masses(std::vector<ElementSet> sets,
                                                 std::vector<double> masses) {
  if (sets.size() != masses.size()) throw InvalidArgument("sets and masses differ in length");
  std::map<ElementSet, double> merged;
  double total = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (masses[i] < 0.0) throw NegativeMass("negative mass on " + to_string(sets[i]));
    if (masses[i] == 0.0) continue;
    merged[normalized(std::move(sets[i]))] += masses[i];
    total += masses[i];
  }
  if (!(total > 0.0)) throw ZeroMass("distribution has zero total mass");
  ExactDistribution d;
  for (auto& [s, m] : merged) {
    d.support.push_back(s);
    d.probabilities.push_back(m / total);
  }
  return d;
}

double ExactDistribution::probability(const ElementSet& s) const {
  const auto it = std::lower_bound(support.begin(), support.end(), s);
  if (it != support.end() && *it == s) return probabilities[it - support.begin()];
  // Supports built by hand need not be sorted.
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == s) return probabilities[i];
  }
  return 0.0;
}

std::map<ElementSet, double> ExactDistribution::as_map() const {
  std::map<ElementSet, double> m;
  for (std::size_t i = 0; i < support.size(); ++i) m[support[i]] += probabilities[i];
  return m;
}

void ExactDistribution::validate() const {
  if (support.size() != probabilities.size()) {
    throw InvariantViolation("support and probabilities differ in length");
  }
  double sum = 0.0;
  for (double p : probabilities) {
    if (p < 0.0) throw InvariantViolation("negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvariantViolation("probabilities do not sum to 1");
  std::set<ElementSet> distinct(support.begin(), support.end());
  if (distinct.size() != support.size()) throw InvariantViolation("repeated support set");
}

ExactDistribution brute_force_distribution(const SubsetMeasure& measure) {
  const int n = measure.ground_size();
  if (n > kMaxBruteForceSize) {
    throw GroundSetTooLarge("brute force needs n <= " + std::to_string(kMaxBruteForceSize));
  }
  std::vector<ElementSet> sets;
  std::vector<double> masses;
  auto visit = [&](std::span<const int> s) {
    const double m = measure.mass(s);
    if (m != 0.0) {
      sets.emplace_back(s.begin(), s.end());
      masses.push_back(m);
    }
  };
  const int k = measure.target_size();
  if (k >= 0) {
    for_each_combination(n, k, visit);
  } else {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) visit(from_mask(mask));
  }
  return ExactDistribution::from_masses(std::move(sets), std::move(masses));
}

ExactDistribution downsample_distribution(const ExactDistribution& d, int l) {
  if (d.support.empty()) return d;
  const std::size_t k = d.support.front().size();
  for (const auto& s : d.support) {
    if (s.size() != k) throw MixedSizes("downsampling needs sets of a single size");
  }
  if (l < 0 || static_cast<std::size_t>(l) > k) {
    throw MixedSizes("target size exceeds the set size");
  }
  const double share = 1.0 / static_cast<double>(binomial(static_cast<int>(k), l));
  std::map<ElementSet, double> out;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    const auto& s = d.support[i];
    for_each_combination(static_cast<int>(k), l, [&](std::span<const int> pick) {
      ElementSet t;
      t.reserve(pick.size());
      for (int j : pick) t.push_back(s[j]);
      out[t] += d.probabilities[i] * share;
    });
  }
  ExactDistribution result;
  for (auto& [s, p] : out) {
    result.support.push_back(s);
    result.probabilities.push_back(p);
  }
  return result;
}

ExactDistribution thin_distribution(const ExactDistribution& d, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  std::map<ElementSet, double> out;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    const auto& u = d.support[i];
    const int m = static_cast<int>(u.size());
    if (m > kMaxBruteForceSize) throw GroundSetTooLarge("set too large to thin exactly");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      ElementSet s;
      for (int j = 0; j < m; ++j) {
        if (mask >> j & 1U) s.push_back(u[j]);
      }
      const int kept = static_cast<int>(s.size());
      const double w = std::pow(alpha, kept) * std::pow(1.0 - alpha, m - kept);
      if (w > 0.0) out[s] += d.probabilities[i] * w;
    }
  }
  ExactDistribution result;
  for (auto& [s, p] : out) {
    result.support.push_back(s);
    result.probabilities.push_back(p);
  }
  return result;
}

ExactDistribution empirical_distribution(std::span<const ElementSet> samples) {
  std::map<ElementSet, double> counts;
  for (const auto& s : samples) counts[normalized(s)] += 1.0;
  ExactDistribution d;
  const double n = static_cast<double>(samples.size());
  for (auto& [s, c] : counts) {
    d.support.push_back(s);
    d.probabilities.push_back(c / n);
  }
  return d;
}

double tv_distance(const ExactDistribution& a, const ExactDistribution& b) {
  std::map<ElementSet, double> diff = a.as_map();
  for (std::size_t i = 0; i < b.support.size(); ++i) diff[b.support[i]] -= b.probabilities[i];
  double sum = 0.0;
  for (const auto& [s, v] : diff) sum += std::abs(v);
  return std::min(1.0, 0.5 * sum);
}

double statistical_tv_tolerance(double support_size, double samples) {
  return 3.0 * std::sqrt(support_size / (2.0 * samples));
}

double kl_divergence(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size()) throw SupportMismatch("distributions differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) throw SupportMismatch("q puts mass where p has none");
    sum += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(0.0, sum);
}

double renyi_divergence(std::span<const double> q, std::span<const double> p, double lambda) {
  if (q.size() != p.size()) throw SupportMismatch("distributions differ in length");
  if (!(lambda >= 1.0)) throw InvalidArgument("lambda must be at least 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) throw SupportMismatch("q puts mass where p has none");
    sum += std::pow(q[i], lambda) * std::pow(p[i], 1.0 - lambda);
  }
  return sum;
}

double klrenyi_bound(std::span<const double> q, std::span<const double> p, double lambda,
                     double c) {
  const double n = static_cast<double>(q.size());
  return std::pow(c, lambda - 1.0) *
         (1.0 + std::pow(n, lambda - 1.0) * lambda * (lambda - 1.0) *
                    (kl_divergence(q, p) + std::log(c)));
}

double near_uniformity_constant(std::span<const double> p) {
  const double n = static_cast<double>(p.size());
  double c = 1.0;
  for (double v : p) {
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    c = std::max({c, n * v, 1.0 / (n * v)});
  }
  return c;
}

EiSpotCheck ei_spot_check(const SubsetMeasure& measure, double alpha, int trials,
                          std::uint64_t seed) {
  const int n = measure.ground_size();
  if (n > 12) throw GroundSetTooLarge("entropic-independence spot check needs n <= 12");
  const int k = measure.target_size();
  if (k <= 0) throw InvalidArgument("spot check needs a fixed positive target size");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  const ExactDistribution mu = brute_force_distribution(measure);
  const std::vector<double> mu1 = marginals_of(mu, n);
  std::vector<double> mu1n(n);
  for (int i = 0; i < n; ++i) mu1n[i] = mu1[i] / k;

  EiSpotCheck report;
  report.bound = 1.0 / (alpha * k);
  CounterRng rng(derive_key(seed, {0x45495350}));
  const std::size_t m = mu.support.size();
  for (int trial = 0; trial < trials; ++trial) {
    ExactDistribution nu;
    nu.support = mu.support;
    nu.probabilities.assign(m, 0.0);
    if (trial == 0) {
      nu.probabilities = mu.probabilities;
    } else if (static_cast<std::size_t>(trial) <= m) {
      nu.probabilities[trial - 1] = 1.0;
    } else {
      // Dirichlet with a random concentration, from 0.05 (spiky) to 5.
      const double shape = 0.05 * std::pow(100.0, rng.uniform());
      double total = 0.0;
      for (std::size_t s = 0; s < m; ++s) {
        // Gamma(shape) by Marsaglia-Tsang on shape + 1, boosted for shape < 1.
        const double a = shape + 1.0;
        const double d = a - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        double g = 0.0;
        while (true) {
          // Standard normal by Box-Muller.
          const double u1 = 1.0 - rng.uniform();
          const double u2 = rng.uniform();
          const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
          const double v = std::pow(1.0 + c * z, 3);
          if (v <= 0.0) continue;
          const double u = 1.0 - rng.uniform();
          if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
            g = d * v;
            break;
          }
        }
        g *= std::pow(1.0 - rng.uniform(), 1.0 / shape);
        nu.probabilities[s] = g;
        total += g;
      }
      for (double& p : nu.probabilities) p /= total;
    }
    const double kl = kl_divergence(nu.probabilities, mu.probabilities);
    const std::vector<double> nu1 = marginals_of(nu, n);
    std::vector<double> nu1n(n);
    for (int i = 0; i < n; ++i) nu1n[i] = nu1[i] / k;
    const double kl1 = kl_divergence(nu1n, mu1n);
    ++report.trials;
    if (kl1 > kl * report.bound + 1e-9) ++report.failures;
    if (kl > 1e-12) report.worst_ratio = std::max(report.worst_ratio, kl1 / kl);
  }
  report.pass = report.failures == 0;
  return report;
}

HardInstance::HardInstance(int n_pairs, int k) : pairs_(n_pairs), k_(k) {
  if (k % 2 != 0) throw BadParity("hard instance needs an even k");
  if (n_pairs < 1 || k < 0 || k > 2 * n_pairs) {
    throw InvalidArgument("hard instance needs n_pairs >= 1 and 0 <= k <= 2 n_pairs");
  }
}

double HardInstance::mass(std::span<const int> s) const {
  if (static_cast<int>(s.size()) != k_) return 0.0;
  ElementSet sorted = normalized(ElementSet(s.begin(), s.end()));
  if (sorted.size() != s.size()) return 0.0;
  for (std::size_t i = 0; i < sorted.size(); i += 2) {
    if (sorted[i] % 2 != 0 || sorted[i + 1] != sorted[i] + 1) return 0.0;
  }
  return 1.0;
}

double HardInstance::count(std::span<const int> given) const {
  std::set<int> touched;
  for (int i : given) {
    if (i < 0 || i >= 2 * pairs_) throw InvalidArgument("element out of range");
    touched.insert(i / 2);
  }
  const int p = static_cast<int>(touched.size());
  return static_cast<double>(binomial(pairs_ - p, k_ / 2 - p));
}

std::vector<double> HardInstance::inclusion_counts() const {
  return std::vector<double>(2 * pairs_, static_cast<double>(binomial(pairs_ - 1, k_ / 2 - 1)));
}

Conditioning HardInstance::condition(std::span<const int> chosen) const {
  return delegate_condition(shared_from_this(), chosen);
}

std::string HardInstance::describe() const {
  return "hard-instance(n_pairs=" + std::to_string(pairs_) + ", k=" + std::to_string(k_) + ")";
}

std::shared_ptr<const HardInstance> hard_instance(int n_pairs, int k) {
  return std::make_shared<const HardInstance>(n_pairs, k);
}

int duplicates(std::span<const int> s) {
  std::set<int> members(s.begin(), s.end());
  int t = 0;
  for (int i : members) {
    if (i % 2 == 0 && members.count(i + 1)) ++t;
  }
  return t;
}

double duplicate_probability(int k, int l, int t) {
  if (k % 2 != 0) throw BadParity("k must be even");
  if (l < 0 || l > k) throw InvalidArgument("need 0 <= l <= k");
  const int half = k / 2;
  const long double ways = binomial(half, t) * binomial(half - t, l - 2 * t) *
                           std::pow(2.0L, static_cast<long double>(l - 2 * t));
  if (l - 2 * t < 0) return 0.0;
  return static_cast<double>(ways / binomial(k, l));
}

std::vector<double> duplicate_distribution(const ExactDistribution& d, int l) {
  std::vector<double> p(l / 2 + 1, 0.0);
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    if (static_cast<int>(d.support[i].size()) != l) throw MixedSizes("set of the wrong size");
    p[duplicates(d.support[i])] += d.probabilities[i];
  }
  return p;
}

nlohmann::json duplicate_scaling_report(int n_pairs, int k, std::span<const int> ls) {
  HardInstance check(n_pairs, k);  // validates the parameters
  (void)check;
  nlohmann::json rows = nlohmann::json::array();
  for (int l : ls) {
    if (l < 0 || l > k) throw InvalidArgument("l must lie in [0, k]");
    nlohmann::json row;
    row["l"] = l;
    nlohmann::json probs = nlohmann::json::array();
    nlohmann::json scale = nlohmann::json::array();
    for (int t = 0; 2 * t <= l; ++t) {
      probs.push_back(duplicate_probability(k, l, t));
      scale.push_back(std::pow(static_cast<double>(l) * l / k, t));
    }
    row["p_duplicates"] = probs;
    row["scale"] = scale;
    if (std::find(ls.begin(), ls.end(), 2 * l) != ls.end() && 2 * l <= k) {
      nlohmann::json ratios = nlohmann::json::array();
      nlohmann::json reference = nlohmann::json::array();
      for (int t = 0; 2 * t <= l; ++t) {
        const double base = duplicate_probability(k, l, t);
        ratios.push_back(base > 0.0 ? duplicate_probability(k, 2 * l, t) / base : 0.0);
        reference.push_back(std::pow(4.0, t));
      }
      row["ratio_to_double"] = ratios;
      row["ratio_reference"] = reference;
    }
    rows.push_back(row);
  }
  return {{"n_pairs", n_pairs}, {"k", k}, {"rows", rows}};
}

double negative_correlation_ratio(const SubsetMeasure& measure) {
  const int n = measure.ground_size();
  if (n > 12) throw GroundSetTooLarge("negative-correlation check needs n <= 12");
  const double total = measure.total();
  if (!(total > 0.0)) throw ZeroMass("measure has zero total mass");
  const std::vector<double> inc = measure.inclusion_counts();
  double worst = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (std::popcount(mask) < 2) continue;
    const ElementSet t = from_mask(mask);
    double product = 1.0;
    for (int i : t) product *= inc[i] / total;
    const double joint = measure.count(t) / total;
    if (product > 0.0) {
      worst = std::max(worst, joint / product);
    } else if (joint > 1e-12) {
      worst = std::max(worst, std::numeric_limits<double>::infinity());
    }
  }
  return worst;
}

nlohmann::json to_json(const CriterionReport& report) {
  return {{"criterion", report.name},
          {"measured", report.measured},
          {"threshold", report.threshold},
          {"pass", report.pass},
          {"detail", report.detail}};
}

nlohmann::json to_json(const EiSpotCheck& check) {
  return {{"trials", check.trials},
          {"failures", check.failures},
          {"worst_ratio", check.worst_ratio},
          {"bound", check.bound},
          {"pass", check.pass}};
}

}  // namespace pardpp
