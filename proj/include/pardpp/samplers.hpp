#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pardpp/dpp_model.hpp"
#include "pardpp/element_set.hpp"
#include "pardpp/measure.hpp"
#include "pardpp/rng.hpp"

namespace pardpp {

// Parallel-time accounting. An adaptive round is a barrier after which later
// choices depend on earlier outcomes; proposal work counts every proposal a
// round fans out, evaluated or not.
struct RoundMeter {
  std::int64_t adaptive_rounds = 0;
  std::int64_t proposal_work = 0;
  std::int64_t max_width = 0;

  void round(std::int64_t width) {
    ++adaptive_rounds;
    proposal_work += width;
    max_width = std::max(max_width, width);
  }
  void absorb(const RoundMeter& other) {
    adaptive_rounds += other.adaptive_rounds;
    proposal_work += other.proposal_work;
    max_width = std::max(max_width, other.max_width);
  }
};

struct SamplerConfig {
  std::uint64_t seed = 0;
  double eps = 0.05;
  // Batch exponent: entropic batches have size max(1, floor(k^{1/2 - c})).
  double c = 0.1;
  // Likelihood-ratio exponent; <= 0 selects 3/c.
  double ratio_exponent = 0.0;
  // Subdivision parameter; <= 0 selects (eps / (32 k))^2 at each batch.
  double beta = 0.0;
  // Cap on the entropic acceptance threshold |U|^B (see README).
  double max_likelihood_ratio = 64.0;
  int max_rounds_per_batch = 8;
  std::int64_t max_proposals_per_round = std::int64_t{1} << 20;
  // Size cutoff constant c_s of the one-step Bernoulli sampler.
  double size_constant = 10.0;
  // Iteration constant C_R of the filtered sampler.
  double filter_constant = 4.0;
  // Concurrent proposal evaluators; never changes results.
  int workers = 1;

  [[nodiscard]] double effective_ratio_exponent() const {
    return ratio_exponent > 0.0 ? ratio_exponent : 3.0 / c;
  }
  void validate() const;
};

enum class SampleStatus { kExact, kApproximate, kFailed };
std::string_view to_string(SampleStatus status);

struct SampleResult {
  ElementSet sample;
  RoundMeter meter;
  SampleStatus status = SampleStatus::kExact;
  double eps = 0.0;  // TV target of approximate samplers
  std::string message;
  // Filtered sampler: lambda_max(K^(i)) per iteration.
  std::vector<double> eigenvalue_trace;
};

// Copies per element, copy marginals and retained elements of the isotropic
// subdivision. Counts are kept as doubles: |U| can exceed 2^32 for small beta.
struct IsotropicTransform {
  std::vector<double> copies;          // t_i
  std::vector<double> copy_marginal;   // p_i / t_i
  std::vector<char> retained;          // p_i >= sqrt(beta) k / n
  double universe = 0.0;               // |U| = sum t_i
  double beta = 0.0;
};

IsotropicTransform isotropic_transform(std::span<const double> marginals, int k, double beta);
IsotropicTransform isotropic_transform(const SubsetMeasure& model, double beta);

// One batch step at a fixed conditioning state.
struct BatchPlan {
  enum class Kind { kSymmetric, kEntropic };

  Kind kind = Kind::kSymmetric;
  std::shared_ptr<const CountingCache::Node> node;
  int k = 0;  // remaining cardinality
  int t = 0;  // batch size
  double threshold = 1.0;       // C (symmetric) or min(|U|^B, cap) (entropic)
  double falling_ratio = 1.0;   // k^t / (k (k-1) ... (k-t+1))
  std::int64_t width = 1;       // proposals per adaptive round
  std::optional<IsotropicTransform> transform;
};

struct Proposal {
  ElementSet batch;      // original indices, sorted
  double ratio = 0.0;    // target / proposal likelihood
  bool accepted = false;
  bool outside = false;  // collision, unretained copy, or ratio above threshold
};

// `total_k` is the cardinality of the whole model; it sets the per-batch
// failure budget delta' = eps / (2 sqrt(total_k)).
BatchPlan plan_symmetric_batch(CountingCache& cache, const ElementSet& chosen, int t,
                               int total_k, const SamplerConfig& config);
BatchPlan plan_ei_batch(CountingCache& cache, const ElementSet& chosen, int t, int total_k,
                        const SamplerConfig& config);

// Draws and tests one proposal. Symmetric plans throw InvariantViolation when
// the ratio exceeds the constant C (it cannot for negatively correlated
// models).
Proposal propose(CountingCache& cache, const BatchPlan& plan, CounterRng& rng);

// Fans proposals out in rounds of plan.width until one is accepted; returns
// nullopt after config.max_rounds_per_batch rounds.
std::optional<ElementSet> run_batch(CountingCache& cache, const BatchPlan& plan,
                                    const SamplerConfig& config, std::uint64_t stream,
                                    RoundMeter& meter);

// Convenience wrappers over plan + run_batch.
std::optional<ElementSet> batch_sample_symmetric(CountingCache& cache, const ElementSet& chosen,
                                                 int t, const SamplerConfig& config,
                                                 RoundMeter& meter);
std::optional<ElementSet> batch_sample_ei(CountingCache& cache, const ElementSet& chosen, int t,
                                          const SamplerConfig& config, RoundMeter& meter);

// Exact sampler adding one element per adaptive round. Requires a fixed
// target size.
SampleResult sequential_sample(CountingCache& cache, const SamplerConfig& config);

// Batch sizes: ceil(sqrt(k_i)) for the symmetric step, max(1, floor(k_i^{1/2-c}))
// for the entropic one.
int symmetric_batch_size(int k);
int ei_batch_size(int k, double c);

SampleResult batched_sample(CountingCache& cache, BatchPlan::Kind kind,
                            const SamplerConfig& config);
SampleResult sample_ei(CountingCache& cache, const SamplerConfig& config);

// Marginal kernel of a symmetric DPP in eigen form K = V diag(kappa) V^T.
struct SymmetricKernel {
  Matrix vectors;
  Vector kappa;

  [[nodiscard]] int size() const { return static_cast<int>(vectors.rows()); }
  [[nodiscard]] Vector diagonal() const;
  [[nodiscard]] double max_eigenvalue() const;
  static SymmetricKernel from_ensemble(const Matrix& l);
};

// Samples the DPP with kernel `kernel` (lambda_max <= 1/sqrt(n)) from
// independent Bernoulli(K_ii) proposals, rejecting sets above the size cutoff.
// `inner_eps` is the TV budget of this call.
ElementSet one_step_bernoulli(const SymmetricKernel& kernel, double inner_eps,
                              const SamplerConfig& config, std::uint64_t stream,
                              RoundMeter& meter, bool* failed);
SampleResult one_step_bernoulli_sample(const DppModel& model, const SamplerConfig& config);

SampleResult filtered_sample(const DppModel& model, const SamplerConfig& config);

// Draws |S| from the size distribution, then runs `inner` on the model
// restricted to that size.
using CardinalitySampler =
    std::function<SampleResult(const std::shared_ptr<const DppModel>&, const SamplerConfig&)>;
SampleResult sample_dpp_via_cardinality(const DppModel& model, const SamplerConfig& config,
                                        const CardinalitySampler& inner);

enum class SamplerKind { kSequential, kBatchedSymmetric, kEntropic, kFiltered, kAuto };
std::string_view to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(std::string_view name);

// Repeated sampling from one model, reusing counting caches across draws.
// Draws are independent of each other and of the order they are requested in.
class Sampler {
 public:
  Sampler(std::shared_ptr<const SubsetMeasure> measure, SamplerKind kind, SamplerConfig config);

  // Sample with config.seed replaced by `seed`.
  SampleResult draw(std::uint64_t seed);
  [[nodiscard]] SamplerKind resolved_kind() const { return kind_; }

 private:
  CountingCache& cache_for(int k);
  SampleResult draw_fixed(CountingCache& cache, const SamplerConfig& config);

  std::shared_ptr<const SubsetMeasure> measure_;
  std::shared_ptr<const DppModel> dpp_;  // null for non-DPP measures
  SamplerKind kind_;
  SamplerConfig config_;
  std::vector<double> sizes_;  // size distribution of unconstrained models
  std::mutex mutex_;
  std::map<int, std::unique_ptr<CountingCache>> caches_;
};

}  // namespace pardpp
