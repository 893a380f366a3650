#include "pardpp/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "pardpp/errors.hpp"

namespace pardpp {

namespace {

constexpr std::uint64_t kSizeStream = 0x73697a65;  // "size"

std::int64_t fanout_width(double threshold, double failure, const SamplerConfig& config) {
  const double w = std::ceil(threshold * std::log(1.0 / failure));
  const double cap = static_cast<double>(config.max_proposals_per_round);
  return static_cast<std::int64_t>(std::clamp(w, 1.0, cap));
}

// Evaluates proposals 0..width-1 in index order, `workers` at a time, and
// returns the first accepted one. Later proposals of the same chunk are
// discarded, so the outcome does not depend on the worker count.
template <typename Evaluate>
std::optional<Proposal> first_accepted(std::int64_t width, int workers, Evaluate&& evaluate) {
  if (workers <= 1) {
    for (std::int64_t i = 0; i < width; ++i) {
      Proposal p = evaluate(i);
      if (p.accepted) return p;
    }
    return std::nullopt;
  }
  for (std::int64_t start = 0; start < width; start += workers) {
    const std::int64_t end = std::min(width, start + workers);
    std::vector<std::future<Proposal>> pending;
    pending.reserve(static_cast<std::size_t>(end - start));
    for (std::int64_t i = start; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, [&evaluate, i] { return evaluate(i); }));
    }
    for (auto& f : pending) {
      Proposal p = f.get();
      if (p.accepted) return p;
    }
  }
  return std::nullopt;
}

double log_falling_ratio(int k, int t) {
  // log(k^t / (k (k-1) ... (k-t+1)))
  double acc = 0.0;
  for (int i = 0; i < t; ++i) acc -= std::log1p(-static_cast<double>(i) / k);
  return acc;
}

int remaining_size(const CountingCache& cache, const ElementSet& chosen) {
  const int target = cache.root().target_size();
  if (target < 0) throw InvalidArgument("batched samplers need a fixed-size model");
  return target - static_cast<int>(chosen.size());
}

}  // namespace

void SamplerConfig::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (!(c > 0.0 && c < 0.5)) throw InvalidArgument("depth exponent c must lie in (0, 1/2)");
  if (ratio_exponent > 0.0 && ratio_exponent < 1.0) {
    throw InvalidArgument("ratio exponent B must be at least 1");
  }
  if (!(beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (!(max_likelihood_ratio >= 1.0)) throw InvalidArgument("ratio cap must be at least 1");
  if (max_rounds_per_batch < 1) throw InvalidArgument("need at least one round per batch");
  if (max_proposals_per_round < 1) throw InvalidArgument("need at least one proposal per round");
  if (workers < 1) throw InvalidArgument("need at least one worker");
}

std::string_view to_string(SampleStatus status) {
  switch (status) {
    case SampleStatus::kExact:
      return "exact";
    case SampleStatus::kApproximate:
      return "approximate";
    case SampleStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

IsotropicTransform isotropic_transform(std::span<const double> marginals, int k, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (k <= 0) throw InvalidArgument("isotropic transform needs k >= 1");
  const auto n = static_cast<double>(marginals.size());
  IsotropicTransform out;
  out.beta = beta;
  const double cut = std::sqrt(beta) * k / n;
  for (double p : marginals) {
    const double t = std::max(1.0, std::ceil(n / (beta * k) * p));
    out.copies.push_back(t);
    out.copy_marginal.push_back(p / t);
    out.retained.push_back(p >= cut ? 1 : 0);
    out.universe += t;
  }
  return out;
}

IsotropicTransform isotropic_transform(const SubsetMeasure& model, double beta) {
  const double z = model.total();
  if (!(z > 0.0)) throw ZeroMass("model has no mass");
  std::vector<double> p = model.inclusion_counts();
  for (double& v : p) v /= z;
  return isotropic_transform(p, model.target_size(), beta);
}

BatchPlan plan_symmetric_batch(CountingCache& cache, const ElementSet& chosen, int t,
                               int total_k, const SamplerConfig& config) {
  BatchPlan plan;
  plan.kind = BatchPlan::Kind::kSymmetric;
  plan.node = cache.node(chosen);
  plan.k = remaining_size(cache, chosen);
  plan.t = std::clamp(t, 1, std::max(1, plan.k));
  plan.falling_ratio = std::exp(log_falling_ratio(plan.k, plan.t));
  plan.threshold = std::exp(static_cast<double>(plan.t) * plan.t / plan.k);
  const double delta = config.eps / (2.0 * std::sqrt(static_cast<double>(std::max(1, total_k))));
  plan.width = fanout_width(plan.threshold, delta, config);
  return plan;
}

BatchPlan plan_ei_batch(CountingCache& cache, const ElementSet& chosen, int t, int total_k,
                        const SamplerConfig& config) {
  BatchPlan plan;
  plan.kind = BatchPlan::Kind::kEntropic;
  plan.node = cache.node(chosen);
  plan.k = remaining_size(cache, chosen);
  plan.t = std::clamp(t, 1, std::max(1, plan.k));
  plan.falling_ratio = std::exp(log_falling_ratio(plan.k, plan.t));
  double beta = config.beta;
  if (!(beta > 0.0)) {
    const double root_beta = config.eps / (32.0 * plan.k);
    beta = root_beta * root_beta;
  }
  plan.transform = isotropic_transform(plan.node->marginals, plan.k, beta);
  const double log_threshold = config.effective_ratio_exponent() * std::log(plan.transform->universe);
  plan.threshold = std::exp(std::min(log_threshold, std::log(config.max_likelihood_ratio)));
  const double step_eps = config.eps / std::max(1, total_k);
  plan.width = fanout_width(plan.threshold, step_eps, config);
  return plan;
}

Proposal propose(CountingCache& cache, const BatchPlan& plan, CounterRng& rng) {
  const CountingCache::Node& node = *plan.node;
  const std::vector<int>& map = node.conditioning.index_map;
  Proposal out;
  std::vector<int> local;
  local.reserve(static_cast<std::size_t>(plan.t));
  double weight = 1.0;
  bool collision = false;
  bool unretained = false;
  for (int j = 0; j < plan.t; ++j) {
    // Proposals are i.i.d. draws proportional to the marginals. Under the
    // subdivision a copy of i is drawn with probability p_i / k and the copy
    // index cancels from the likelihood ratio, so only the element is drawn.
    const int i = rng.draw_cumulative(node.cumulative);
    if (i < 0) throw ZeroMass("residual marginals vanish");
    if (std::find(local.begin(), local.end(), i) != local.end()) collision = true;
    if (plan.transform && !plan.transform->retained[i]) unretained = true;
    local.push_back(i);
    weight *= node.marginals[i];
  }
  const double u = rng.uniform();
  for (int i : local) out.batch.push_back(map[i]);
  out.batch = normalized(std::move(out.batch));
  if (collision || unretained) {
    out.outside = true;
    return out;
  }
  // Ordered target mass P[B in S] / (C(k,t) t!) over proposal mass prod p_i / k.
  out.ratio = cache.conditional_inclusion(plan.node, out.batch) * plan.falling_ratio / weight;
  if (plan.kind == BatchPlan::Kind::kSymmetric) {
    if (out.ratio > plan.threshold * (1.0 + 1e-9) && cache.root().negatively_correlated()) {
      throw InvariantViolation("symmetric batch ratio " + std::to_string(out.ratio) +
                               " exceeds C = " + std::to_string(plan.threshold));
    }
  } else if (out.ratio > plan.threshold) {
    out.outside = true;
    return out;
  }
  out.accepted = u * plan.threshold < out.ratio;
  return out;
}

std::optional<ElementSet> run_batch(CountingCache& cache, const BatchPlan& plan,
                                    const SamplerConfig& config, std::uint64_t stream,
                                    RoundMeter& meter) {
  for (int round = 0; round < config.max_rounds_per_batch; ++round) {
    meter.round(plan.width);
    auto accepted = first_accepted(plan.width, config.workers, [&](std::int64_t i) {
      CounterRng rng(derive_key(stream, {static_cast<std::uint64_t>(round),
                                         static_cast<std::uint64_t>(i)}));
      return propose(cache, plan, rng);
    });
    if (accepted) return std::move(accepted->batch);
  }
  return std::nullopt;
}

std::optional<ElementSet> batch_sample_symmetric(CountingCache& cache, const ElementSet& chosen,
                                                 int t, const SamplerConfig& config,
                                                 RoundMeter& meter) {
  const BatchPlan plan =
      plan_symmetric_batch(cache, chosen, t, cache.root().target_size(), config);
  return run_batch(cache, plan, config, derive_key(config.seed, {chosen.size()}), meter);
}

std::optional<ElementSet> batch_sample_ei(CountingCache& cache, const ElementSet& chosen, int t,
                                          const SamplerConfig& config, RoundMeter& meter) {
  const BatchPlan plan = plan_ei_batch(cache, chosen, t, cache.root().target_size(), config);
  return run_batch(cache, plan, config, derive_key(config.seed, {chosen.size()}), meter);
}

SampleResult sequential_sample(CountingCache& cache, const SamplerConfig& config) {
  const int k = cache.root().target_size();
  if (k < 0) throw InvalidArgument("sequential sampling needs a fixed-size model");
  if (!(cache.root().total() > 0.0)) throw ZeroMass("model has no mass");
  SampleResult result;
  result.status = SampleStatus::kExact;
  CounterRng rng(derive_key(config.seed, {0}));
  for (int step = 0; step < k; ++step) {
    const auto node = cache.node(result.sample);
    result.meter.round(1);
    const int i = rng.draw_cumulative(node->cumulative);
    if (i < 0) throw ZeroMass("residual marginals vanish");
    result.sample.push_back(node->conditioning.index_map[i]);
    result.sample = normalized(std::move(result.sample));
  }
  return result;
}

int symmetric_batch_size(int k) {
  if (k <= 0) return 0;
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
}

int ei_batch_size(int k, double c) {
  if (k <= 0) return 0;
  const double t = std::floor(std::pow(static_cast<double>(k), 0.5 - c) + 1e-12);
  return std::clamp(static_cast<int>(t), 1, k);
}

SampleResult batched_sample(CountingCache& cache, BatchPlan::Kind kind,
                            const SamplerConfig& config) {
  config.validate();
  const int k = cache.root().target_size();
  if (k < 0) throw InvalidArgument("batched sampling needs a fixed-size model");
  if (!(cache.root().total() > 0.0)) throw ZeroMass("model has no mass");
  SampleResult result;
  result.status =
      kind == BatchPlan::Kind::kSymmetric ? SampleStatus::kExact : SampleStatus::kApproximate;
  if (kind == BatchPlan::Kind::kEntropic) result.eps = config.eps;
  std::uint64_t batch_index = 0;
  while (static_cast<int>(result.sample.size()) < k) {
    const int ki = k - static_cast<int>(result.sample.size());
    const int t = kind == BatchPlan::Kind::kSymmetric ? symmetric_batch_size(ki)
                                                      : ei_batch_size(ki, config.c);
    const BatchPlan plan = kind == BatchPlan::Kind::kSymmetric
                               ? plan_symmetric_batch(cache, result.sample, t, k, config)
                               : plan_ei_batch(cache, result.sample, t, k, config);
    auto batch =
        run_batch(cache, plan, config, derive_key(config.seed, {batch_index++}), result.meter);
    if (!batch) {
      result.status = SampleStatus::kFailed;
      result.message = "no proposal accepted within the round budget";
      return result;
    }
    result.sample = set_union(result.sample, *batch);
  }
  return result;
}

SampleResult sample_ei(CountingCache& cache, const SamplerConfig& config) {
  return batched_sample(cache, BatchPlan::Kind::kEntropic, config);
}

Vector SymmetricKernel::diagonal() const {
  return (vectors.array().square().matrix() * kappa).cwiseMax(0.0).cwiseMin(1.0);
}

double SymmetricKernel::max_eigenvalue() const {
  return kappa.size() == 0 ? 0.0 : kappa.maxCoeff();
}

SymmetricKernel SymmetricKernel::from_ensemble(const Matrix& l) {
  SymmetricKernel out;
  if (l.rows() == 0) {
    out.vectors = Matrix(0, 0);
    out.kappa = Vector(0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (l + l.transpose()));
  out.vectors = solver.eigenvectors();
  const Vector lambda = solver.eigenvalues().cwiseMax(0.0);
  out.kappa = lambda.array() / (1.0 + lambda.array());
  return out;
}

namespace {

struct BernoulliPlan {
  const SymmetricKernel* kernel = nullptr;
  Vector p;             // K_ii
  Vector ell;           // eigenvalues of L
  double log_base = 0;  // log det(I - K) - sum log(1 - p_i)
  double log_threshold = 0;
  int size_cap = 0;
};

// Likelihood ratio mu(T) / nu(T) = det(L_T) det(I-K) / (prod_T p_i prod_{~T} (1-p_i)).
double log_bernoulli_ratio(const BernoulliPlan& plan, const std::vector<int>& t) {
  double log_ratio = plan.log_base;
  if (t.empty()) return log_ratio;
  const int m = static_cast<int>(t.size());
  const Matrix& v = plan.kernel->vectors;
  Matrix rows(m, v.cols());
  for (int a = 0; a < m; ++a) rows.row(a) = v.row(t[a]);
  const Matrix lt = rows * plan.ell.asDiagonal() * rows.transpose();
  const double d = det(lt);
  if (!(d > 0.0)) return -std::numeric_limits<double>::infinity();
  log_ratio += std::log(d);
  for (int i : t) log_ratio -= std::log(plan.p(i)) - std::log1p(-plan.p(i));
  return log_ratio;
}

}  // namespace

ElementSet one_step_bernoulli(const SymmetricKernel& kernel, double inner_eps,
                              const SamplerConfig& config, std::uint64_t stream,
                              RoundMeter& meter, bool* failed) {
  if (failed) *failed = false;
  const int n = kernel.size();
  if (n == 0 || kernel.max_eigenvalue() <= 0.0) return {};
  if (kernel.max_eigenvalue() > 1.0 / std::sqrt(static_cast<double>(n)) + tol::kPsd) {
    throw InvalidArgument("one-step sampler needs lambda_max(K) <= 1/sqrt(n)");
  }
  BernoulliPlan plan;
  plan.kernel = &kernel;
  plan.p = kernel.diagonal();
  plan.ell = kernel.kappa.array() / (1.0 - kernel.kappa.array());
  for (int j = 0; j < n; ++j) plan.log_base += std::log1p(-kernel.kappa(j));
  for (int i = 0; i < n; ++i) plan.log_base -= std::log1p(-plan.p(i));
  const double s = config.size_constant *
                   std::sqrt(static_cast<double>(n) * std::log(1.0 / inner_eps));
  plan.size_cap = static_cast<int>(std::min<double>(n, std::floor(s)));
  // The ratio on sets of size <= s is at most prod over the s largest kernel
  // eigenvalues of 1/(1 - kappa).
  std::vector<double> sorted(kernel.kappa.data(), kernel.kappa.data() + n);
  std::sort(sorted.rbegin(), sorted.rend());
  for (int j = 0; j < plan.size_cap; ++j) plan.log_threshold -= std::log1p(-sorted[j]);
  const double threshold = std::exp(plan.log_threshold);
  const std::int64_t width = fanout_width(threshold, inner_eps, config);

  for (int round = 0; round < config.max_rounds_per_batch; ++round) {
    meter.round(width);
    auto accepted = first_accepted(width, config.workers, [&](std::int64_t index) {
      CounterRng rng(derive_key(stream, {static_cast<std::uint64_t>(round),
                                         static_cast<std::uint64_t>(index)}));
      Proposal out;
      std::vector<int> t;
      for (int i = 0; i < n; ++i) {
        if (rng.bernoulli(plan.p(i))) t.push_back(i);
      }
      const double u = rng.uniform();
      out.batch = t;
      if (static_cast<int>(t.size()) > plan.size_cap) {
        out.outside = true;
        return out;
      }
      const double log_ratio = log_bernoulli_ratio(plan, t);
      if (log_ratio > plan.log_threshold + 1e-9) {
        throw InvariantViolation("one-step likelihood ratio exceeds its bound");
      }
      out.ratio = std::exp(log_ratio);
      out.accepted = std::log(u) < log_ratio - plan.log_threshold;
      return out;
    });
    if (accepted) return std::move(accepted->batch);
  }
  if (failed) *failed = true;
  return {};
}

namespace {

// Schur complement on a set the one-step sampler accepted. The block is
// positive definite, but its determinant can sit far below the absolute
// singularity tolerance of schur_complement.
Matrix condition_accepted(const Matrix& l, const ElementSet& t) {
  const std::vector<int> rest = complement(t, static_cast<int>(l.rows()));
  Eigen::LDLT<Matrix> ldlt(principal_submatrix(l, t));
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw InvariantViolation("accepted set " + to_string(t) + " has a singular block");
  }
  if (rest.empty()) return Matrix(0, 0);
  const Matrix out =
      principal_submatrix(l, rest) - submatrix(l, rest, t) * ldlt.solve(submatrix(l, t, rest));
  return 0.5 * (out + out.transpose());
}

void require_plain_symmetric(const DppModel& model, const char* who) {
  if (model.constraint().type != Constraint::Type::kNone || !model.ensemble().symmetric()) {
    throw InvalidArgument(std::string(who) + " needs an unconstrained symmetric model");
  }
}

}  // namespace

SampleResult one_step_bernoulli_sample(const DppModel& model, const SamplerConfig& config) {
  config.validate();
  require_plain_symmetric(model, "one-step sampler");
  const SymmetricKernel kernel = SymmetricKernel::from_ensemble(model.ensemble().matrix());
  SampleResult result;
  result.status = SampleStatus::kApproximate;
  result.eps = config.eps;
  bool failed = false;
  result.sample = one_step_bernoulli(kernel, config.eps, config, derive_key(config.seed, {0}),
                                     result.meter, &failed);
  if (failed) {
    result.status = SampleStatus::kFailed;
    result.message = "no proposal accepted within the round budget";
  }
  return result;
}

SampleResult filtered_sample(const DppModel& model, const SamplerConfig& config) {
  config.validate();
  require_plain_symmetric(model, "filtered sampler");
  const int n = model.ground_size();
  SampleResult result;
  result.status = SampleStatus::kApproximate;
  result.eps = config.eps;

  Matrix l = model.ensemble().matrix();
  SymmetricKernel kernel = SymmetricKernel::from_ensemble(l);
  const double lambda = kernel.max_eigenvalue();
  if (n == 0 || lambda <= 0.0) return result;
  const double alpha = 1.0 / (lambda * std::sqrt(static_cast<double>(n)));
  bool failed = false;
  if (alpha > 1.0) {
    result.eigenvalue_trace.push_back(lambda);
    result.sample = one_step_bernoulli(kernel, config.eps, config, derive_key(config.seed, {0}),
                                       result.meter, &failed);
    if (failed) result.status = SampleStatus::kFailed;
    return result;
  }
  const int iterations = static_cast<int>(
      std::ceil(config.filter_constant / alpha * std::log(n / config.eps)));
  const double inner_eps = config.eps / (iterations + 1);
  std::vector<int> alive(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) alive[i] = i;
  Vector ell = kernel.kappa.array() / (1.0 - kernel.kappa.array());

  for (int it = 0; it <= iterations && !alive.empty(); ++it) {
    const double current = kernel.max_eigenvalue();
    result.eigenvalue_trace.push_back(current);
    if (current > lambda + 1e-8) {
      throw InvariantViolation("filtered kernel eigenvalue grew above the initial bound");
    }
    SymmetricKernel scaled{kernel.vectors, alpha * kernel.kappa};
    const ElementSet t =
        one_step_bernoulli(scaled, inner_eps, config,
                           derive_key(config.seed, {static_cast<std::uint64_t>(it) + 1}),
                           result.meter, &failed);
    if (failed) {
      result.status = SampleStatus::kFailed;
      result.message = "inner one-step sampler exhausted its round budget";
      break;
    }
    ell *= 1.0 - alpha;
    if (t.empty()) {
      kernel.kappa = ell.array() / (1.0 + ell.array());
      continue;
    }
    for (int i : t) result.sample.push_back(alive[i]);
    const Matrix scaled_l = kernel.vectors * ell.asDiagonal() * kernel.vectors.transpose();
    const Matrix next = condition_accepted(scaled_l, t);
    std::vector<int> rest;
    for (int i : complement(t, static_cast<int>(alive.size()))) rest.push_back(alive[i]);
    alive = std::move(rest);
    kernel = SymmetricKernel::from_ensemble(next);
    ell = kernel.kappa.array() / (1.0 - kernel.kappa.array());
  }
  result.sample = normalized(std::move(result.sample));
  return result;
}

namespace {

SampleResult via_cardinality(std::span<const double> sizes, const SamplerConfig& config,
                             const std::function<SampleResult(int, const SamplerConfig&)>& inner) {
  CounterRng rng(derive_key(config.seed, {kSizeStream}));
  const int j = rng.draw(sizes);
  if (j < 0) throw ZeroMass("model has no mass");
  SampleResult result;
  result.meter.round(1);
  if (j == 0) return result;
  SamplerConfig inner_config = config;
  inner_config.seed = derive_key(config.seed, {kSizeStream, static_cast<std::uint64_t>(j)});
  SampleResult sub = inner(j, inner_config);
  sub.meter.absorb(result.meter);
  return sub;
}

}  // namespace

SampleResult sample_dpp_via_cardinality(const DppModel& model, const SamplerConfig& config,
                                        const CardinalitySampler& inner) {
  const std::vector<double> sizes = size_distribution(model);
  return via_cardinality(sizes, config, [&](int j, const SamplerConfig& c) {
    return inner(model.with_cardinality(j), c);
  });
}

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kSequential:
      return "sequential";
    case SamplerKind::kBatchedSymmetric:
      return "batched-sym";
    case SamplerKind::kEntropic:
      return "ei";
    case SamplerKind::kFiltered:
      return "filtered";
    case SamplerKind::kAuto:
      return "auto";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view name) {
  for (SamplerKind k : {SamplerKind::kSequential, SamplerKind::kBatchedSymmetric,
                        SamplerKind::kEntropic, SamplerKind::kFiltered, SamplerKind::kAuto}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown sampler '" + std::string(name) + "'");
}

namespace {

SamplerKind resolve_auto(const SubsetMeasure& measure, const DppModel* dpp) {
  if (!dpp || !dpp->ensemble().symmetric() ||
      dpp->constraint().type == Constraint::Type::kPartition) {
    return SamplerKind::kEntropic;
  }
  if (dpp->constraint().type == Constraint::Type::kCardinality) {
    return SamplerKind::kBatchedSymmetric;
  }
  // Unconstrained symmetric: the filter pays about lambda_max(K) sqrt(n)
  // rounds, the cardinality route about sqrt(tr K).
  const SymmetricKernel kernel = SymmetricKernel::from_ensemble(dpp->ensemble().matrix());
  const double filter_cost = kernel.max_eigenvalue() * std::sqrt(measure.ground_size());
  const double cardinality_cost = std::sqrt(kernel.kappa.sum());
  return filter_cost <= cardinality_cost ? SamplerKind::kFiltered
                                         : SamplerKind::kBatchedSymmetric;
}

}  // namespace

Sampler::Sampler(std::shared_ptr<const SubsetMeasure> measure, SamplerKind kind,
                 SamplerConfig config)
    : measure_(std::move(measure)),
      dpp_(std::dynamic_pointer_cast<const DppModel>(measure_)),
      kind_(kind),
      config_(config) {
  config_.validate();
  if (kind_ == SamplerKind::kAuto) kind_ = resolve_auto(*measure_, dpp_.get());
  if (kind_ == SamplerKind::kFiltered) {
    if (!dpp_) throw InvalidArgument("filtered sampler needs a DPP model");
    require_plain_symmetric(*dpp_, "filtered sampler");
  }
  if (kind_ == SamplerKind::kBatchedSymmetric && !measure_->negatively_correlated()) {
    throw InvalidArgument("batched-sym needs a symmetric model without partition constraints");
  }
  if (measure_->target_size() < 0 && kind_ != SamplerKind::kFiltered) {
    if (!dpp_) throw InvalidArgument("variable-size measures are only supported for DPP models");
    sizes_ = size_distribution(*dpp_);
  }
}

CountingCache& Sampler::cache_for(int k) {
  std::lock_guard lock(mutex_);
  auto& slot = caches_[k];
  if (!slot) {
    std::shared_ptr<const SubsetMeasure> m =
        k == measure_->target_size() ? measure_ : dpp_->with_cardinality(k);
    slot = std::make_unique<CountingCache>(std::move(m));
  }
  return *slot;
}

SampleResult Sampler::draw_fixed(CountingCache& cache, const SamplerConfig& config) {
  switch (kind_) {
    case SamplerKind::kSequential:
      return sequential_sample(cache, config);
    case SamplerKind::kBatchedSymmetric:
      return batched_sample(cache, BatchPlan::Kind::kSymmetric, config);
    default:
      return sample_ei(cache, config);
  }
}

SampleResult Sampler::draw(std::uint64_t seed) {
  SamplerConfig config = config_;
  config.seed = seed;
  if (kind_ == SamplerKind::kFiltered) return filtered_sample(*dpp_, config);
  const int target = measure_->target_size();
  if (target >= 0) return draw_fixed(cache_for(target), config);
  SampleResult result = via_cardinality(sizes_, config, [&](int j, const SamplerConfig& c) {
    return draw_fixed(cache_for(j), c);
  });
  // An empty draw skips the inner sampler but keeps its guarantee.
  if (kind_ == SamplerKind::kEntropic && result.status == SampleStatus::kExact) {
    result.status = SampleStatus::kApproximate;
    result.eps = config.eps;
  }
  return result;
}

}  // namespace pardpp
