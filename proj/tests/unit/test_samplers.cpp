#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pardpp/dpp_model.hpp"
#include "pardpp/errors.hpp"
#include "pardpp/samplers.hpp"
#include "pardpp/validation.hpp"

using namespace pardpp;

namespace {

std::vector<ElementSet> draw_many(Sampler& sampler, int n, std::uint64_t seed) {
  std::vector<ElementSet> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const SampleResult r = sampler.draw(derive_key(seed, {static_cast<std::uint64_t>(i)}));
    REQUIRE(r.status != SampleStatus::kFailed);
    out.push_back(r.sample);
  }
  return out;
}

double empirical_tv(const SubsetMeasure& m, const std::vector<ElementSet>& samples) {
  return tv_distance(brute_force_distribution(m), empirical_distribution(samples));
}

std::shared_ptr<const DppModel> diag123(Constraint c = Constraint::none()) {
  Matrix l = Matrix::Zero(3, 3);
  l.diagonal() << 1, 2, 3;
  return DppModel::make(EnsembleMatrix(l), std::move(c));
}

}  // namespace

TEST_CASE("isotropic transform examples") {
  const std::vector<double> uniform(10, 0.3);
  const IsotropicTransform u = isotropic_transform(uniform, 3, 0.25);
  for (double t : u.copies) CHECK(t == 4);
  CHECK(u.universe == 40);

  const std::vector<double> p = {1.0, 0.5, 0.5};
  const IsotropicTransform x = isotropic_transform(p, 2, 0.25);
  CHECK(x.copies == std::vector<double>{6, 3, 3});
  CHECK(x.universe == 12);
  CHECK(x.copy_marginal[0] == doctest::Approx(1.0 / 6));
  // n/(beta k) <= |U| <= n/(beta k) + n
  CHECK(x.universe >= 12);
  CHECK(x.universe <= 15);
  CHECK_THROWS_AS(isotropic_transform(p, 2, 1.5), InvalidArgument);
}

TEST_CASE("batch sizes") {
  std::vector<int> sizes;
  for (int k = 16; k > 0;) {
    sizes.push_back(symmetric_batch_size(k));
    k -= sizes.back();
  }
  // ceil(sqrt(k_i)) at every step: 16, 12, 8, 5, 2.
  CHECK(sizes == std::vector<int>{4, 4, 3, 3, 2});
  CHECK(ei_batch_size(16, 0.1) == 3);
  CHECK(ei_batch_size(2, 0.1) == 1);
  CHECK(ei_batch_size(0, 0.1) == 0);
  CHECK(symmetric_batch_size(1) == 1);
}

TEST_CASE("sequential sampler") {
  SamplerConfig config;
  {
    CountingCache cache(diag123(Constraint::cardinality(0)));
    const SampleResult r = sequential_sample(cache, config);
    CHECK(r.sample.empty());
    CHECK(r.meter.adaptive_rounds == 0);
  }
  const auto m = DppModel::make(EnsembleMatrix(Matrix::Identity(4, 4)), Constraint::cardinality(2));
  Sampler s(m, SamplerKind::kSequential, config);
  CHECK(s.draw(3).meter.adaptive_rounds == 2);
  const auto samples = draw_many(s, 20000, 1);
  CHECK(empirical_tv(*m, samples) <= statistical_tv_tolerance(6, 20000));
}

TEST_CASE("symmetric batches accept with probability 1/C") {
  const auto m = DppModel::make(EnsembleMatrix(Matrix::Identity(8, 8)), Constraint::cardinality(4));
  CountingCache cache(m);
  SamplerConfig config;
  const BatchPlan plan = plan_symmetric_batch(cache, {}, 2, 4, config);
  CHECK(plan.threshold == doctest::Approx(std::exp(1.0)));
  CHECK(plan.width == static_cast<std::int64_t>(
                          std::ceil(std::exp(1.0) * std::log(2.0 * std::sqrt(4.0) / config.eps))));
  int accepted = 0;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) {
    CounterRng rng(derive_key(9, {static_cast<std::uint64_t>(i)}));
    const Proposal p = propose(cache, plan, rng);
    if (p.outside) CHECK(p.ratio == 0.0);
    accepted += p.accepted ? 1 : 0;
  }
  const double rate = static_cast<double>(accepted) / trials;
  CHECK(std::abs(rate - std::exp(-1.0)) < 4 * std::sqrt(0.25 / trials));
}

TEST_CASE("single-element batches always pass the ratio test up to C") {
  std::mt19937_64 rng(3);
  const auto m = DppModel::make(EnsembleMatrix(oracle::random_psd(6, rng)), Constraint::cardinality(3));
  CountingCache cache(m);
  const BatchPlan plan = plan_symmetric_batch(cache, {}, 1, 3, SamplerConfig{});
  for (int i = 0; i < 200; ++i) {
    CounterRng r(static_cast<std::uint64_t>(i));
    const Proposal p = propose(cache, plan, r);
    CHECK(p.ratio == doctest::Approx(1.0));
    CHECK(p.ratio <= plan.threshold);
  }
}

TEST_CASE("batched symmetric sampler matches the exact distribution") {
  std::mt19937_64 rng(5);
  const auto m = DppModel::make(EnsembleMatrix(oracle::random_psd(7, rng)), Constraint::cardinality(4));
  Sampler s(m, SamplerKind::kBatchedSymmetric, SamplerConfig{});
  const auto samples = draw_many(s, 20000, 2);
  for (const auto& x : samples) CHECK(x.size() == 4);
  CHECK(empirical_tv(*m, samples) <= statistical_tv_tolerance(35, 20000));
}

TEST_CASE("results do not depend on the worker count") {
  std::mt19937_64 rng(8);
  const auto m = DppModel::make(EnsembleMatrix(oracle::random_psd(30, rng)), Constraint::cardinality(12));
  for (SamplerKind kind : {SamplerKind::kBatchedSymmetric, SamplerKind::kEntropic}) {
    SamplerConfig one;
    SamplerConfig four;
    four.workers = 4;
    Sampler a(m, kind, one);
    Sampler b(m, kind, four);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SampleResult x = a.draw(seed);
      const SampleResult y = b.draw(seed);
      CHECK(x.sample == y.sample);
      CHECK(x.meter.adaptive_rounds == y.meter.adaptive_rounds);
      CHECK(x.meter.proposal_work == y.meter.proposal_work);
    }
  }
}

TEST_CASE("entropic sampler") {
  const auto part = DppModel::make(EnsembleMatrix(Matrix::Identity(4, 4)),
                                   Constraint::partition({{0, 1}, {2, 3}}, {1, 1}));
  Sampler s(part, SamplerKind::kAuto, SamplerConfig{});
  CHECK(s.resolved_kind() == SamplerKind::kEntropic);
  const SampleResult one = s.draw(0);
  CHECK(one.status == SampleStatus::kApproximate);
  CHECK(one.eps == 0.05);
  const auto samples = draw_many(s, 20000, 3);
  CHECK(empirical_tv(*part, samples) <= statistical_tv_tolerance(4, 20000));

  std::mt19937_64 rng(13);
  const auto nonsym = DppModel::make(EnsembleMatrix(oracle::random_npsd(6, rng)),
                                     Constraint::cardinality(3));
  Sampler e(nonsym, SamplerKind::kAuto, SamplerConfig{});
  CHECK(e.resolved_kind() == SamplerKind::kEntropic);
  const auto ns = draw_many(e, 20000, 4);
  CHECK(empirical_tv(*nonsym, ns) <= statistical_tv_tolerance(20, 20000) + 0.05);
}

TEST_CASE("entropic batches reject repeated elements") {
  const auto m = DppModel::make(EnsembleMatrix(Matrix::Identity(3, 3)), Constraint::cardinality(3));
  CountingCache cache(m);
  SamplerConfig config;
  const BatchPlan plan = plan_ei_batch(cache, {}, 3, 3, config);
  CHECK(plan.threshold <= config.max_likelihood_ratio);
  int outside = 0;
  for (int i = 0; i < 500; ++i) {
    CounterRng rng(static_cast<std::uint64_t>(i));
    const Proposal p = propose(cache, plan, rng);
    if (p.batch.size() < 3) {
      CHECK(p.outside);
      CHECK_FALSE(p.accepted);
      ++outside;
    }
  }
  // 1 - 3!/27 of the proposals collide.
  CHECK(outside > 300);
}

TEST_CASE("variable-size models sample through the size distribution") {
  const auto m = diag123();
  for (SamplerKind kind : {SamplerKind::kSequential, SamplerKind::kBatchedSymmetric}) {
    Sampler s(m, kind, SamplerConfig{});
    const auto samples = draw_many(s, 20000, 5);
    CHECK(empirical_tv(*m, samples) <= statistical_tv_tolerance(8, 20000));
  }
  const auto zero = DppModel::make(EnsembleMatrix(Matrix::Zero(3, 3)));
  Sampler z(zero, SamplerKind::kSequential, SamplerConfig{});
  CHECK(z.draw(1).sample.empty());

  const auto cardinality_only = sample_dpp_via_cardinality(
      *DppModel::make(EnsembleMatrix(Matrix::Identity(2, 2))), SamplerConfig{},
      [](const std::shared_ptr<const DppModel>& mk, const SamplerConfig& c) {
        CountingCache cache(mk);
        return sequential_sample(cache, c);
      });
  CHECK(cardinality_only.sample.size() <= 2);

  Sampler ei(m, SamplerKind::kEntropic, SamplerConfig{});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(ei.draw(seed).status == SampleStatus::kApproximate);
  }
}

TEST_CASE("filtered sampler") {
  SamplerConfig config;
  const auto zero = DppModel::make(EnsembleMatrix(Matrix::Zero(4, 4)));
  const SampleResult z = filtered_sample(*zero, config);
  CHECK(z.sample.empty());
  CHECK(z.meter.adaptive_rounds == 0);

  // K = 0.2 I on n = 9: alpha = 1/(0.2 * 3) > 1, a single one-step draw.
  const auto small = DppModel::make(EnsembleMatrix(0.25 * Matrix::Identity(9, 9)));
  Sampler s(small, SamplerKind::kFiltered, config);
  const SampleResult first = s.draw(0);
  CHECK(first.eigenvalue_trace.size() == 1);
  CHECK(first.eigenvalue_trace[0] == doctest::Approx(0.2));
  const int n_samples = 40000;
  const auto samples = draw_many(s, n_samples, 6);
  CHECK(empirical_tv(*small, samples) <= statistical_tv_tolerance(512, n_samples));
  std::vector<double> hits(9, 0.0);
  for (const auto& x : samples) {
    for (int i : x) hits[i] += 1.0 / n_samples;
  }
  for (double h : hits) CHECK(std::abs(h - 0.2) < 4 * std::sqrt(0.16 / n_samples));

  // lambda_max(K) = 0.6 on n = 8 takes the iterated path.
  std::mt19937_64 rng(21);
  const Matrix l = oracle::psd_with_kernel_max(8, 0.6, rng);
  const auto model = DppModel::make(EnsembleMatrix(l));
  Sampler f(model, SamplerKind::kFiltered, config);
  const SampleResult r = f.draw(1);
  REQUIRE(r.eigenvalue_trace.size() > 1);
  CHECK(r.eigenvalue_trace[0] == doctest::Approx(0.6));
  for (double v : r.eigenvalue_trace) CHECK(v <= 0.6 + 1e-8);
  const auto many = draw_many(f, 10000, 7);
  const Vector k = model->kernel().matrix().diagonal();
  std::vector<double> freq(8, 0.0);
  for (const auto& x : many) {
    for (int i : x) freq[i] += 1.0 / 10000;
  }
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(freq[i] - k(i)) < 4 * std::sqrt(0.25 / 10000) + config.eps);
  }
  CHECK(empirical_tv(*model, many) <= statistical_tv_tolerance(256, 10000) + config.eps);

  const auto constrained = DppModel::make(EnsembleMatrix(Matrix::Identity(3, 3)),
                                          Constraint::cardinality(1));
  CHECK_THROWS_AS(Sampler(constrained, SamplerKind::kFiltered, config), InvalidArgument);
}

TEST_CASE("one-step sampler on a zero kernel") {
  const auto zero = DppModel::make(EnsembleMatrix(Matrix::Zero(5, 5)));
  const SampleResult r = one_step_bernoulli_sample(*zero, SamplerConfig{});
  CHECK(r.sample.empty());
  const auto big = DppModel::make(EnsembleMatrix(Matrix::Identity(9, 9)));
  CHECK_THROWS_AS(one_step_bernoulli_sample(*big, SamplerConfig{}), InvalidArgument);
}

TEST_CASE("configuration checks") {
  SamplerConfig bad;
  bad.eps = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK(parse_sampler_kind("batched-sym") == SamplerKind::kBatchedSymmetric);
  CHECK_THROWS_AS(parse_sampler_kind("gibbs"), InvalidArgument);
  std::mt19937_64 rng(2);
  const auto nonsym = DppModel::make(EnsembleMatrix(oracle::random_npsd(4, rng)),
                                     Constraint::cardinality(2));
  CHECK_THROWS_AS(Sampler(nonsym, SamplerKind::kBatchedSymmetric, SamplerConfig{}),
                  InvalidArgument);
}
