#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pardpp/dpp_model.hpp"
#include "pardpp/errors.hpp"
#include "pardpp/validation.hpp"

using namespace pardpp;

namespace {

std::shared_ptr<const DppModel> diag123_k2() {
  Matrix l = Matrix::Zero(3, 3);
  l.diagonal() << 1, 2, 3;
  return DppModel::make(EnsembleMatrix(l), Constraint::cardinality(2));
}

long double choose(int n, int r) {
  long double out = 1.0L;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

}  // namespace

TEST_CASE("brute force examples") {
  const auto id = brute_force_distribution(DppModel(EnsembleMatrix(Matrix::Identity(2, 2))));
  CHECK(id.support.size() == 4);
  for (double p : id.probabilities) CHECK(p == doctest::Approx(0.25));

  const auto d = brute_force_distribution(*diag123_k2());
  CHECK(d.probability({0, 1}) == doctest::Approx(2.0 / 11));
  CHECK(d.probability({0, 2}) == doctest::Approx(3.0 / 11));
  CHECK(d.probability({1, 2}) == doctest::Approx(6.0 / 11));
  d.validate();

  const auto part = brute_force_distribution(
      DppModel(EnsembleMatrix(Matrix::Identity(4, 4)), Constraint::partition({{0, 1}, {2, 3}}, {1, 1})));
  CHECK(part.support.size() == 4);
  CHECK(part.probability({0, 1}) == 0.0);
  CHECK(part.probability({1, 3}) == doctest::Approx(0.25));

  CHECK_THROWS_AS(brute_force_distribution(DppModel(EnsembleMatrix(Matrix::Identity(21, 21)))),
                  GroundSetTooLarge);
}

TEST_CASE("brute force agrees with the determinant oracle") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 8; ++trial) {
    const Matrix l = trial % 2 ? oracle::random_npsd(6, rng) : oracle::random_psd(6, rng);
    const Constraint c = trial < 4 ? Constraint::none() : Constraint::cardinality(3);
    const auto ref = oracle::normalize(oracle::masses(l, c));
    const auto got = brute_force_distribution(DppModel(EnsembleMatrix(l), c)).as_map();
    CHECK(oracle::tv(ref, got) < 1e-10);
  }
}

TEST_CASE("distribution construction") {
  CHECK_THROWS_AS(ExactDistribution::from_masses({{0}}, {0.0}), ZeroMass);
  CHECK_THROWS_AS(ExactDistribution::from_masses({{0}, {1}}, {1.0, -0.5}), NegativeMass);
  const auto d = ExactDistribution::from_masses({{0}, {1}, {2}}, {1.0, 0.0, 3.0});
  CHECK(d.support.size() == 2);
  CHECK(d.probability({2}) == doctest::Approx(0.75));
  ExactDistribution broken;
  broken.support = {{0}, {0}};
  broken.probabilities = {0.5, 0.5};
  CHECK_THROWS_AS(broken.validate(), InvariantViolation);
}

TEST_CASE("down operator") {
  const auto d = brute_force_distribution(*diag123_k2());
  const auto same = downsample_distribution(d, 2);
  CHECK(tv_distance(same, d) < 1e-15);

  const auto one = downsample_distribution(d, 1);
  CHECK(one.probability({0}) == doctest::Approx(5.0 / 22));
  CHECK(one.probability({1}) == doctest::Approx(8.0 / 22));
  CHECK(one.probability({2}) == doctest::Approx(9.0 / 22));
  one.validate();

  const auto pairs = ExactDistribution::from_masses({{0, 1}, {2, 3}}, {1.0, 1.0});
  const auto singles = downsample_distribution(pairs, 1);
  for (int i = 0; i < 4; ++i) CHECK(singles.probability({i}) == doctest::Approx(0.25));

  const auto mixed = ExactDistribution::from_masses({{0}, {1, 2}}, {1.0, 1.0});
  CHECK_THROWS_AS(downsample_distribution(mixed, 1), MixedSizes);
  CHECK_THROWS_AS(downsample_distribution(pairs, 3), MixedSizes);

  // Downsampling a k-DPP to l = 1 gives its marginals divided by k.
  std::mt19937_64 rng(33);
  const auto m = DppModel::make(EnsembleMatrix(oracle::random_psd(7, rng)), Constraint::cardinality(3));
  const auto down = downsample_distribution(brute_force_distribution(*m), 1);
  for (int i = 0; i < 7; ++i) {
    CHECK(down.probability({i}) == doctest::Approx(marginal(*m, i) / 3).epsilon(1e-9));
  }
}

TEST_CASE("thinning") {
  const auto d = ExactDistribution::from_masses({{0, 1}}, {1.0});
  const auto t = thin_distribution(d, 0.5);
  CHECK(t.probability({}) == doctest::Approx(0.25));
  CHECK(t.probability({0}) == doctest::Approx(0.25));
  CHECK(t.probability({0, 1}) == doctest::Approx(0.25));
}

TEST_CASE("total variation") {
  const auto a = ExactDistribution::from_masses({{0}, {1}}, {1.0, 0.0});
  const auto b = ExactDistribution::from_masses({{0}, {1}}, {0.5, 0.5});
  const auto c = ExactDistribution::from_masses({{2}}, {1.0});
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, c) == doctest::Approx(1.0));
  CHECK(tv_distance(a, b) == doctest::Approx(0.5));
  CHECK(tv_distance(b, a) == tv_distance(a, b));
  CHECK(tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-15);

  const std::vector<ElementSet> samples = {{0}, {0}, {1}, {0}};
  const auto e = empirical_distribution(samples);
  CHECK(e.probability({0}) == doctest::Approx(0.75));
  CHECK(statistical_tv_tolerance(8, 2e4) == doctest::Approx(3 * std::sqrt(8 / 4e4)));
}

TEST_CASE("divergences") {
  const std::vector<double> q = {1.0, 0.0};
  const std::vector<double> p = {0.5, 0.5};
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(q, p) == doctest::Approx(std::log(2.0)));
  CHECK(renyi_divergence(p, p, 2.0) == doctest::Approx(1.0));
  CHECK(renyi_divergence(q, p, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(kl_divergence(p, q), SupportMismatch);
  CHECK(near_uniformity_constant(p) == 1.0);
  const std::vector<double> skewed = {0.1, 0.9};
  CHECK(near_uniformity_constant(skewed) == doctest::Approx(5.0));

  // The Renyi moment stays below the KL-based bound for near-uniform p.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + trial % 6;
    std::vector<double> a(n);
    std::vector<double> b(n);
    double sa = 0.0;
    double sb = 0.0;
    for (int i = 0; i < n; ++i) {
      b[i] = u(rng);
      a[i] = b[i] * u(rng);
      sa += a[i];
      sb += b[i];
    }
    for (int i = 0; i < n; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    const double c = near_uniformity_constant(b);
    for (double lambda : {1.0, 1.5, 2.0, 3.0}) {
      CHECK(renyi_divergence(a, b, lambda) <= klrenyi_bound(a, b, lambda, c) * (1 + 1e-12));
    }
  }
}

TEST_CASE("entropic independence spot check") {
  std::mt19937_64 rng(44);
  const auto m = DppModel::make(EnsembleMatrix(oracle::random_psd(8, rng)), Constraint::cardinality(3));
  const EiSpotCheck ok = ei_spot_check(*m, 1.0, 60, 1);
  CHECK(ok.pass);
  CHECK(ok.trials == 60);
  CHECK(ok.worst_ratio <= 1.0 / 3 + 1e-9);
  CHECK(ok.bound == doctest::Approx(1.0 / 3));

  // Uniform over pair unions is far from 1-entropically independent: a point
  // mass on one union loses little entropy when projected to one element.
  const EiSpotCheck bad = ei_spot_check(*hard_instance(4, 2), 1.0, 20, 1);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_ratio > 0.5);

  const auto explicit_measure = std::make_shared<ExplicitMeasure>(
      4, std::vector<ElementSet>{{0, 1}, {2, 3}}, std::vector<double>{1.0, 1.0});
  const EiSpotCheck ex = ei_spot_check(*explicit_measure, 1.0, 10, 2);
  CHECK_FALSE(ex.pass);
  CHECK(ex.worst_ratio > 0.5);
}

TEST_CASE("hard instance") {
  const auto h = hard_instance(2, 2);
  const auto d = brute_force_distribution(*h);
  CHECK(d.support.size() == 2);
  CHECK(d.probability({0, 1}) == doctest::Approx(0.5));
  CHECK(d.probability({2, 3}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(hard_instance(3, 3), BadParity);

  const auto big = hard_instance(6, 6);
  const double z = big->total();
  for (int i = 0; i < 12; ++i) {
    const ElementSet s = {i};
    CHECK(big->count(s) / z == doctest::Approx(0.5));
  }
  const auto exact = brute_force_distribution(*big);
  for (int l = 0; l <= 6; ++l) {
    const auto dist = duplicate_distribution(downsample_distribution(exact, l), l);
    for (int t = 0; 2 * t <= l; ++t) {
      CHECK(dist[t] == doctest::Approx(duplicate_probability(6, l, t)).epsilon(1e-9));
    }
  }
  const ElementSet pairs = {0, 1, 4, 5, 7};
  CHECK(duplicates(pairs) == 2);
  CHECK(duplicate_probability(6, 6, 3) == doctest::Approx(1.0));
  CHECK(duplicate_probability(8, 2, 1) ==
        doctest::Approx(static_cast<double>(4.0L / choose(8, 2))));
}

TEST_CASE("duplicate scaling report") {
  const std::vector<int> ls = {5, 10};
  const auto report = duplicate_scaling_report(50, 100, ls);
  REQUIRE(report["rows"].size() == 2);
  const auto& row = report["rows"][0];
  REQUIRE(row.contains("ratio_to_double"));
  const double ratio = row["ratio_to_double"][1].get<double>();
  CHECK(ratio >= 2.5);
  CHECK(ratio <= 6.0);
  CHECK(row["ratio_reference"][1].get<double>() == 4.0);
  CHECK_FALSE(report["rows"][1].contains("ratio_to_double"));
  const double p0 = report["rows"][0]["p_duplicates"][0].get<double>();
  CHECK(p0 > 0.8);
}

TEST_CASE("criterion reports serialize") {
  CriterionReport r{"tv", 0.01, 0.02, true, "ok"};
  const auto j = to_json(r);
  CHECK(j["criterion"] == "tv");
  CHECK(j["pass"] == true);
}
