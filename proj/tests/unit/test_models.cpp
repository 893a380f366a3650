#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pardpp/dpp_model.hpp"
#include "pardpp/errors.hpp"
#include "pardpp/validation.hpp"

using namespace pardpp;

namespace {

Matrix diag(std::initializer_list<double> values) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                          static_cast<Eigen::Index>(values.size()));
  int i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

std::shared_ptr<const DppModel> partition_i4() {
  return DppModel::make(EnsembleMatrix(Matrix::Identity(4, 4)),
                        Constraint::partition({{0, 1}, {2, 3}}, {1, 1}));
}

void check_counts(const DppModel& model) {
  const auto mu = oracle::masses(model.ensemble().matrix(), model.constraint());
  const int n = model.ground_size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const ElementSet t = oracle::from_mask(mask);
    const double ref = static_cast<double>(oracle::count(mu, t));
    const double got = model.count(t);
    const double scale = std::max(std::abs(ref), 1e-12 * model.total());
    CHECK(std::abs(got - ref) <= 1e-7 * scale);
  }
}

}  // namespace

TEST_CASE("count examples") {
  CHECK(DppModel(EnsembleMatrix(Matrix::Identity(2, 2))).count({}) == doctest::Approx(4));
  const DppModel two(EnsembleMatrix(diag({1, 2, 3})), Constraint::cardinality(2));
  CHECK(two.count({}) == doctest::Approx(11));
  CHECK(partition_i4()->count({}) == doctest::Approx(4));
  const ElementSet zero_mass = {0, 1};
  CHECK(partition_i4()->count(zero_mass) == 0.0);
  const DppModel rank_one(EnsembleMatrix(Matrix::Ones(3, 3)));
  CHECK(rank_one.count(zero_mass) == doctest::Approx(0).scale(1));
}

TEST_CASE("marginal examples") {
  const DppModel id(EnsembleMatrix(Matrix::Identity(3, 3)));
  CHECK(marginal(id, 0) == doctest::Approx(0.5));
  const DppModel two(EnsembleMatrix(diag({1, 2, 3})), Constraint::cardinality(2));
  CHECK(marginal(two, 0) == doctest::Approx(5.0 / 11));
  const ElementSet given = {1};
  CHECK_THROWS_AS(marginal(two, 1, given), InvalidArgument);
  const auto p = partition_i4();
  const ElementSet impossible = {0, 1};
  CHECK_THROWS_AS(marginal(*p, 2, impossible), ZeroConditional);
}

TEST_CASE("condition examples") {
  const auto id = DppModel::make(EnsembleMatrix(Matrix::Identity(4, 4)));
  const ElementSet first = {0};
  const ConditionedState s = condition(*id, first);
  CHECK(s.index_map == std::vector<int>{1, 2, 3});
  CHECK((s.residual->ensemble().matrix() - Matrix::Identity(3, 3)).norm() < 1e-12);
  CHECK(s.residual->constraint().type == Constraint::Type::kNone);

  const auto two = DppModel::make(EnsembleMatrix(diag({1, 2, 3})), Constraint::cardinality(2));
  const ElementSet third = {2};
  const ConditionedState r = condition(*two, third);
  CHECK(r.residual->target_size() == 1);
  CHECK(r.index_map == std::vector<int>{0, 1});
  const ElementSet a = {0};
  const ElementSet b = {1};
  CHECK(r.residual->mass(b) / r.residual->mass(a) == doctest::Approx(2.0));
  CHECK(r.block_det == doctest::Approx(3.0));

  const ConditionedState q = condition(*partition_i4(), first);
  CHECK(q.index_map == std::vector<int>{2, 3});
  CHECK(q.residual->constraint().quotas == std::vector<int>{1});
  CHECK(q.residual->count({}) == doctest::Approx(2));

  const ElementSet both = {0, 1};
  CHECK_THROWS_AS(condition(*partition_i4(), both), ZeroMassCondition);
}

TEST_CASE("size distribution examples") {
  const auto id = size_distribution(DppModel(EnsembleMatrix(Matrix::Identity(2, 2))));
  CHECK(id[0] == doctest::Approx(0.25));
  CHECK(id[1] == doctest::Approx(0.5));
  CHECK(id[2] == doctest::Approx(0.25));
  const auto zero = size_distribution(DppModel(EnsembleMatrix(Matrix::Zero(3, 3))));
  CHECK(zero[0] == doctest::Approx(1.0));
  CHECK(zero[3] == doctest::Approx(0.0).scale(1));
  const auto d = size_distribution(DppModel(EnsembleMatrix(diag({1, 2, 3}))));
  CHECK(d[0] == doctest::Approx(1.0 / 24));
  CHECK(d[1] == doctest::Approx(6.0 / 24));
  CHECK(d[2] == doctest::Approx(11.0 / 24));
  CHECK(d[3] == doctest::Approx(6.0 / 24));
  CHECK_THROWS_AS(size_distribution(*partition_i4()), InvalidArgument);
}

TEST_CASE("constraint validation") {
  const EnsembleMatrix id(Matrix::Identity(4, 4));
  CHECK_THROWS_AS(DppModel(id, Constraint::cardinality(5)), InvalidConstraint);
  CHECK_THROWS_AS(DppModel(id, Constraint::cardinality(-1)), InvalidConstraint);
  CHECK_THROWS_AS(DppModel(id, Constraint::partition({{0, 1}, {1, 2, 3}}, {1, 1})),
                  InvalidConstraint);
  CHECK_THROWS_AS(DppModel(id, Constraint::partition({{0, 1}, {2}}, {1, 1})), InvalidConstraint);
  CHECK_THROWS_AS(DppModel(id, Constraint::partition({{0, 1}, {2, 3}}, {3, 0})),
                  InvalidConstraint);
  CHECK_THROWS_AS(
      DppModel(id, Constraint::partition({{0}, {1}, {2}, {3}, {}}, {1, 1, 1, 1, 0})),
      InvalidConstraint);
  // Rank one: no set of size 2 has mass.
  CHECK_THROWS_AS(DppModel(EnsembleMatrix(Matrix::Ones(3, 3)), Constraint::cardinality(2)),
                  InvalidConstraint);
  const Constraint c = parse_partition("0,1|2,3:1,1");
  CHECK(c.blocks == std::vector<ElementSet>{{0, 1}, {2, 3}});
  CHECK(c.quotas == std::vector<int>{1, 1});
  CHECK_THROWS_AS(parse_partition("0,1|2,3"), ParseError);
}

TEST_CASE("counting matches enumeration for every variant") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 16; ++trial) {
    const int n = 3 + trial % 6;
    const Matrix l = trial % 2 ? oracle::random_npsd(n, rng) : oracle::random_psd(n, rng);
    check_counts(DppModel(EnsembleMatrix(l)));
    check_counts(DppModel(EnsembleMatrix(l), Constraint::cardinality(1 + trial % (n - 1))));
    for (int attempt = 0; attempt < 20; ++attempt) {
      const Constraint c = oracle::random_partition(n, 2 + trial % 2, rng);
      if (oracle::count(oracle::masses(l, c), {}) <= 0.0L) continue;
      check_counts(DppModel(EnsembleMatrix(l), c));
      break;
    }
  }
}

TEST_CASE("large k-DPP counts use the spectral route") {
  std::mt19937_64 rng(7);
  const Matrix l = oracle::random_psd(24, rng, -1, 0.3);
  const DppModel m(EnsembleMatrix(l), Constraint::cardinality(5));
  const auto e = elementary_symmetric_spectral(l, MatrixKind::kSymmetricPsd);
  CHECK(m.count({}) == doctest::Approx(static_cast<double>(e[5])).epsilon(1e-9));
  const auto inc = m.inclusion_counts();
  double sum = 0.0;
  for (double v : inc) sum += v;
  CHECK(sum == doctest::Approx(5 * m.count({})).epsilon(1e-9));
  for (int i : {0, 7, 23}) {
    const ElementSet t = {i};
    CHECK(inc[i] == doctest::Approx(m.count(t)).epsilon(1e-8));
  }
}

TEST_CASE("conditioning commutes with counting") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 5;
    const Matrix l = trial % 2 ? oracle::random_npsd(n, rng) : oracle::random_psd(n, rng);
    const Constraint c = trial < 2   ? Constraint::none()
                         : trial < 4 ? Constraint::cardinality(3)
                                     : Constraint::partition({{0, 1, 2}, {3, 4}}, {2, 1});
    const DppModel m(EnsembleMatrix(l), c);
    const ElementSet t = {1, 3};
    const ConditionedState s = condition(m, t);
    const int r = s.residual->ground_size();
    for (std::uint64_t fm = 0; fm < (std::uint64_t{1} << r); ++fm) {
      const ElementSet f = oracle::from_mask(fm);
      ElementSet joint = t;
      for (int j : f) joint.push_back(s.index_map[j]);
      joint = normalized(joint);
      const double ref = m.count(joint);
      CHECK(s.residual->count(f) * s.block_det ==
            doctest::Approx(ref).epsilon(1e-7).scale(1e-9 * m.total()));
    }
  }
}

TEST_CASE("chain rule of marginals") {
  std::mt19937_64 rng(77);
  const Matrix l = oracle::random_npsd(6, rng);
  const DppModel m(EnsembleMatrix(l), Constraint::cardinality(3));
  const ElementSet s = {0, 2, 5};
  const double z = m.total();
  std::vector<int> order = {5, 0, 2};
  double prod = 1.0;
  ElementSet given;
  for (int x : order) {
    prod *= marginal(m, x, given);
    given = normalized(set_union(given, ElementSet{x}));
  }
  // P[S] = mu(S) / Z for a fixed-size model, and the chain multiplies the
  // probabilities of each element joining.
  CHECK(prod == doctest::Approx(m.count(s) / z).epsilon(1e-7));
  CHECK(m.mass(s) == doctest::Approx(m.count(s)).epsilon(1e-9));
}

TEST_CASE("symmetric models are negatively correlated") {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    const DppModel m(EnsembleMatrix(oracle::random_psd(n, rng, 1 + trial % n)));
    CHECK(negative_correlation_ratio(m) <= 1.0 + 1e-10);
  }
}

TEST_CASE("model description files") {
  const auto dir = std::filesystem::temp_directory_path() / "pardpp_model_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "l.txt") << "3\n1 0 0\n0 2 0\n0 0 3\n";
    std::ofstream(dir / "m.json")
        << R"({"matrix": "l.txt", "constraint": {"type": "cardinality", "k": 2}})";
    std::ofstream(dir / "inline.json")
        << R"({"matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
              "constraint": {"type": "partition", "blocks": [[0,1],[2,3]], "quotas": [1,1]}})";
    std::ofstream(dir / "bad.json") << R"({"matrix": "l.txt", "constraint": {"type": "odd"}})";
  }
  CHECK(load_model((dir / "m.json").string())->count({}) == doctest::Approx(11));
  CHECK(load_model((dir / "inline.json").string())->count({}) == doctest::Approx(4));
  CHECK_THROWS_AS(load_model((dir / "bad.json").string()), ParseError);
  CHECK_THROWS_AS(load_model((dir / "missing.json").string()), ParseError);
  std::filesystem::remove_all(dir);
}
