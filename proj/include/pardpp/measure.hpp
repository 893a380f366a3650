#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pardpp/element_set.hpp"

namespace pardpp {

class SubsetMeasure;

// Result of conditioning a measure on including a set T. The residual lives on
// the remaining ground set, `index_map[j]` being the parent index of residual
// element j, and satisfies
//   residual.count(F) * factor = parent.count(T u F)
// for every F in residual indices.
struct Conditioning {
  std::shared_ptr<const SubsetMeasure> residual;
  std::vector<int> index_map;
  double factor = 1.0;
};

// An unnormalized measure on subsets of {0..n-1} exposed through its counting
// oracle: count(T) is the total mass of all supersets of T.
class SubsetMeasure {
 public:
  virtual ~SubsetMeasure() = default;

  [[nodiscard]] virtual int ground_size() const = 0;
  // Fixed support cardinality, or -1 when sets of several sizes carry mass.
  [[nodiscard]] virtual int target_size() const = 0;
  // Unnormalized mass of exactly the set `s`.
  [[nodiscard]] virtual double mass(std::span<const int> s) const = 0;
  [[nodiscard]] virtual double count(std::span<const int> given) const = 0;
  // count({i}) for every element. The default issues n oracle calls.
  [[nodiscard]] virtual std::vector<double> inclusion_counts() const;
  // Throws ZeroMassCondition when count(chosen) = 0.
  [[nodiscard]] virtual Conditioning condition(std::span<const int> chosen) const = 0;
  // True when P[T in S] <= prod P[i in S] is known to hold (symmetric DPPs).
  [[nodiscard]] virtual bool negatively_correlated() const { return false; }
  [[nodiscard]] virtual std::string describe() const = 0;

  [[nodiscard]] double total() const { return count({}); }
};

// Residual of an arbitrary measure, answered by delegating to the parent with
// the conditioning set added back. Used for measures without a closed-form
// conditional (explicit masses, the paired hard instance).
class DelegatingConditioned final : public SubsetMeasure {
 public:
  DelegatingConditioned(std::shared_ptr<const SubsetMeasure> parent, ElementSet chosen);

  [[nodiscard]] int ground_size() const override { return static_cast<int>(map_.size()); }
  [[nodiscard]] int target_size() const override;
  [[nodiscard]] double mass(std::span<const int> s) const override;
  [[nodiscard]] double count(std::span<const int> given) const override;
  [[nodiscard]] Conditioning condition(std::span<const int> chosen) const override;
  [[nodiscard]] bool negatively_correlated() const override {
    return parent_->negatively_correlated();
  }
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] const std::vector<int>& index_map() const { return map_; }

 private:
  [[nodiscard]] ElementSet lift(std::span<const int> s) const;

  std::shared_ptr<const SubsetMeasure> parent_;
  ElementSet chosen_;
  std::vector<int> map_;
};

// Conditioning through DelegatingConditioned; for measures without a cheaper
// residual representation.
Conditioning delegate_condition(std::shared_ptr<const SubsetMeasure> self,
                                std::span<const int> chosen);

// Measure given by an explicit table of set masses.
class ExplicitMeasure final : public SubsetMeasure,
                              public std::enable_shared_from_this<ExplicitMeasure> {
 public:
  ExplicitMeasure(int n, std::vector<ElementSet> sets, std::vector<double> masses);

  [[nodiscard]] int ground_size() const override { return n_; }
  [[nodiscard]] int target_size() const override { return target_; }
  [[nodiscard]] double mass(std::span<const int> s) const override;
  [[nodiscard]] double count(std::span<const int> given) const override;
  [[nodiscard]] Conditioning condition(std::span<const int> chosen) const override;
  [[nodiscard]] std::string describe() const override { return "explicit"; }

  [[nodiscard]] const std::vector<ElementSet>& sets() const { return sets_; }
  [[nodiscard]] const std::vector<double>& masses() const { return masses_; }

 private:
  int n_;
  int target_ = -1;
  std::vector<ElementSet> sets_;
  std::vector<double> masses_;
};

// Thread-safe cache of counting queries against a root measure, keyed by
// root-index sets. Conditioned residuals are kept until a size budget
// (in matrix entries, roughly) is exhausted, then the cache is flushed.
class CountingCache {
 public:
  struct Node {
    ElementSet chosen;
    Conditioning conditioning;
    double total = 0.0;            // residual.total()
    std::vector<double> marginals;  // residual-indexed inclusion probabilities
    std::vector<double> cumulative;  // prefix sums of marginals
  };

  explicit CountingCache(std::shared_ptr<const SubsetMeasure> root,
                         std::size_t budget = std::size_t{1} << 24);

  [[nodiscard]] const SubsetMeasure& root() const { return *root_; }
  [[nodiscard]] std::shared_ptr<const SubsetMeasure> root_ptr() const { return root_; }

  // Conditioned state for `chosen` (sorted root indices). Throws
  // ZeroMassCondition if count(chosen) = 0.
  std::shared_ptr<const Node> node(const ElementSet& chosen);

  // P[chosen u extra in S | chosen in S]; `extra` in root indices, disjoint
  // from chosen.
  double conditional_inclusion(const std::shared_ptr<const Node>& node,
                               std::span<const int> extra);

 private:
  void charge(std::size_t cost);

  std::shared_ptr<const SubsetMeasure> root_;
  std::size_t budget_;
  std::size_t used_ = 0;
  std::mutex mutex_;
  std::unordered_map<ElementSet, std::shared_ptr<const Node>, ElementSetHash> nodes_;
  std::unordered_map<ElementSet, double, ElementSetHash> inclusions_;
};

}  // namespace pardpp
