#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pardpp/element_set.hpp"
#include "pardpp/measure.hpp"
#include "pardpp/numerics.hpp"

namespace pardpp {

// Largest number of partition blocks accepted; the counting grid grows like a
// product over blocks.
inline constexpr int kMaxPartitionBlocks = 4;

struct Constraint {
  enum class Type { kNone, kCardinality, kPartition };

  Type type = Type::kNone;
  int k = 0;
  std::vector<ElementSet> blocks;
  std::vector<int> quotas;

  static Constraint none() { return {}; }
  static Constraint cardinality(int k);
  static Constraint partition(std::vector<ElementSet> blocks, std::vector<int> quotas);

  // Total size of every supported set, or -1 without a constraint.
  [[nodiscard]] int target_size() const;
};

std::string_view to_string(Constraint::Type type);

// A DPP with ensemble matrix L and an optional cardinality or partition
// constraint: mu(S) = det(L_{S,S}) * [S satisfies the constraint].
class DppModel final : public SubsetMeasure, public std::enable_shared_from_this<DppModel> {
 public:
  // Validates the constraint and requires a positive partition function for
  // constrained models. Throws InvalidConstraint.
  DppModel(EnsembleMatrix ensemble, Constraint constraint = Constraint::none());

  static std::shared_ptr<const DppModel> make(EnsembleMatrix ensemble,
                                              Constraint constraint = Constraint::none());

  [[nodiscard]] const EnsembleMatrix& ensemble() const { return ensemble_; }
  [[nodiscard]] const Constraint& constraint() const { return constraint_; }
  // K = L (I + L)^{-1}, computed on first use.
  [[nodiscard]] const MarginalKernel& kernel() const;

  [[nodiscard]] int ground_size() const override { return ensemble_.size(); }
  [[nodiscard]] int target_size() const override { return constraint_.target_size(); }
  [[nodiscard]] double mass(std::span<const int> s) const override;
  [[nodiscard]] double count(std::span<const int> given) const override;
  [[nodiscard]] std::vector<double> inclusion_counts() const override;
  [[nodiscard]] Conditioning condition(std::span<const int> chosen) const override;
  [[nodiscard]] bool negatively_correlated() const override {
    return ensemble_.symmetric() && constraint_.type != Constraint::Type::kPartition;
  }
  [[nodiscard]] std::string describe() const override;

  // Same ensemble with the constraint replaced by |S| = k.
  [[nodiscard]] std::shared_ptr<const DppModel> with_cardinality(int k) const;

 private:
  struct Trusted {};
  DppModel(EnsembleMatrix ensemble, Constraint constraint, Trusted);

  EnsembleMatrix ensemble_;
  Constraint constraint_;
  mutable std::once_flag kernel_once_;
  mutable std::optional<MarginalKernel> kernel_;
};

// A partially built sample: the chosen elements and the residual model on the
// rest of the ground set.
struct ConditionedState {
  ElementSet chosen;
  std::shared_ptr<const DppModel> residual;
  std::vector<int> index_map;  // residual index -> original index
  double block_det = 1.0;      // det(L_{T,T})
};

double count(const DppModel& model, std::span<const int> given);

// P[i in S | given in S]. Throws InvalidArgument if i is in `given` and
// ZeroConditional if count(given) = 0.
double marginal(const DppModel& model, int i, std::span<const int> given = {});

// Throws ZeroMassCondition if count(T) = 0.
ConditionedState condition(const DppModel& model, std::span<const int> chosen);

// P[|S| = j] for j = 0..n of an unconstrained model.
std::vector<double> size_distribution(const DppModel& model);

// Parses a model description file (JSON, see README). Relative matrix paths
// are resolved against the description's directory.
std::shared_ptr<const DppModel> load_model(const std::string& path);

// Parses the compact partition syntax "0,1|2,3:1,1" (blocks, then quotas).
Constraint parse_partition(const std::string& spec);

}  // namespace pardpp
