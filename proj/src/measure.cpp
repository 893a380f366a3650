#include "pardpp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pardpp/errors.hpp"

namespace pardpp {

std::vector<double> SubsetMeasure::inclusion_counts() const {
  std::vector<double> out(static_cast<std::size_t>(ground_size()));
  for (int i = 0; i < ground_size(); ++i) {
    const int single[] = {i};
    out[i] = count(single);
  }
  return out;
}

DelegatingConditioned::DelegatingConditioned(std::shared_ptr<const SubsetMeasure> parent,
                                             ElementSet chosen)
    : parent_(std::move(parent)), chosen_(normalized(std::move(chosen))) {
  map_ = complement(chosen_, parent_->ground_size());
}

int DelegatingConditioned::target_size() const {
  const int t = parent_->target_size();
  return t < 0 ? -1 : t - static_cast<int>(chosen_.size());
}

ElementSet DelegatingConditioned::lift(std::span<const int> s) const {
  ElementSet out;
  out.reserve(s.size());
  for (int i : s) {
    if (i < 0 || i >= ground_size()) throw InvalidArgument("element out of range");
    out.push_back(map_[i]);
  }
  return set_union(chosen_, normalized(std::move(out)));
}

double DelegatingConditioned::mass(std::span<const int> s) const { return parent_->mass(lift(s)); }

double DelegatingConditioned::count(std::span<const int> given) const {
  return parent_->count(lift(given));
}

Conditioning DelegatingConditioned::condition(std::span<const int> chosen) const {
  const ElementSet all = lift(chosen);
  if (!(parent_->count(all) > 0.0)) {
    throw ZeroMassCondition("conditioning set " + to_string(all) + " has zero mass");
  }
  Conditioning out;
  out.residual = std::make_shared<DelegatingConditioned>(parent_, all);
  const ElementSet local = normalized({chosen.begin(), chosen.end()});
  out.index_map = complement(local, ground_size());
  return out;
}

std::string DelegatingConditioned::describe() const {
  return parent_->describe() + " | " + to_string(chosen_);
}

Conditioning delegate_condition(std::shared_ptr<const SubsetMeasure> self,
                                std::span<const int> chosen) {
  ElementSet t = normalized({chosen.begin(), chosen.end()});
  if (!(self->count(t) > 0.0)) {
    throw ZeroMassCondition("conditioning set " + to_string(t) + " has zero mass");
  }
  Conditioning out;
  out.index_map = complement(t, self->ground_size());
  out.residual = std::make_shared<DelegatingConditioned>(std::move(self), std::move(t));
  return out;
}

ExplicitMeasure::ExplicitMeasure(int n, std::vector<ElementSet> sets, std::vector<double> masses)
    : n_(n) {
  if (sets.size() != masses.size()) throw InvalidArgument("sets and masses differ in length");
  std::map<ElementSet, double> merged;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    ElementSet s = normalized(std::move(sets[i]));
    for (int e : s) {
      if (e < 0 || e >= n) throw InvalidArgument("element out of range");
    }
    if (!(masses[i] >= 0.0) || !std::isfinite(masses[i])) {
      throw NegativeMass("explicit mass must be finite and nonnegative");
    }
    merged[s] += masses[i];
  }
  target_ = -2;
  for (auto& [s, m] : merged) {
    if (m <= 0.0) continue;
    const int size = static_cast<int>(s.size());
    target_ = target_ == -2 || target_ == size ? size : -1;
    sets_.push_back(s);
    masses_.push_back(m);
  }
  if (target_ == -2) target_ = -1;
}

double ExplicitMeasure::mass(std::span<const int> s) const {
  const ElementSet key = normalized({s.begin(), s.end()});
  const auto it = std::lower_bound(sets_.begin(), sets_.end(), key);
  return it != sets_.end() && *it == key ? masses_[it - sets_.begin()] : 0.0;
}

double ExplicitMeasure::count(std::span<const int> given) const {
  const ElementSet t = normalized({given.begin(), given.end()});
  double total = 0.0;
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (std::includes(sets_[i].begin(), sets_[i].end(), t.begin(), t.end())) total += masses_[i];
  }
  return total;
}

Conditioning ExplicitMeasure::condition(std::span<const int> chosen) const {
  return delegate_condition(shared_from_this(), chosen);
}

CountingCache::CountingCache(std::shared_ptr<const SubsetMeasure> root, std::size_t budget)
    : root_(std::move(root)), budget_(budget) {}

void CountingCache::charge(std::size_t cost) {
  used_ += cost;
  if (used_ > budget_) {
    nodes_.clear();
    inclusions_.clear();
    used_ = cost;
  }
}

std::shared_ptr<const CountingCache::Node> CountingCache::node(const ElementSet& chosen) {
  {
    std::lock_guard lock(mutex_);
    const auto it = nodes_.find(chosen);
    if (it != nodes_.end()) return it->second;
  }
  auto fresh = std::make_shared<Node>();
  fresh->chosen = chosen;
  if (chosen.empty()) {
    fresh->conditioning.residual = root_;
    fresh->conditioning.index_map.resize(static_cast<std::size_t>(root_->ground_size()));
    for (int i = 0; i < root_->ground_size(); ++i) fresh->conditioning.index_map[i] = i;
  } else {
    fresh->conditioning = root_->condition(chosen);
  }
  const SubsetMeasure& residual = *fresh->conditioning.residual;
  fresh->total = residual.total();
  if (!(fresh->total > 0.0)) {
    throw ZeroMassCondition("conditioning set " + to_string(chosen) + " has zero mass");
  }
  fresh->marginals = residual.inclusion_counts();
  fresh->cumulative.resize(fresh->marginals.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < fresh->marginals.size(); ++i) {
    fresh->marginals[i] = std::max(0.0, fresh->marginals[i] / fresh->total);
    acc += fresh->marginals[i];
    fresh->cumulative[i] = acc;
  }
  const auto m = static_cast<std::size_t>(residual.ground_size());
  std::lock_guard lock(mutex_);
  charge(m * m + 16);
  return nodes_.emplace(chosen, std::move(fresh)).first->second;
}

double CountingCache::conditional_inclusion(const std::shared_ptr<const Node>& node,
                                            std::span<const int> extra) {
  if (extra.empty()) return 1.0;
  const std::vector<int>& map = node->conditioning.index_map;
  ElementSet local;
  local.reserve(extra.size());
  for (int e : extra) {
    const auto it = std::lower_bound(map.begin(), map.end(), e);
    // Elements dropped from the residual have zero conditional mass.
    if (it == map.end() || *it != e) return 0.0;
    local.push_back(static_cast<int>(it - map.begin()));
  }
  local = normalized(std::move(local));
  if (local.size() == 1) return node->marginals[local[0]];

  ElementSet key = node->chosen;
  key.push_back(-1);
  key.insert(key.end(), local.begin(), local.end());
  {
    std::lock_guard lock(mutex_);
    const auto it = inclusions_.find(key);
    if (it != inclusions_.end()) return it->second;
  }
  const double p = std::max(0.0, node->conditioning.residual->count(local) / node->total);
  std::lock_guard lock(mutex_);
  charge(key.size());
  inclusions_.emplace(std::move(key), p);
  return p;
}

}  // namespace pardpp
