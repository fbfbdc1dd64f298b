#pragma once

#include <vector>

#include "promprune/tensor_core.hpp"

namespace promprune {

/// Strictly increasing set of token indices.
class IndexSet {
 public:
  using const_iterator = std::vector<Index>::const_iterator;

  IndexSet() = default;

  /// Throws invalid_input unless `indices` is strictly increasing and >= 0.
  static IndexSet from_sorted(std::vector<Index> indices);
  /// Sorts; throws invalid_input on duplicates or negative entries.
  static IndexSet from_unsorted(std::vector<Index> indices);
  /// {0, 1, ..., n - 1}
  static IndexSet range(Index n);

  const std::vector<Index>& indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  Index operator[](Index i) const { return indices_[static_cast<size_t>(i)]; }
  const_iterator begin() const { return indices_.begin(); }
  const_iterator end() const { return indices_.end(); }

  bool contains(Index value) const;
  /// True when every index is < n.
  bool fits(Index n) const { return empty() || indices_.back() < n; }

  bool operator==(const IndexSet&) const = default;

 private:
  explicit IndexSet(std::vector<Index> indices) : indices_(std::move(indices)) {}

  std::vector<Index> indices_;
};

/// Elements of `a` that are not in `b`.
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
bool disjoint(const IndexSet& a, const IndexSet& b);

}  // namespace promprune
