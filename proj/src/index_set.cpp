#include "promprune/index_set.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>

namespace promprune {

IndexSet IndexSet::from_sorted(std::vector<Index> indices) {
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || (i > 0 && indices[i] <= indices[i - 1])) {
      throw Error(ErrorKind::invalid_input,
                  "index set must be strictly increasing and nonnegative");
    }
  }
  return IndexSet(std::move(indices));
}

IndexSet IndexSet::from_unsorted(std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  return from_sorted(std::move(indices));
}

IndexSet IndexSet::range(Index n) {
  std::vector<Index> all(static_cast<size_t>(std::max<Index>(n, 0)));
  std::iota(all.begin(), all.end(), Index{0});
  return IndexSet(std::move(all));
}

bool IndexSet::contains(Index value) const {
  return std::binary_search(indices_.begin(), indices_.end(), value);
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  std::vector<Index> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return IndexSet::from_sorted(std::move(out));
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  std::vector<Index> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return IndexSet::from_sorted(std::move(out));
}

bool disjoint(const IndexSet& a, const IndexSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return false;
    if (*i < *j) ++i; else ++j;
  }
  return true;
}

}  // namespace promprune
