#pragma once

#include <numeric>
#include <vector>

namespace fracture {

/// Disjoint sets whose representative is always the smallest index in the
/// set, so component labels are reproducible.
class UnionFind {
 public:
  explicit UnionFind(int size) : parent_(size) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

  /// Dense labels 0..count-1 ordered by each set's smallest member.
  std::vector<int> labels(int* count = nullptr) {
    std::vector<int> out(parent_.size(), -1);
    std::vector<int> root_label(parent_.size(), -1);
    int next = 0;
    for (int i = 0; i < static_cast<int>(parent_.size()); ++i) {
      const int r = find(i);
      if (root_label[r] < 0) root_label[r] = next++;
      out[i] = root_label[r];
    }
    if (count) *count = next;
    return out;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace fracture
