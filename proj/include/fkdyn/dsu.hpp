#pragma once

#include <numeric>
#include <vector>

namespace fkdyn {

class DisjointSets {
 public:
  explicit DisjointSets(int n = 0) { reset(n); }
  void reset(int n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), 0);
    size_.assign(n, 1);
    count_ = n;
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --count_;
    return true;
  }
  int count() const { return count_; }
  int size_of(int a) { return size_[find(a)]; }

 private:
  std::vector<int> parent_, size_;
  int count_ = 0;
};

}  // namespace fkdyn
