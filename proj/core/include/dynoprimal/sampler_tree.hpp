#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dynoprimal {

// Balanced binary tree over nonnegative leaf values a_0..a_{k-1} with
// internal nodes caching subtree sums. increment() updates one root-to-leaf
// path; return_index(y) finds the leaf i with A_{i-1} <= y < A_i where A_i
// is the prefix sum a_0+..+a_i, or nothing when y >= A_{k-1}.
class SamplerTree {
public:
  explicit SamplerTree(std::size_t leaves = 0) { ensure(leaves); }

  std::size_t leaf_count() const { return leaves_; }
  double total() const { return cap_ ? sum_[1] : 0.0; }

  double leaf(std::size_t i) const {
    if (i >= leaves_) throw std::out_of_range("leaf index out of range");
    return sum_[cap_ + i];
  }

  // Grows to hold at least `leaves` values, preserving existing ones.
  void ensure(std::size_t leaves) {
    if (leaves <= leaves_) return;
    std::size_t cap = cap_ ? cap_ : 1;
    while (cap < leaves) cap *= 2;
    if (cap != cap_) {
      std::vector<double> next(2 * cap, 0.0);
      for (std::size_t i = 0; i < leaves_; ++i) next[cap + i] = sum_[cap_ + i];
      for (std::size_t i = cap - 1; i >= 1; --i)
        next[i] = next[2 * i] + next[2 * i + 1];
      sum_.swap(next);
      cap_ = cap;
    }
    leaves_ = leaves;
  }

  void increment(std::size_t i, double delta) {
    if (i >= leaves_) throw std::out_of_range("leaf index out of range");
    double next = sum_[cap_ + i] + delta;
    if (next < 0.0) {
      if (next < -1e-9)
        throw std::invalid_argument("leaf value would turn negative");
      next = 0.0; // cancellation residue
    }
    delta = next - sum_[cap_ + i];
    for (std::size_t p = cap_ + i; p >= 1; p /= 2) sum_[p] += delta;
    sum_[cap_ + i] = next; // exact, no accumulated error at the leaf
  }

  // Pins the leaf to an exact value; ancestors absorb the difference.
  void set_leaf(std::size_t i, double value) {
    if (i >= leaves_) throw std::out_of_range("leaf index out of range");
    if (value < 0.0) throw std::invalid_argument("leaf value must be >= 0");
    const double delta = value - sum_[cap_ + i];
    for (std::size_t p = (cap_ + i) / 2; p >= 1; p /= 2) sum_[p] += delta;
    sum_[cap_ + i] = value;
  }

  std::optional<std::size_t> return_index(double y) const {
    if (y < 0.0) throw std::invalid_argument("search point must be >= 0");
    if (cap_ == 0 || y >= sum_[1]) return std::nullopt;
    std::size_t p = 1;
    while (p < cap_) {
      if (y < sum_[2 * p]) {
        p = 2 * p;
      } else {
        y -= sum_[2 * p];
        p = 2 * p + 1;
      }
    }
    std::size_t i = p - cap_;
    return i < leaves_ ? std::optional<std::size_t>(i) : std::nullopt;
  }

  // Internal sums must equal the sum of their children.
  bool check_consistency(double tol = 1e-9) const {
    for (std::size_t p = 1; p < cap_; ++p) {
      double kids = sum_[2 * p] + sum_[2 * p + 1];
      if (std::abs(sum_[p] - kids) > tol * std::max(1.0, std::abs(kids)))
        return false;
    }
    for (std::size_t i = leaves_; cap_ && i < cap_; ++i)
      if (sum_[cap_ + i] != 0.0) return false;
    return true;
  }

  // Direct storage access (tests corrupt internal sums through this).
  std::vector<double>& raw_storage() { return sum_; }

private:
  std::size_t cap_ = 0;    // power-of-two leaf slots
  std::size_t leaves_ = 0; // addressable leaves
  std::vector<double> sum_; // 1-based heap layout, size 2*cap_
};

} // namespace dynoprimal
