#pragma once

// Test-only oracles, independent of the library implementation paths they
// check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rieszlab/content.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD: largest singular value of an m x n matrix (row-major).
// Orthogonalizes column pairs until convergence; no power iteration involved.
// ---------------------------------------------------------------------------
inline double jacobi_sigma_max(std::vector<double> A, size_t m, size_t n) {
  auto col_dot = [&](size_t p, size_t q) {
    double s = 0.0;
    for (size_t i = 0; i < m; ++i) s += A[i * n + p] * A[i * n + q];
    return s;
  };
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p + 1 < n; ++p)
      for (size_t q = p + 1; q < n; ++q) {
        double app = col_dot(p, p), aqq = col_dot(q, q), apq = col_dot(p, q);
        off = std::max(off, std::abs(apq) / std::sqrt(std::max(app * aqq, 1e-300)));
        if (std::abs(apq) < 1e-300) continue;
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t), sn = c * t;
        for (size_t i = 0; i < m; ++i) {
          double xp = A[i * n + p], xq = A[i * n + q];
          A[i * n + p] = c * xp - sn * xq;
          A[i * n + q] = sn * xp + c * xq;
        }
      }
    if (off < 1e-14) break;
  }
  double best = 0.0;
  for (size_t p = 0; p < n; ++p) best = std::max(best, col_dot(p, p));
  return std::sqrt(best);
}

// dense oracle for the weighted operator norm of an assembled Riesz matrix
inline double svd_operator_norm(const rieszlab::RieszOperatorMatrix& A) {
  size_t n = A.n;
  size_t m = n * A.comp.size();
  std::vector<double> S(m * n, 0.0);
  std::vector<double> sw(n);
  for (size_t i = 0; i < n; ++i) sw[i] = std::sqrt(A.weights[i]);
  for (size_t c = 0; c < A.comp.size(); ++c)
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        S[(c * n + i) * n + j] = sw[i] * A.comp[c][i * n + j] * sw[j];
  return jacobi_sigma_max(std::move(S), m, n);
}

// ---------------------------------------------------------------------------
// Law-of-cosines form of the symmetrized pair sum:
//   q = (abc)^{-s} (a^s cos(alpha) + b^s cos(beta)).
// ---------------------------------------------------------------------------
inline double pair_sum_law_of_cosines(double a, double b, double c, double s) {
  double cos_alpha = (b * b + c * c - a * a) / (2.0 * b * c);
  double cos_beta = (a * a + c * c - b * b) / (2.0 * a * c);
  return std::pow(a * b * c, -s) * (std::pow(a, s) * cos_alpha + std::pow(b, s) * cos_beta);
}

// ---------------------------------------------------------------------------
// Random valid dyadic coverings of a cell set: descend from the root and stop
// at a random antichain; the ball-gauge cost of any such antichain is a
// feasible value for the covering DP.  Tree adjacency is prebuilt once so
// sampling thousands of coverings stays cheap.
// ---------------------------------------------------------------------------
class CoveringSampler {
 public:
  CoveringSampler(const rieszlab::DyadicCellSet& cells, const rieszlab::GaugeFunction& h)
      : depth_(cells.depth) {
    using namespace rieszlab;
    int d = cells.dim();
    int bits = dyadic::bits_per_axis(d);
    double ball = 0.5 * std::sqrt(double(d));
    std::vector<std::vector<uint64_t>> level(size_t(depth_) + 1);
    level[size_t(depth_)] = cells.cells;
    for (int k = depth_; k > 0; --k) {
      std::vector<uint64_t> up;
      up.reserve(level[size_t(k)].size());
      for (uint64_t c : level[size_t(k)]) up.push_back(dyadic::parent_code(c, d, bits));
      std::sort(up.begin(), up.end());
      up.erase(std::unique(up.begin(), up.end()), up.end());
      level[size_t(k - 1)] = std::move(up);
    }
    cost_.resize(size_t(depth_) + 1);
    children_.resize(size_t(depth_) + 1);
    for (int k = 0; k <= depth_; ++k) {
      cost_[size_t(k)] = h(cells.root.side * std::ldexp(1.0, -k) * ball);
      if (k == depth_) continue;
      children_[size_t(k)].assign(level[size_t(k)].size() + 1, 0);
      // children of level-k node i = contiguous range in level k+1 after sorting by parent
      std::vector<std::pair<uint64_t, size_t>> by_parent;
      for (size_t j = 0; j < level[size_t(k) + 1].size(); ++j)
        by_parent.emplace_back(dyadic::parent_code(level[size_t(k) + 1][j], d, bits), j);
      std::sort(by_parent.begin(), by_parent.end());
      order_.push_back({});
      for (auto& [p, j] : by_parent) order_.back().push_back(j);
      size_t pos = 0;
      for (size_t i = 0; i < level[size_t(k)].size(); ++i) {
        children_[size_t(k)][i] = pos;
        while (pos < by_parent.size() && by_parent[pos].first == level[size_t(k)][i]) ++pos;
      }
      children_[size_t(k)].back() = by_parent.size();
    }
  }

  double sample(rieszlab::RandomStream& rng) const {
    double cost = 0.0;
    std::vector<std::pair<int, size_t>> stack = {{0, 0}};
    while (!stack.empty()) {
      auto [k, i] = stack.back();
      stack.pop_back();
      bool stop = (k == depth_) || (k > 0 && rng.next_double() < 0.35);
      if (stop) {
        cost += cost_[size_t(k)];
        continue;
      }
      for (size_t j = children_[size_t(k)][i]; j < children_[size_t(k)][i + 1]; ++j)
        stack.push_back({k + 1, order_[size_t(k)][j]});
    }
    return cost;
  }

 private:
  int depth_;
  std::vector<double> cost_;                   // per level
  std::vector<std::vector<size_t>> children_;  // per level: child range offsets
  std::vector<std::vector<size_t>> order_;     // per level: child indices sorted by parent
};

// random cell set inside the unit cube
inline rieszlab::DyadicCellSet random_cell_set(int d, int depth, size_t count, uint64_t seed) {
  using namespace rieszlab;
  DyadicCellSet set;
  set.root.corner.assign(size_t(d), 0.0);
  set.root.side = 1.0;
  set.depth = depth;
  RandomStream rng(seed, 0xce115);
  int bits = dyadic::bits_per_axis(d);
  for (size_t i = 0; i < count; ++i) {
    uint64_t code = 0;
    for (int a = 0; a < d; ++a) code |= (rng.next_u64() & ((1ull << depth) - 1)) << (bits * a);
    set.cells.push_back(code);
  }
  dyadic::normalize(set);
  return set;
}

}  // namespace oracles
