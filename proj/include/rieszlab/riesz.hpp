#pragma once

#include "rieszlab/measure.hpp"

namespace rieszlab {

// Evaluation context for the s-Riesz kernel K^s(x) = x / |x|^{s+1}.
// The smooth cutoff used by the modified transform is the fixed quintic
// smoothstep: phi(t) = 1 for t <= 1, 1 - S(t-1) on [1,2], 0 for t >= 2,
// S(u) = 6u^5 - 15u^4 + 10u^3, which makes outputs bit-reproducible.
struct RieszContext {
  double s = 1.0;
  int d = 1;

  static double smoothstep(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return ((6.0 * u - 15.0) * u + 10.0) * u * u * u;
  }
  static double cutoff_phi(double t) { return 1.0 - smoothstep(t - 1.0); }
  // psi(t) = 1 - phi(t): 0 on [0,1], 1 on [2,inf)
  static double cutoff_psi(double t) { return smoothstep(t - 1.0); }
};

struct VectorValue {
  std::vector<double> components;
  double magnitude = 0.0;
};

namespace detail {

inline VectorValue finish_vector(std::vector<NeumaierSum>& acc) {
  VectorValue out;
  out.components.resize(acc.size());
  double m = 0.0;
  for (size_t a = 0; a < acc.size(); ++a) {
    out.components[a] = acc[a].value();
    m += sqr(out.components[a]);
  }
  out.magnitude = std::sqrt(m);
  return out;
}

struct Contribution {
  double mag;
  std::array<double, 4> v;
};

// kernel contributions sorted by descending magnitude, then compensated
inline VectorValue sum_contributions(std::vector<Contribution>& cs, int d) {
  std::sort(cs.begin(), cs.end(),
            [](const Contribution& a, const Contribution& b) { return a.mag > b.mag; });
  std::vector<NeumaierSum> acc(static_cast<size_t>(d));
  for (const auto& c : cs)
    for (int a = 0; a < d; ++a) acc[size_t(a)].add(c.v[size_t(a)]);
  return finish_vector(acc);
}

}  // namespace detail

// R_{nu,eps}(x) = sum over |y_j - x| > eps of w_j K^s(y_j - x)
inline VectorValue truncated_transform(const DiscreteMeasure& nu, const RieszContext& ctx,
                                       std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("truncated_transform: eps must be positive");
  int d = nu.dim();
  std::vector<detail::Contribution> cs;
  cs.reserve(nu.natoms());
  for (size_t j = 0; j < nu.natoms(); ++j) {
    auto y = nu.atom(j);
    double r = dist(x, y);
    if (!(r > eps)) continue;
    double k = nu.weight(j) * inv_rpow(r, ctx.s + 1.0);
    detail::Contribution c;
    c.mag = std::abs(nu.weight(j)) * inv_rpow(r, ctx.s);
    for (int a = 0; a < d; ++a) c.v[size_t(a)] = k * (y[size_t(a)] - x[size_t(a)]);
    cs.push_back(c);
  }
  if (cs.empty()) {
    VectorValue out;
    out.components.assign(size_t(d), 0.0);
    return out;
  }
  return detail::sum_contributions(cs, d);
}

struct MaximalValue {
  double value = 0.0;
  bool at_atom = false;  // x coincides with an atom; value reported as +inf
};

// sup over eps > 0 of |R_{nu,eps}(x)|.  The transform is piecewise constant
// in eps between the sorted atom distances, so the supremum is attained on
// the finite candidate set of suffix sums over distance groups.
inline MaximalValue maximal_transform(const DiscreteMeasure& nu, const RieszContext& ctx,
                                      std::span<const double> x) {
  int d = nu.dim();
  struct Entry {
    double r;
    std::array<double, 4> v;
  };
  std::vector<Entry> es;
  es.reserve(nu.natoms());
  MaximalValue out;
  for (size_t j = 0; j < nu.natoms(); ++j) {
    auto y = nu.atom(j);
    double r = dist(x, y);
    if (r == 0.0) {
      if (nu.weight(j) != 0.0) out.at_atom = true;
      continue;
    }
    double k = nu.weight(j) * inv_rpow(r, ctx.s + 1.0);
    Entry e;
    e.r = r;
    for (int a = 0; a < d; ++a) e.v[size_t(a)] = k * (y[size_t(a)] - x[size_t(a)]);
    es.push_back(e);
  }
  if (out.at_atom) {
    out.value = kInf;
    return out;
  }
  std::sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) { return a.r > b.r; });
  std::vector<NeumaierSum> acc(static_cast<size_t>(d));
  double best = 0.0;
  size_t i = 0;
  while (i < es.size()) {
    double r = es[i].r;
    while (i < es.size() && es[i].r == r) {
      for (int a = 0; a < d; ++a) acc[size_t(a)].add(es[i].v[size_t(a)]);
      ++i;
    }
    double m = 0.0;
    for (int a = 0; a < d; ++a) m += sqr(acc[size_t(a)].value());
    best = std::max(best, m);
  }
  out.value = std::sqrt(best);
  return out;
}

// smooth-cutoff transform: weight psi(|y-x|/eps), equal to the truncated
// transform when no atom lies in the annulus eps < |y-x| < 2 eps
inline VectorValue modified_transform(const DiscreteMeasure& nu, const RieszContext& ctx,
                                      std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("modified_transform: eps must be positive");
  int d = nu.dim();
  std::vector<detail::Contribution> cs;
  cs.reserve(nu.natoms());
  for (size_t j = 0; j < nu.natoms(); ++j) {
    auto y = nu.atom(j);
    double r = dist(x, y);
    if (!(r > eps)) continue;  // psi vanishes on [0, eps]
    double psi = RieszContext::cutoff_psi(r / eps);
    if (psi == 0.0) continue;
    double k = psi * nu.weight(j) * inv_rpow(r, ctx.s + 1.0);
    detail::Contribution c;
    c.mag = std::abs(k) * r;
    for (int a = 0; a < d; ++a) c.v[size_t(a)] = k * (y[size_t(a)] - x[size_t(a)]);
    cs.push_back(c);
  }
  if (cs.empty()) {
    VectorValue out;
    out.components.assign(size_t(d), 0.0);
    return out;
  }
  return detail::sum_contributions(cs, d);
}

struct PairSum {
  double q = 0.0;
  double bound = 0.0;
  std::array<int, 3> permutation = {0, 1, 2};  // applied to the inputs
};

// q_s(x,y,z) = K^s(x-z).K^s(y-z) + K^s(y-x).K^s(z-x) for points labeled so
// that |z-x| <= |z-y| <= |y-x|, together with the triangle bound
// 2^{s+1} |y-x|^{-s-1} |z-x|^{-s+1}.  Inputs are relabeled when necessary.
inline PairSum symmetrized_pair_sum(std::span<const double> x0, std::span<const double> y0,
                                    std::span<const double> z0, double s) {
  std::array<std::span<const double>, 3> p = {x0, y0, z0};
  double d01 = dist(p[0], p[1]), d02 = dist(p[0], p[2]), d12 = dist(p[1], p[2]);
  if (d01 == 0.0 || d02 == 0.0 || d12 == 0.0)
    throw std::invalid_argument("symmetrized_pair_sum: points must be pairwise distinct");
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  auto pd = [&](int i, int j) {
    int a = std::min(i, j), b = std::max(i, j);
    return (a == 0 && b == 1) ? d01 : (a == 0 && b == 2) ? d02 : d12;
  };
  PairSum out;
  for (const auto& perm : perms) {
    double c = pd(perm[2], perm[0]);  // |z-x|
    double b = pd(perm[2], perm[1]);  // |z-y|
    double a = pd(perm[1], perm[0]);  // |y-x|
    if (c <= b && b <= a) {
      out.permutation = {perm[0], perm[1], perm[2]};
      auto x = p[size_t(perm[0])];
      auto y = p[size_t(perm[1])];
      auto z = p[size_t(perm[2])];
      size_t d = x.size();
      auto kernel_dot = [&](std::span<const double> u_from, std::span<const double> u_to,
                            std::span<const double> v_from, std::span<const double> v_to,
                            double ru, double rv) {
        double dot = 0.0;
        for (size_t i = 0; i < d; ++i) dot += (u_to[i] - u_from[i]) * (v_to[i] - v_from[i]);
        return dot * inv_rpow(ru, s + 1.0) * inv_rpow(rv, s + 1.0);
      };
      // K(x-z).K(y-z) + K(y-x).K(z-x)
      out.q = kernel_dot(z, x, z, y, c, b) + kernel_dot(x, y, x, z, a, c);
      out.bound = std::pow(2.0, s + 1.0) * inv_rpow(a, s + 1.0) * std::pow(c, 1.0 - s);
      return out;
    }
  }
  throw std::logic_error("symmetrized_pair_sum: unreachable");
}

}  // namespace rieszlab
