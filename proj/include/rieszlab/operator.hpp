#pragma once

#include "rieszlab/riesz.hpp"

namespace rieszlab {

// The eps-truncated Riesz operator on L^2(mu) for an atomic nonnegative mu,
// stored as d component matrices entry(i,j) = K^s_c(x_j - x_i) masked by
// |x_j - x_i| > eps.  Weights ride along for the weighted norm.
struct RieszOperatorMatrix {
  int d = 1;
  size_t n = 0;
  double s = 1.0;
  double eps = 0.0;
  std::vector<std::vector<double>> comp;  // d matrices, row-major n*n
  std::vector<double> weights;
};

inline RieszOperatorMatrix assemble_operator(const DiscreteMeasure& mu, const RieszContext& ctx,
                                             double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("assemble_operator: eps must be positive");
  for (double w : mu.weights())
    if (!(w > 0.0))
      throw std::invalid_argument("assemble_operator: measure must have positive weights");
  RieszOperatorMatrix A;
  A.d = mu.dim();
  A.n = mu.natoms();
  A.s = ctx.s;
  A.eps = eps;
  A.weights.assign(mu.weights().begin(), mu.weights().end());
  A.comp.assign(size_t(A.d), std::vector<double>(A.n * A.n, 0.0));
  for (size_t i = 0; i < A.n; ++i) {
    auto xi = mu.atom(i);
    for (size_t j = 0; j < A.n; ++j) {
      if (j == i) continue;
      auto xj = mu.atom(j);
      double r = dist(xi, xj);
      if (!(r > eps)) continue;
      double k = inv_rpow(r, ctx.s + 1.0);
      for (int c = 0; c < A.d; ++c)
        A.comp[size_t(c)][i * A.n + j] = k * (xj[size_t(c)] - xi[size_t(c)]);
    }
  }
  return A;
}

struct OperatorNormResult {
  double value = 0.0;
  bool converged = true;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

// weighted matrices M_c = W^{1/2} A_c W^{1/2}; the operator norm is the top
// singular value of the stacked (d n) x n block
inline std::vector<std::vector<double>> weighted_blocks(const RieszOperatorMatrix& A) {
  size_t n = A.n;
  std::vector<double> sw(n);
  for (size_t i = 0; i < n; ++i) sw[i] = std::sqrt(A.weights[i]);
  std::vector<std::vector<double>> M(A.comp.size(), std::vector<double>(n * n));
  for (size_t c = 0; c < A.comp.size(); ++c)
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) M[c][i * n + j] = sw[i] * A.comp[c][i * n + j] * sw[j];
  return M;
}

inline void normal_matvec(const std::vector<std::vector<double>>& M, size_t n,
                          std::span<const double> v, std::vector<double>& y,
                          std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& Mc : M) {
    // y = Mc v
    for (size_t i = 0; i < n; ++i) {
      const double* row = Mc.data() + i * n;
      double acc = 0.0;
      for (size_t j = 0; j < n; ++j) acc += row[j] * v[j];
      y[i] = acc;
    }
    // out += Mc^T y
    for (size_t i = 0; i < n; ++i) {
      const double* row = Mc.data() + i * n;
      double yi = y[i];
      if (yi == 0.0) continue;
      for (size_t j = 0; j < n; ++j) out[j] += row[j] * yi;
    }
  }
}

inline void seed_vector(std::vector<double>& v, int which) {
  for (size_t i = 0; i < v.size(); ++i) {
    uint64_t h = hash_combine(0x9d39247e33776d41ull * (which + 1), i);
    double p = (double(h >> 11) * 0x1.0p-53 - 0.5) * 0.02;
    v[i] = (which == 0 ? 1.0 : ((i & 1) ? -1.0 : 1.0)) + p;
  }
}

// Power iteration on the PSD normal operator G = sum_c Mc^T Mc with a
// deterministic start.  Residual-based stopping: for symmetric G the Rayleigh
// quotient theta is within ||Gv - theta v|| of an eigenvalue.
inline OperatorNormResult power_norm(const std::vector<std::vector<double>>& M, size_t n,
                                     double tol, std::vector<double>* warm = nullptr) {
  OperatorNormResult res;
  if (n == 0) return res;
  std::vector<double> v(n), y(n), g(n);
  int cap = int(10 * n) + 10;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 0 && warm && warm->size() == n)
      v = *warm;
    else
      seed_vector(v, attempt);
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    if (nv == 0.0) seed_vector(v, 0);
    for (auto& x : v) x /= nv;
    double theta = 0.0;
    for (int it = 0; it < cap; ++it) {
      normal_matvec(M, n, v, y, g);
      theta = 0.0;
      for (size_t i = 0; i < n; ++i) theta += v[i] * g[i];
      double rr = 0.0;
      for (size_t i = 0; i < n; ++i) rr += sqr(g[i] - theta * v[i]);
      rr = std::sqrt(rr);
      res.iterations += 1;
      if (theta <= 0.0) {  // zero operator
        res.value = 0.0;
        res.residual = rr;
        res.converged = true;
        return res;
      }
      if (rr <= 2.0 * tol * theta) {
        res.value = std::sqrt(theta);
        res.residual = rr / theta;
        res.converged = true;
        if (warm) *warm = v;
        return res;
      }
      double ng = 0.0;
      for (double x : g) ng += x * x;
      ng = std::sqrt(ng);
      if (ng == 0.0) {
        res.value = 0.0;
        res.converged = true;
        return res;
      }
      for (size_t i = 0; i < n; ++i) v[i] = g[i] / ng;
    }
    res.value = std::sqrt(std::max(theta, 0.0));
    res.residual = tol * 10;  // placeholder; refined below
  }
  // both attempts exhausted the cap: report the last Rayleigh value
  normal_matvec(M, n, v, y, g);
  double theta = 0.0, rr = 0.0;
  for (size_t i = 0; i < n; ++i) theta += v[i] * g[i];
  for (size_t i = 0; i < n; ++i) rr += sqr(g[i] - theta * v[i]);
  res.value = std::sqrt(std::max(theta, 0.0));
  res.residual = theta > 0 ? std::sqrt(rr) / theta : 0.0;
  res.converged = false;
  if (warm) *warm = v;
  return res;
}

// dense symmetric Jacobi eigensolver for the normal matrix; the small-N
// fallback when power iteration cannot separate a clustered top pair
inline double dense_normal_top(const std::vector<std::vector<double>>& M, size_t n) {
  std::vector<double> G(n * n, 0.0);
  for (const auto& Mc : M)
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (size_t k = 0; k < n; ++k) acc += Mc[k * n + i] * Mc[k * n + j];
        G[i * n + j] += acc;
      }
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p + 1 < n; ++p)
      for (size_t q = p + 1; q < n; ++q) {
        double apq = G[p * n + q];
        off = std::max(off, std::abs(apq));
        if (std::abs(apq) < 1e-280) continue;
        double tau = (G[q * n + q] - G[p * n + p]) / (2.0 * apq);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double cs = 1.0 / std::sqrt(1.0 + t * t), sn = cs * t;
        for (size_t k = 0; k < n; ++k) {
          double gkp = G[k * n + p], gkq = G[k * n + q];
          G[k * n + p] = cs * gkp - sn * gkq;
          G[k * n + q] = sn * gkp + cs * gkq;
        }
        for (size_t k = 0; k < n; ++k) {
          double gpk = G[p * n + k], gqk = G[q * n + k];
          G[p * n + k] = cs * gpk - sn * gqk;
          G[q * n + k] = sn * gpk + cs * gqk;
        }
      }
    double scale = 0.0;
    for (size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(G[i * n + i]));
    if (off <= 1e-15 * std::max(scale, 1e-280)) break;
  }
  double top = 0.0;
  for (size_t i = 0; i < n; ++i) top = std::max(top, G[i * n + i]);
  return std::sqrt(std::max(top, 0.0));
}

}  // namespace detail

// L^2(mu) -> L^2(mu; R^d) norm of the assembled matrix.  Power iteration on
// the weighted normal operator; for N <= 64 a dense eigensolve backstops the
// result whenever the iteration cannot certify it (clustered top pairs).
inline OperatorNormResult operator_norm(const RieszOperatorMatrix& A, double tol = 1e-10) {
  auto M = detail::weighted_blocks(A);
  auto res = detail::power_norm(M, A.n, tol);
  if (A.n <= 64) {
    double dense = detail::dense_normal_top(M, A.n);
    if (!res.converged || std::abs(res.value - dense) > 2.0 * tol * std::max(dense, 1e-300)) {
      res.value = dense;
      res.converged = true;
      res.residual = 0.0;
    }
  }
  return res;
}

struct SupNormResult {
  double value = 0.0;        // sup over eps of the per-eps norm
  double argmax_eps = 0.0;   // 0 means "below the smallest pairwise distance"
  size_t breakpoints = 0;
  bool all_converged = true;
};

// sup over eps > 0, evaluated exactly on the finite breakpoint grid of
// pairwise distances (the masked matrix is constant between them).  The
// sweep walks eps upward, zeroing newly excluded pairs and warm-starting the
// power iteration from the previous eigenvector.
inline SupNormResult operator_sup_norm(const DiscreteMeasure& mu, const RieszContext& ctx,
                                       double tol = 1e-6, unsigned threads = 0) {
  for (double w : mu.weights())
    if (!(w > 0.0))
      throw std::invalid_argument("operator_sup_norm: measure must have positive weights");
  size_t n = mu.natoms();
  SupNormResult out;
  if (n < 2) return out;

  struct PairEntry {
    double r;
    uint32_t i, j;
  };
  std::vector<PairEntry> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      pairs.push_back({dist(mu.atom(i), mu.atom(j)), uint32_t(i), uint32_t(j)});
  std::sort(pairs.begin(), pairs.end(),
            [](const PairEntry& a, const PairEntry& b) { return a.r < b.r; });
  // distance groups (relative tolerance absorbs arithmetic noise)
  std::vector<size_t> group_start;
  for (size_t k = 0; k < pairs.size(); ++k)
    if (k == 0 || pairs[k].r > pairs[group_start.back()].r * (1.0 + 1e-12))
      group_start.push_back(k);
  group_start.push_back(pairs.size());
  size_t ngroups = group_start.size() - 1;
  out.breakpoints = ngroups + 1;

  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned T = threads ? std::min(threads, hw) : hw;
  if (ngroups < 8 || n > 4000) T = 1;
  std::vector<double> best_val(T, 0.0), best_eps(T, 0.0);
  std::vector<char> ok(T, 1);

  auto sweep = [&](unsigned t) {
    size_t g_lo = ngroups * t / T, g_hi = ngroups * (t + 1) / T;
    // matrix masked at the chunk's opening eps (just below group g_lo's distance)
    double eps0 = g_lo == 0 ? 0.0 : pairs[group_start[g_lo] - 1].r;
    RieszOperatorMatrix A;
    A.d = mu.dim();
    A.n = n;
    A.s = ctx.s;
    A.weights.assign(mu.weights().begin(), mu.weights().end());
    A.comp.assign(size_t(A.d), std::vector<double>(n * n, 0.0));
    for (size_t k = (g_lo == 0 ? 0 : group_start[g_lo]); k < pairs.size(); ++k) {
      const auto& p = pairs[k];
      auto xi = mu.atom(p.i);
      auto xj = mu.atom(p.j);
      double kker = inv_rpow(p.r, ctx.s + 1.0);
      for (int c = 0; c < A.d; ++c) {
        double v = kker * (xj[size_t(c)] - xi[size_t(c)]);
        A.comp[size_t(c)][size_t(p.i) * n + p.j] = v;
        A.comp[size_t(c)][size_t(p.j) * n + p.i] = -v;
      }
    }
    auto M = detail::weighted_blocks(A);
    std::vector<double> warm;
    auto consider = [&](double val, double eps, bool conv) {
      if (val > best_val[t]) {
        best_val[t] = val;
        best_eps[t] = eps;
      }
      if (!conv) ok[t] = 0;
    };
    auto r0 = detail::power_norm(M, n, tol, &warm);
    consider(r0.value, eps0, r0.converged);
    // Frobenius dominance: a candidate whose mask differs from the last
    // exactly evaluated one by entries of total Frobenius weight dF cannot
    // exceed anchor + dF, so it is skipped when that cannot beat the sup.
    double anchor = r0.value;
    double dF2 = 0.0;
    for (size_t g = g_lo; g < g_hi; ++g) {
      for (size_t k = group_start[g]; k < group_start[g + 1]; ++k) {
        const auto& p = pairs[k];
        for (int c = 0; c < A.d; ++c) {
          double& up = M[size_t(c)][size_t(p.i) * n + p.j];
          double& dn = M[size_t(c)][size_t(p.j) * n + p.i];
          dF2 += up * up + dn * dn;
          up = 0.0;
          dn = 0.0;
        }
      }
      if (group_start[g + 1] == pairs.size()) break;  // empty matrix, norm 0
      if (anchor * (1.0 + 4.0 * tol) + std::sqrt(dF2) <= best_val[t] * (1.0 - 4.0 * tol)) continue;
      auto r = detail::power_norm(M, n, tol, &warm);
      consider(r.value, pairs[group_start[g]].r, r.converged);
      anchor = r.value;
      dF2 = 0.0;
    }
  };

  if (T == 1) {
    sweep(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < T; ++t) pool.emplace_back(sweep, t);
    for (auto& th : pool) th.join();
  }
  for (unsigned t = 0; t < T; ++t) {
    if (best_val[t] > out.value) {
      out.value = best_val[t];
      out.argmax_eps = best_eps[t];
    }
    if (!ok[t]) out.all_converged = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wolff potentials  W(x) = int_0^inf [mu(B(x,r))/r^s]^2 dr/r.
// ---------------------------------------------------------------------------
struct WolffReport {
  std::vector<double> potential;  // per query point (+inf at atoms)
  double sup_support = 0.0;       // S over the support sample
  double energy = 0.0;            // int W dmu (+inf for atomic measures)
  bool atomic = false;
  size_t support_samples = 0;
};

// remaining integral once the whole measure is inside B(x,r)
inline double wolff_tail(double total_mass, double s, double r) {
  return sqr(total_mass) * inv_rpow(r, 2.0 * s) / (2.0 * s);
}

// closed form for atomic measures: mu(B(x,r)) is a step function of r
inline double wolff_potential(const DiscreteMeasure& mu, const RieszContext& ctx,
                              std::span<const double> x) {
  std::vector<std::pair<double, double>> jumps;  // (distance, |w|)
  jumps.reserve(mu.natoms());
  for (size_t j = 0; j < mu.natoms(); ++j) {
    double r = dist(x, mu.atom(j));
    if (r == 0.0) {
      if (mu.weight(j) != 0.0) return kInf;
      continue;
    }
    jumps.emplace_back(r, std::abs(mu.weight(j)));
  }
  std::sort(jumps.begin(), jumps.end());
  double s2 = 2.0 * ctx.s;
  NeumaierSum W;
  double m = 0.0;
  for (size_t k = 0; k < jumps.size(); ++k) {
    m += jumps[k].second;
    double lo = jumps[k].first;
    double hi = (k + 1 < jumps.size()) ? jumps[k + 1].first : kInf;
    double upper = std::isinf(hi) ? 0.0 : inv_rpow(hi, s2);
    W.add(m * m * (inv_rpow(lo, s2) - upper) / s2);
  }
  return W.value();
}

// quadrature form for cube-backed measures, exact between tangency radii
template <class CubeBacked>
double wolff_potential(const CubeBacked& mu, const RieszContext& ctx, std::span<const double> x,
                       double quad_tol = 1e-10) {
  auto brk = mu.wolff_breakpoints(x);
  if (brk.empty()) return 0.0;
  auto f = [&](double r) { return sqr(mu.ball_mass(x, r) * inv_rpow(r, ctx.s)) / r; };
  NeumaierSum W;
  double r0 = brk.front();
  if (mu.ball_mass(x, r0) > 0.0) {
    auto head = integrate_down_to_zero(f, r0, quad_tol);
    W.add(head.value);
  }
  for (size_t k = 0; k + 1 < brk.size(); ++k) W.add(integrate(f, brk[k], brk[k + 1], quad_tol));
  W.add(wolff_tail(mu.total_mass(), ctx.s, brk.back()));
  return W.value();
}

inline WolffReport wolff_report(const DiscreteMeasure& mu, const RieszContext& ctx,
                                const std::vector<std::vector<double>>& queries,
                                double /*quad_tol*/ = 1e-10) {
  for (double w : mu.weights())
    if (w < 0.0) throw std::invalid_argument("wolff_report: measure must be nonnegative");
  WolffReport rep;
  rep.atomic = true;
  for (const auto& q : queries) rep.potential.push_back(wolff_potential(mu, ctx, q));
  // every atom carries an infinite potential, hence S and the energy diverge
  rep.sup_support = kInf;
  rep.energy = kInf;
  rep.support_samples = mu.natoms();
  return rep;
}

template <class CubeBacked>
WolffReport wolff_report(const CubeBacked& mu, const RieszContext& ctx,
                         const std::vector<std::vector<double>>& queries,
                         double quad_tol = 1e-10, size_t support_cap = 512) {
  WolffReport rep;
  for (const auto& q : queries) rep.potential.push_back(wolff_potential(mu, ctx, q, quad_tol));
  auto pts = mu.support_points(support_cap);
  rep.support_samples = pts.size();
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), [&](size_t i) { vals[i] = wolff_potential(mu, ctx, pts[i], quad_tol); });
  for (double v : vals) rep.sup_support = std::max(rep.sup_support, v);

  // energy by per-cube tensor Gauss (the measure's own quadrature)
  const auto& gl = gauss_legendre_8();
  int d = mu.dim();
  size_t nodes_per_axis = d == 1 ? gl.size() : 3;
  static const double g3[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double w3[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  struct Node {
    std::vector<double> x;
    double w;
    size_t cube;
  };
  std::vector<Node> nodes;
  for (size_t i = 0; i < mu.ncubes(); ++i) {
    if (mu.mass(i) == 0.0) continue;
    std::vector<size_t> idx(size_t(d), 0);
    while (true) {
      Node nd;
      nd.cube = i;
      nd.w = 1.0;
      nd.x.resize(size_t(d));
      for (int a = 0; a < d; ++a) {
        double t = d == 1 ? gl[idx[size_t(a)]].first : g3[idx[size_t(a)]];
        double wq = d == 1 ? gl[idx[size_t(a)]].second : w3[idx[size_t(a)]];
        nd.x[size_t(a)] = mu.corner(i)[size_t(a)] + 0.5 * mu.side(i) * (1.0 + t);
        nd.w *= 0.5 * wq;  // reference cell [-1,1] -> weight fraction of the cube
      }
      nodes.push_back(std::move(nd));
      int a = 0;
      for (; a < d; ++a) {
        if (++idx[size_t(a)] < nodes_per_axis) break;
        idx[size_t(a)] = 0;
      }
      if (a == d) break;
    }
  }
  std::vector<double> wvals(nodes.size());
  parallel_for(nodes.size(),
               [&](size_t k) { wvals[k] = wolff_potential(mu, ctx, nodes[k].x, quad_tol); });
  NeumaierSum energy;
  for (size_t k = 0; k < nodes.size(); ++k) energy.add(mu.mass(nodes[k].cube) * nodes[k].w * wvals[k]);
  rep.energy = energy.value();
  return rep;
}

inline WolffReport wolff_report(const CantorMeasure& mu, const RieszContext& ctx,
                                const std::vector<std::vector<double>>& queries,
                                double quad_tol = 1e-10, size_t support_cap = 512) {
  return wolff_report(mu.as_cubes(), ctx, queries, quad_tol, support_cap);
}

// sup of W over the support sample only (skips the energy quadrature)
template <class CubeBacked>
double wolff_sup_support(const CubeBacked& mu, const RieszContext& ctx, double quad_tol = 1e-8,
                         size_t support_cap = 256) {
  auto pts = mu.support_points(support_cap);
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), [&](size_t i) { vals[i] = wolff_potential(mu, ctx, pts[i], quad_tol); });
  double sup = 0.0;
  for (double v : vals) sup = std::max(sup, v);
  return sup;
}

}  // namespace rieszlab
