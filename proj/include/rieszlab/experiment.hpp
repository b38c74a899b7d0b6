#pragma once

#include "rieszlab/capacity.hpp"
#include "rieszlab/mh.hpp"

namespace rieszlab {

// ---------------------------------------------------------------------------
// The randomized corner-Cantor construction behind the content lower bound.
// Scales l_j = h^{-1}(2^{-dj} M) (the deepest one shrunk by 1/5), sparse
// level set J chosen by the rule "least k > j with l_k <= (1/5) 2^{j-k} l_j",
// then a recursive assembly of 2^d randomly shifted blocks per J-level.
// ---------------------------------------------------------------------------
struct RandomCantorRealization {
  int d = 1;
  double s = 0.5;
  double M = 1.0;
  double eta = 1.0;
  int n = 1;
  int m = 1;                      // |J| - 1
  std::vector<double> ell;        // l_0 .. l_n
  std::vector<int> J;             // j_0 = 0 < ... < j_m = n
  std::vector<uint64_t> D;        // D_k = 2^{d (j_{k+1}-j_k-1)}
  std::vector<double> centers;    // base-cube centers, N x d flat
  std::vector<uint32_t> branch;   // N x m: e * D_k + q at each J-level
  std::vector<double> theta;      // theta_{j_k} = eta 2^{-d j_k} / l_{j_k}^s, k < m

  size_t count() const { return branch.empty() ? centers.size() / size_t(d) : branch.size() / size_t(m); }
  std::span<const double> center(size_t i) const { return {centers.data() + i * size_t(d), size_t(d)}; }
  uint32_t branch_at(size_t i, int k) const { return branch[i * size_t(m) + size_t(k)]; }
  uint32_t eps_at(size_t i, int k) const { return branch_at(i, k) / uint32_t(D[size_t(k)]); }

  DiscreteMeasure nu() const {
    size_t N = count();
    return DiscreteMeasure(d, centers, std::vector<double>(N, eta / double(N)));
  }
  DiscreteMeasure mu_atoms() const {
    size_t N = count();
    return DiscreteMeasure(d, centers, std::vector<double>(N, 1.0 / double(N)));
  }
  UniformCubeMeasure mu_cubes() const {
    size_t N = count();
    std::vector<double> corners(centers);
    for (auto& v : corners) v -= 0.5 * ell.back();
    return UniformCubeMeasure(d, std::move(corners), std::vector<double>(N, ell.back()),
                              std::vector<double>(N, 1.0 / double(N)));
  }
};

namespace detail {

struct CantorBuilder {
  const RandomCantorRealization* r;
  RandomCantorRealization* out;
  uint64_t master;
  bool check;

  void build(int k, std::vector<double> center, uint64_t key, std::vector<uint32_t>& prefix) {
    auto& rz = *out;
    int d = rz.d;
    if (k == rz.m) {
      rz.centers.insert(rz.centers.end(), center.begin(), center.end());
      rz.branch.insert(rz.branch.end(), prefix.begin(), prefix.end());
      return;
    }
    double lj = rz.ell[size_t(rz.J[size_t(k)])];
    double lQ = lj / 5.0;
    int rbits = rz.J[size_t(k) + 1] - rz.J[size_t(k)] - 1;
    uint64_t Dk = rz.D[size_t(k)];
    RandomStream rng(master, key);
    std::vector<double> v(size_t(1 << d) * size_t(d));
    for (auto& x : v) x = (rng.next_double() - 0.5) / 10.0;

    std::vector<size_t> copy_begin(size_t(1 << d) + 1);
    for (int e = 0; e < (1 << d); ++e) {
      copy_begin[size_t(e)] = rz.centers.size() / size_t(d);
      std::vector<double> fc(center);
      for (int a = 0; a < d; ++a) {
        double sign = ((e >> a) & 1) ? 1.0 : -1.0;
        fc[size_t(a)] += lQ * (sign + v[size_t(e) * size_t(d) + size_t(a)]);
      }
      for (uint64_t q = 0; q < Dk; ++q) {
        std::vector<double> cc(fc);
        for (int a = 0; a < d; ++a) {
          uint64_t qa = (q >> (a * rbits)) & ((1ull << rbits) - 1);
          cc[size_t(a)] += -0.5 * lQ + (double(qa) + 0.5) * lQ * std::ldexp(1.0, -rbits);
        }
        prefix.push_back(uint32_t(uint64_t(e) * Dk + q));
        build(k + 1, cc, hash_combine(key, uint64_t(e) * Dk + q + 1), prefix);
        prefix.pop_back();
      }
    }
    copy_begin[size_t(1 << d)] = rz.centers.size() / size_t(d);

    if (check) {
      // containment in the level cube and pairwise separation of the copies
      double half = 0.5 * rz.ell.back();
      std::vector<std::array<double, 8>> boxes;  // lo[d], hi[d] per copy
      for (int e = 0; e < (1 << d); ++e) {
        std::array<double, 8> bx{};
        for (int a = 0; a < d; ++a) {
          bx[size_t(a)] = kInf;
          bx[size_t(a) + 4] = -kInf;
        }
        for (size_t i = copy_begin[size_t(e)]; i < copy_begin[size_t(e) + 1]; ++i)
          for (int a = 0; a < d; ++a) {
            double x = rz.centers[i * size_t(d) + size_t(a)];
            bx[size_t(a)] = std::min(bx[size_t(a)], x - half);
            bx[size_t(a) + 4] = std::max(bx[size_t(a) + 4], x + half);
          }
        boxes.push_back(bx);
      }
      double tol = 1e-9 * lj;
      for (int e = 0; e < (1 << d); ++e)
        for (int a = 0; a < d; ++a) {
          if (boxes[size_t(e)][size_t(a)] < center[size_t(a)] - 0.5 * lj - tol ||
              boxes[size_t(e)][size_t(a) + 4] > center[size_t(a)] + 0.5 * lj + tol)
            throw std::runtime_error("random_cantor_build: containment violated");
        }
      for (int e = 0; e < (1 << d); ++e)
        for (int f = e + 1; f < (1 << d); ++f) {
          double gap = -kInf;
          for (int a = 0; a < d; ++a) {
            double g = std::max(boxes[size_t(f)][size_t(a)] - boxes[size_t(e)][size_t(a) + 4],
                                boxes[size_t(e)][size_t(a)] - boxes[size_t(f)][size_t(a) + 4]);
            gap = std::max(gap, g);
          }
          if (gap < lj / 10.0 - tol)
            throw std::runtime_error("random_cantor_build: separation violated");
        }
    }
  }
};

}  // namespace detail

inline RandomCantorRealization random_cantor_build(const GaugeFunction& h,
                                                   const RieszContext& ctx, double M, int n,
                                                   double eta, uint64_t seed,
                                                   bool check_invariants = true) {
  if (n < 1) throw std::invalid_argument("random_cantor_build: n must be >= 1");
  if (!(M > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("random_cantor_build: M and eta must be positive");
  int d = ctx.d;
  if (n * d > 24) throw std::invalid_argument("random_cantor_build: 2^{nd} too large");

  RandomCantorRealization rz;
  rz.d = d;
  rz.s = ctx.s;
  rz.M = M;
  rz.eta = eta;
  rz.n = n;
  rz.ell.resize(size_t(n) + 1);
  for (int j = 0; j < n; ++j) rz.ell[size_t(j)] = h.inverse(std::ldexp(M, -d * j));
  rz.ell[size_t(n)] = h.inverse(std::ldexp(M, -d * n)) / 5.0;

  rz.J = {0};
  while (rz.J.back() < n) {
    int j = rz.J.back();
    int next = -1;
    for (int k = j + 1; k <= n; ++k)
      if (rz.ell[size_t(k)] <= 0.2 * std::ldexp(rz.ell[size_t(j)], j - k)) {
        next = k;
        break;
      }
    if (next < 0)
      throw std::runtime_error(
          "random_cantor_build: J rule failed to advance (gauge too close to t^d at these scales)");
    rz.J.push_back(next);
  }
  rz.m = int(rz.J.size()) - 1;
  rz.D.resize(size_t(rz.m));
  rz.theta.resize(size_t(rz.m));
  for (int k = 0; k < rz.m; ++k) {
    rz.D[size_t(k)] = 1ull << (d * (rz.J[size_t(k) + 1] - rz.J[size_t(k)] - 1));
    rz.theta[size_t(k)] =
        eta * std::ldexp(1.0, -d * rz.J[size_t(k)]) / std::pow(rz.ell[size_t(rz.J[size_t(k)])], ctx.s);
  }

  size_t N = size_t(1) << (size_t(n) * size_t(d));
  rz.centers.reserve(N * size_t(d));
  rz.branch.reserve(N * size_t(rz.m));
  detail::CantorBuilder builder{nullptr, &rz, hash_combine(seed, 0x52435242ull), check_invariants};
  std::vector<uint32_t> prefix;
  builder.build(0, std::vector<double>(size_t(d), 0.0), 1, prefix);
  if (rz.count() != N) throw std::logic_error("random_cantor_build: count mismatch");
  return rz;
}

// R_nu at a base-cube center, excluding the center's own atom.
inline VectorValue transform_at_center(const RandomCantorRealization& rz, size_t i) {
  int d = rz.d;
  size_t N = rz.count();
  double w = rz.eta / double(N);
  auto x = rz.center(i);
  std::vector<NeumaierSum> acc(static_cast<size_t>(d));
  RieszContext ctx{rz.s, d};
  for (size_t j = 0; j < N; ++j) {
    if (j == i) continue;
    auto y = rz.center(j);
    double r = dist(x, y);
    double k = w * inv_rpow(r, ctx.s + 1.0);
    for (int a = 0; a < d; ++a) acc[size_t(a)].add(k * (y[size_t(a)] - x[size_t(a)]));
  }
  return detail::finish_vector(acc);
}

// xi_k: the potential at center i of the nu-mass carried by the copy of F_k
// opposite (in every coordinate) to the one containing i.
inline VectorValue opposite_block_potential(const RandomCantorRealization& rz, size_t i, int k) {
  int d = rz.d;
  size_t N = rz.count();
  double w = rz.eta / double(N);
  auto x = rz.center(i);
  uint32_t opp = (rz.eps_at(i, k) ^ ((1u << d) - 1));
  std::vector<NeumaierSum> acc(static_cast<size_t>(d));
  for (size_t j = 0; j < N; ++j) {
    bool same_prefix = true;
    for (int l = 0; l < k && same_prefix; ++l)
      same_prefix = rz.branch_at(j, l) == rz.branch_at(i, l);
    if (!same_prefix || rz.eps_at(j, k) != opp) continue;
    auto y = rz.center(j);
    double r = dist(x, y);
    double kk = w * inv_rpow(r, rz.s + 1.0);
    for (int a = 0; a < d; ++a) acc[size_t(a)].add(kk * (y[size_t(a)] - x[size_t(a)]));
  }
  return detail::finish_vector(acc);
}

// ---------------------------------------------------------------------------
// Cartan lower-bound experiment (Monte Carlo over realizations).
// ---------------------------------------------------------------------------
struct CartanLowerConfig {
  GaugeFunction h;
  double s = 0.5;
  int d = 1;
  double M = 1.0;
  int n = 6;
  double eta = 1.0;
  int trials = 4096;
  uint64_t seed = 1;
  int delta_grid = 256;
  int content_depth = 10;
  unsigned threads = 0;
};

struct LevelStat {
  int level_j = 0;
  double theta = 0.0;
  double max_abs_xi = 0.0;
  double var_xi = 0.0;
};

struct CartanLowerResult {
  double delta_star = 0.0;
  double content_lower = 0.0;
  double threshold_scale = 0.0;  // sqrt(sum_k theta_{j_k}^2)
  int m = 0;
  std::vector<LevelStat> level_stats;
  std::vector<double> median_fraction;  // per delta grid point
};

inline CartanLowerResult cartan_lower_experiment(const CartanLowerConfig& cfg) {
  if (cfg.trials < 8) throw std::invalid_argument("cartan_lower_experiment: too few trials");
  RieszContext ctx{cfg.s, cfg.d};
  auto probe = random_cantor_build(cfg.h, ctx, cfg.M, cfg.n, cfg.eta, cfg.seed, true);
  const int m = probe.m;
  const size_t N = probe.count();
  double S2 = 0.0;
  for (double t : probe.theta) S2 += t * t;
  const double S = std::sqrt(S2);
  const int G = cfg.delta_grid;

  std::vector<std::vector<double>> fracs(size_t(cfg.trials), std::vector<double>(size_t(G), 0.0));
  std::vector<std::vector<double>> xi_abs(size_t(cfg.trials), std::vector<double>(size_t(m), 0.0));
  std::vector<std::vector<double>> xi_comp(size_t(cfg.trials),
                                           std::vector<double>(size_t(m) * size_t(cfg.d), 0.0));
  std::vector<char> failed(size_t(cfg.trials), 0);

  parallel_for(size_t(cfg.trials), [&](size_t t) {
    try {
      auto rz = random_cantor_build(cfg.h, ctx, cfg.M, cfg.n, cfg.eta,
                                    hash_combine(cfg.seed, t + 1), false);
      std::vector<int> over(size_t(G), 0);
      for (size_t i = 0; i < N; ++i) {
        double v = transform_at_center(rz, i).magnitude;
        int g = std::min<int>(G, int(std::floor(v / (S / double(G)))));
        for (int u = 0; u < g; ++u) over[size_t(u)] += 1;  // exceeds delta = (u+1)/G
      }
      for (int u = 0; u < G; ++u) fracs[t][size_t(u)] = double(over[size_t(u)]) / double(N);
      for (int k = 0; k < m; ++k) {
        auto xi = opposite_block_potential(rz, 0, k);
        xi_abs[t][size_t(k)] = xi.magnitude;
        for (int a = 0; a < cfg.d; ++a)
          xi_comp[t][size_t(k) * size_t(cfg.d) + size_t(a)] = xi.components[size_t(a)];
      }
    } catch (...) {
      failed[t] = 1;
    }
  }, cfg.threads);
  for (char f : failed)
    if (f) throw std::runtime_error("cartan_lower_experiment: trial failed");

  CartanLowerResult out;
  out.m = m;
  out.threshold_scale = S;
  out.median_fraction.resize(size_t(G));
  std::vector<double> buf(size_t(cfg.trials));
  for (int u = 0; u < G; ++u) {
    for (int t = 0; t < cfg.trials; ++t) buf[size_t(t)] = fracs[size_t(t)][size_t(u)];
    std::nth_element(buf.begin(), buf.begin() + cfg.trials / 2, buf.end());
    out.median_fraction[size_t(u)] = buf[size_t(cfg.trials) / 2];
  }
  for (int u = G - 1; u >= 0; --u) {
    double delta = double(u + 1) / double(G);
    if (out.median_fraction[size_t(u)] >= delta) {
      out.delta_star = delta;
      break;
    }
  }

  // per-level bound/variance statistics of the opposite-block potentials
  for (int k = 0; k < m; ++k) {
    LevelStat st;
    st.level_j = probe.J[size_t(k)];
    st.theta = probe.theta[size_t(k)];
    double e2 = 0.0;
    std::vector<double> mean(size_t(cfg.d), 0.0);
    for (int t = 0; t < cfg.trials; ++t) {
      st.max_abs_xi = std::max(st.max_abs_xi, xi_abs[size_t(t)][size_t(k)]);
      e2 += sqr(xi_abs[size_t(t)][size_t(k)]);
      for (int a = 0; a < cfg.d; ++a)
        mean[size_t(a)] += xi_comp[size_t(t)][size_t(k) * size_t(cfg.d) + size_t(a)];
    }
    e2 /= double(cfg.trials);
    double m2 = 0.0;
    for (int a = 0; a < cfg.d; ++a) m2 += sqr(mean[size_t(a)] / double(cfg.trials));
    st.var_xi = e2 - m2;
    out.level_stats.push_back(st);
  }

  // content of the selected center set for the median trial at delta_star
  if (out.delta_star > 0.0) {
    int star = std::max(0, int(std::lround(out.delta_star * G)) - 1);
    std::vector<std::pair<double, int>> order(size_t(cfg.trials));
    for (int t = 0; t < cfg.trials; ++t) order[size_t(t)] = {fracs[size_t(t)][size_t(star)], t};
    std::nth_element(order.begin(), order.begin() + cfg.trials / 2, order.end());
    int tmed = order[size_t(cfg.trials) / 2].second;
    auto rz = random_cantor_build(cfg.h, ctx, cfg.M, cfg.n, cfg.eta,
                                  hash_combine(cfg.seed, uint64_t(tmed) + 1), false);
    DyadicCellSet cells;
    cells.root.corner.assign(size_t(cfg.d), -0.75 * rz.ell[0]);
    cells.root.side = 1.5 * rz.ell[0];
    cells.depth = std::min(cfg.content_depth, dyadic::bits_per_axis(cfg.d));
    double cs = cells.cell_side();
    int bits = dyadic::bits_per_axis(cfg.d);
    for (size_t i = 0; i < N; ++i) {
      if (transform_at_center(rz, i).magnitude < out.delta_star * S) continue;
      uint64_t code = 0;
      bool ok = true;
      for (int a = 0; a < cfg.d; ++a) {
        double u = (rz.center(i)[size_t(a)] - cells.root.corner[size_t(a)]) / cs;
        int64_t q = int64_t(std::floor(u));
        if (q < 0 || q >= (int64_t(1) << cells.depth)) {
          ok = false;
          break;
        }
        code |= uint64_t(q) << (bits * a);
      }
      if (ok) cells.cells.push_back(code);
    }
    dyadic::normalize(cells);
    if (!cells.empty()) out.content_lower = frostman_measure(cells, cfg.h).mass;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cartan upper-bound records: content of the discretized superlevel set
// against the critical scale, plus the s >= d variant.
// ---------------------------------------------------------------------------
struct CartanUpperRecord {
  double content_upper = 0.0;
  double denominator = 0.0;  // M_h(kappa, N) or N h((||nu||/PN)^{1/s})
  double ratio = 0.0;
  double P = 0.0;
  size_t N = 0;
  bool boundary_flag = false;  // superlevel set reached the window edge
  int window_retries = 0;
};

inline Cube auto_window(const DiscreteMeasure& nu, const RieszContext& ctx, double P,
                        double inflate = 1.0) {
  auto lo = nu.bounding_box_corner();
  auto hi = nu.bounding_box_far();
  double R = std::pow(nu.total_variation() / P, 1.0 / ctx.s) * inflate;
  double side = 0.0;
  for (int a = 0; a < ctx.d; ++a) side = std::max(side, hi[size_t(a)] - lo[size_t(a)] + 2.2 * R);
  Cube w;
  w.corner.resize(size_t(ctx.d));
  for (int a = 0; a < ctx.d; ++a)
    w.corner[size_t(a)] = 0.5 * (lo[size_t(a)] + hi[size_t(a)]) - 0.5 * side;
  w.side = side;
  return w;
}

inline CartanUpperRecord cartan_upper_record(const DiscreteMeasure& nu, const RieszContext& ctx,
                                             const GaugeFunction& h, double P, int depth,
                                             double mh_denominator) {
  CartanUpperRecord rec;
  rec.P = P;
  rec.N = nu.natoms();
  rec.denominator = mh_denominator;
  double inflate = 1.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Cube w = auto_window(nu, ctx, P, inflate);
    auto cells = superlevel_cells(nu, ctx, P, w, depth, SuperlevelMode::maximal);
    rec.boundary_flag = dyadic::touches_boundary(cells);
    rec.content_upper = covering_upper_bound(cells, h);
    if (!rec.boundary_flag) break;
    inflate *= 2.0;
    rec.window_retries = attempt + 1;
  }
  rec.ratio = rec.denominator > 0.0 ? rec.content_upper / rec.denominator : 0.0;
  return rec;
}

inline CartanUpperRecord large_s_record(const DiscreteMeasure& nu, const RieszContext& ctx,
                                        const GaugeFunction& h, double P, int depth) {
  if (!(ctx.s >= double(ctx.d))) throw std::invalid_argument("large_s_record: needs s >= d");
  double N = double(nu.natoms());
  double denom = N * h(std::pow(nu.total_variation() / (P * N), 1.0 / ctx.s));
  return cartan_upper_record(nu, ctx, h, P, depth, denom);
}

// test-family generators (deterministic in the seed)
inline DiscreteMeasure uniform_random_atoms(int d, size_t N, uint64_t seed, bool signed_weights) {
  RandomStream rng(seed, 0xa70a);
  std::vector<double> flat(N * size_t(d)), ws(N);
  for (auto& x : flat) x = rng.uniform(-1.0, 1.0);
  for (auto& w : ws) {
    w = rng.uniform(0.2, 1.0);
    if (signed_weights && rng.next_double() < 0.5) w = -w;
  }
  return DiscreteMeasure(d, std::move(flat), std::move(ws));
}

inline DiscreteMeasure clustered_atoms(int d, size_t N, uint64_t seed, bool signed_weights) {
  RandomStream rng(seed, 0xc1);
  size_t nclust = std::max<size_t>(2, N / 8);
  std::vector<double> cx(nclust * size_t(d));
  for (auto& x : cx) x = rng.uniform(-1.0, 1.0);
  std::vector<double> flat(N * size_t(d)), ws(N);
  for (size_t i = 0; i < N; ++i) {
    size_t c = rng.next_below(nclust);
    for (int a = 0; a < d; ++a)
      flat[i * size_t(d) + size_t(a)] = cx[c * size_t(d) + size_t(a)] + rng.uniform(-0.02, 0.02);
    ws[i] = rng.uniform(0.2, 1.0);
    if (signed_weights && rng.next_double() < 0.5) ws[i] = -ws[i];
  }
  return DiscreteMeasure(d, std::move(flat), std::move(ws));
}

}  // namespace rieszlab
