#pragma once

#include "rieszlab/dyadic.hpp"
#include "rieszlab/gauge.hpp"

namespace rieszlab {

// ---------------------------------------------------------------------------
// Exact cube/ball intersection volume (d = 1, 2 closed form; d >= 3 by
// recursive subdivision).  Ball is open; the boundary sphere has measure zero
// so closed-form answers apply unchanged.
// ---------------------------------------------------------------------------
namespace geom {

inline double dist_min_sq(std::span<const double> x, std::span<const double> corner, double side) {
  double s = 0.0;
  for (size_t a = 0; a < x.size(); ++a) {
    double lo = corner[a], hi = corner[a] + side;
    double g = std::max({0.0, lo - x[a], x[a] - hi});
    s += g * g;
  }
  return s;
}

inline double dist_max_sq(std::span<const double> x, std::span<const double> corner, double side) {
  double s = 0.0;
  for (size_t a = 0; a < x.size(); ++a) {
    double lo = corner[a], hi = corner[a] + side;
    s += std::max(sqr(x[a] - lo), sqr(hi - x[a]));
  }
  return s;
}

// area of {X^2+Y^2 < r^2} cap {x0<X<x1, y0<Y<y1}, circle centered at origin
inline double disk_rect_area(double r, double x0, double x1, double y0, double y1) {
  if (r <= 0.0) return 0.0;
  x0 = std::max(x0, -r);
  x1 = std::min(x1, r);
  if (x0 >= x1) return 0.0;
  auto g = [&](double x) { return std::sqrt(std::max(0.0, r * r - x * x)); };
  // antiderivative of g
  auto G = [&](double x) {
    double t = std::clamp(x / r, -1.0, 1.0);
    return 0.5 * (x * g(x) + r * r * std::asin(t));
  };
  std::vector<double> brk = {x0, x1};
  for (double y : {y0, y1}) {
    if (std::abs(y) < r) {
      double xc = std::sqrt(r * r - y * y);
      if (xc > x0 && xc < x1) brk.push_back(xc);
      if (-xc > x0 && -xc < x1) brk.push_back(-xc);
    }
  }
  std::sort(brk.begin(), brk.end());
  double area = 0.0;
  for (size_t i = 0; i + 1 < brk.size(); ++i) {
    double a = brk[i], b = brk[i + 1];
    if (!(b > a)) continue;
    double xm = 0.5 * (a + b), gm = g(xm);
    bool top_circ = y1 > gm;   // top edge clipped by the circle
    bool bot_circ = y0 < -gm;  // bottom edge clipped
    double mid_len = std::min(y1, gm) - std::max(y0, -gm);
    if (mid_len <= 0.0) continue;
    double piece = 0.0;
    piece += top_circ ? (G(b) - G(a)) : y1 * (b - a);
    piece -= bot_circ ? -(G(b) - G(a)) : y0 * (b - a);
    area += piece;
  }
  return std::max(0.0, area);
}

inline double ball_cube_volume(std::span<const double> x, double r,
                               std::span<const double> corner, double side);

inline double ball_cube_volume_subdiv(std::span<const double> x, double r,
                                      std::span<const double> corner, double side, int depth) {
  if (dist_min_sq(x, corner, side) >= r * r) return 0.0;
  double vol = std::pow(side, double(x.size()));
  if (dist_max_sq(x, corner, side) <= r * r) return vol;
  if (depth <= 0) {
    // center test; error bounded by the shell the cube straddles
    return dist(x, corner) < r ? 0.5 * vol : 0.5 * vol;
  }
  int d = int(x.size());
  std::vector<double> child(corner.begin(), corner.end());
  double acc = 0.0;
  for (int e = 0; e < (1 << d); ++e) {
    for (int a = 0; a < d; ++a) child[a] = corner[a] + ((e >> a) & 1) * 0.5 * side;
    acc += ball_cube_volume_subdiv(x, r, child, 0.5 * side, depth - 1);
  }
  return acc;
}

inline double ball_cube_volume(std::span<const double> x, double r,
                               std::span<const double> corner, double side) {
  int d = int(x.size());
  if (dist_min_sq(x, corner, side) >= r * r) return 0.0;
  if (dist_max_sq(x, corner, side) <= r * r) return std::pow(side, double(d));
  if (d == 1) {
    // cancellation-free overlap of (x-r, x+r) with [lo, hi]
    double right = std::min(corner[0] + side - x[0], r);
    double left = std::min(x[0] - corner[0], r);
    return std::max(0.0, right + left);
  }
  if (d == 2)
    return disk_rect_area(r, corner[0] - x[0], corner[0] + side - x[0], corner[1] - x[1],
                          corner[1] + side - x[1]);
  return ball_cube_volume_subdiv(x, r, corner, side, 14);
}

}  // namespace geom

// ---------------------------------------------------------------------------
// Finite signed combination of point masses.  Coincident atoms are merged on
// construction (tolerance 1e-12 of the configuration scale) to keep kernel
// evaluations away from the singularity.
// ---------------------------------------------------------------------------
class DiscreteMeasure {
 public:
  DiscreteMeasure(int d, std::vector<double> flat_coords, std::vector<double> weights)
      : d_(d) {
    if (d < 1) throw std::invalid_argument("measure: dimension must be positive");
    size_t n = weights.size();
    if (flat_coords.size() != n * size_t(d))
      throw std::invalid_argument("measure: coordinate/weight size mismatch");
    merge_atoms(std::move(flat_coords), std::move(weights));
    tv_ = 0.0;
    for (double w : ws_) tv_ += std::abs(w);
  }

  static DiscreteMeasure from_points(const std::vector<std::vector<double>>& pts,
                                     const std::vector<double>& ws) {
    if (pts.empty()) throw std::invalid_argument("measure: empty atom list");
    int d = int(pts.front().size());
    std::vector<double> flat;
    flat.reserve(pts.size() * size_t(d));
    for (const auto& p : pts) {
      if (int(p.size()) != d) throw std::invalid_argument("measure: inconsistent dimensions");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return DiscreteMeasure(d, std::move(flat), ws);
  }

  int dim() const { return d_; }
  size_t natoms() const { return ws_.size(); }
  std::span<const double> atom(size_t i) const { return {xs_.data() + i * size_t(d_), size_t(d_)}; }
  double weight(size_t i) const { return ws_[i]; }
  std::span<const double> coords() const { return xs_; }
  std::span<const double> weights() const { return ws_; }
  double total_variation() const { return tv_; }

  // variation measure of the open ball B(x,r)
  double ball_mass(std::span<const double> x, double r) const {
    if (!(r >= 0.0)) throw std::invalid_argument("ball_mass: radius must be nonnegative");
    NeumaierSum s;
    for (size_t i = 0; i < natoms(); ++i)
      if (dist(x, atom(i)) < r) s.add(std::abs(ws_[i]));
    return s.value();
  }

  std::vector<double> bounding_box_corner() const {
    std::vector<double> lo(atom(0).begin(), atom(0).end());
    for (size_t i = 1; i < natoms(); ++i)
      for (int a = 0; a < d_; ++a) lo[a] = std::min(lo[a], atom(i)[a]);
    return lo;
  }
  std::vector<double> bounding_box_far() const {
    std::vector<double> hi(atom(0).begin(), atom(0).end());
    for (size_t i = 1; i < natoms(); ++i)
      for (int a = 0; a < d_; ++a) hi[a] = std::max(hi[a], atom(i)[a]);
    return hi;
  }

 private:
  void merge_atoms(std::vector<double> flat, std::vector<double> ws) {
    size_t n = ws.size();
    if (n == 0) throw std::invalid_argument("measure: empty atom list");
    // configuration scale for the merge tolerance
    double scale = 0.0;
    for (int a = 0; a < d_; ++a) {
      double lo = flat[size_t(a)], hi = flat[size_t(a)];
      for (size_t i = 0; i < n; ++i) {
        lo = std::min(lo, flat[i * size_t(d_) + size_t(a)]);
        hi = std::max(hi, flat[i * size_t(d_) + size_t(a)]);
      }
      scale = std::max(scale, hi - lo);
    }
    double tol = 1e-12 * scale;
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
      for (int a = 0; a < d_; ++a) {
        double xi = flat[i * size_t(d_) + size_t(a)], xj = flat[j * size_t(d_) + size_t(a)];
        if (xi != xj) return xi < xj;
      }
      return i < j;
    });
    auto same = [&](size_t i, size_t j) {
      for (int a = 0; a < d_; ++a)
        if (std::abs(flat[i * size_t(d_) + size_t(a)] - flat[j * size_t(d_) + size_t(a)]) > tol)
          return false;
      return true;
    };
    for (size_t k = 0; k < n;) {
      size_t rep = order[k];
      double w = ws[rep];
      size_t j = k + 1;
      while (j < n && same(order[j], rep)) w += ws[order[j++]];
      if (w != 0.0) {
        for (int a = 0; a < d_; ++a) xs_.push_back(flat[rep * size_t(d_) + size_t(a)]);
        ws_.push_back(w);
      }
      k = j;
    }
    if (ws_.empty()) {  // everything cancelled; keep a single null atom location
      for (int a = 0; a < d_; ++a) xs_.push_back(flat[size_t(a)]);
      ws_.push_back(0.0);
    }
  }

  int d_;
  std::vector<double> xs_;
  std::vector<double> ws_;
  double tv_ = 0.0;
};

// ---------------------------------------------------------------------------
// Finitely many disjoint cubes carrying uniform mass.  The smooth substitute
// for atomic measures in Wolff/energy computations.
// ---------------------------------------------------------------------------
class UniformCubeMeasure {
 public:
  UniformCubeMeasure(int d, std::vector<double> corners_flat, std::vector<double> sides,
                     std::vector<double> masses)
      : d_(d), corners_(std::move(corners_flat)), sides_(std::move(sides)), masses_(std::move(masses)) {
    if (d_ < 1) throw std::invalid_argument("measure: dimension must be positive");
    if (corners_.size() != masses_.size() * size_t(d_) || sides_.size() != masses_.size())
      throw std::invalid_argument("measure: cube array size mismatch");
    total_ = 0.0;
    for (double m : masses_) {
      if (!(m >= 0.0)) throw std::invalid_argument("measure: cube masses must be nonnegative");
      total_ += m;
    }
  }

  int dim() const { return d_; }
  size_t ncubes() const { return masses_.size(); }
  std::span<const double> corner(size_t i) const { return {corners_.data() + i * size_t(d_), size_t(d_)}; }
  double side(size_t i) const { return sides_[i]; }
  double mass(size_t i) const { return masses_[i]; }
  double total_mass() const { return total_; }

  std::vector<double> center(size_t i) const {
    std::vector<double> c(corner(i).begin(), corner(i).end());
    for (auto& v : c) v += 0.5 * sides_[i];
    return c;
  }

  double ball_mass(std::span<const double> x, double r) const {
    NeumaierSum s;
    for (size_t i = 0; i < ncubes(); ++i) {
      double v = geom::ball_cube_volume(x, r, corner(i), sides_[i]);
      if (v > 0.0) s.add(masses_[i] * v / std::pow(sides_[i], double(d_)));
    }
    return s.value();
  }

  // radii at which r -> ball_mass(x, r) loses smoothness: distances to cube
  // corners plus per-axis face-plane distances
  std::vector<double> wolff_breakpoints(std::span<const double> x) const {
    std::vector<double> out;
    std::vector<double> v(static_cast<size_t>(d_));
    for (size_t i = 0; i < ncubes(); ++i) {
      auto c = corner(i);
      for (int e = 0; e < (1 << d_); ++e) {
        for (int a = 0; a < d_; ++a) v[size_t(a)] = c[size_t(a)] + ((e >> a) & 1) * sides_[i];
        out.push_back(dist(x, v));
      }
      for (int a = 0; a < d_; ++a) {
        out.push_back(std::abs(x[size_t(a)] - c[size_t(a)]));
        out.push_back(std::abs(x[size_t(a)] - (c[size_t(a)] + sides_[i])));
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    while (!out.empty() && out.front() <= 0.0) out.erase(out.begin());
    return out;
  }

  // corners and centers, deterministically subsampled to at most max_count
  std::vector<std::vector<double>> support_points(size_t max_count = 1024) const {
    std::vector<std::vector<double>> pts;
    std::vector<double> v(static_cast<size_t>(d_));
    size_t per_cube = size_t(1 << d_) + 1;
    size_t stride = std::max<size_t>(1, (ncubes() * per_cube + max_count - 1) / max_count);
    size_t k = 0;
    for (size_t i = 0; i < ncubes(); ++i) {
      auto c = corner(i);
      for (int e = 0; e < (1 << d_); ++e, ++k) {
        if (k % stride) continue;
        for (int a = 0; a < d_; ++a) v[size_t(a)] = c[size_t(a)] + ((e >> a) & 1) * sides_[i];
        pts.push_back(v);
      }
      if (k++ % stride == 0) pts.push_back(center(i));
    }
    if (pts.empty()) pts.push_back(center(0));
    return pts;
  }

  // one atom of the cube's mass per subcell center; q subdivisions per axis
  DiscreteMeasure atomize(int q = 1) const {
    std::vector<double> flat, ws;
    std::vector<int> idx(static_cast<size_t>(d_));
    for (size_t i = 0; i < ncubes(); ++i) {
      auto c = corner(i);
      double sub = sides_[i] / q;
      double w = masses_[i] / std::pow(double(q), double(d_));
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        for (int a = 0; a < d_; ++a) flat.push_back(c[size_t(a)] + (idx[size_t(a)] + 0.5) * sub);
        ws.push_back(w);
        int a = 0;
        for (; a < d_; ++a) {
          if (++idx[size_t(a)] < q) break;
          idx[size_t(a)] = 0;
        }
        if (a == d_) break;
      }
    }
    return DiscreteMeasure(d_, std::move(flat), std::move(ws));
  }

  UniformCubeMeasure dilated(double lambda) const {
    std::vector<double> c(corners_), s(sides_);
    for (auto& v : c) v *= lambda;
    for (auto& v : s) v *= lambda;
    return UniformCubeMeasure(d_, std::move(c), std::move(s), masses_);
  }

  UniformCubeMeasure scaled_mass(double c) const {
    std::vector<double> m(masses_);
    for (auto& v : m) v *= c;
    return UniformCubeMeasure(d_, corners_, sides_, std::move(m));
  }

  std::vector<double> bounding_box_corner() const {
    std::vector<double> lo(corner(0).begin(), corner(0).end());
    for (size_t i = 0; i < ncubes(); ++i)
      for (int a = 0; a < d_; ++a) lo[size_t(a)] = std::min(lo[size_t(a)], corner(i)[size_t(a)]);
    return lo;
  }
  std::vector<double> bounding_box_far() const {
    std::vector<double> hi(corner(0).begin(), corner(0).end());
    for (size_t i = 0; i < ncubes(); ++i)
      for (int a = 0; a < d_; ++a)
        hi[size_t(a)] = std::max(hi[size_t(a)], corner(i)[size_t(a)] + sides_[i]);
    return hi;
  }

 private:
  int d_;
  std::vector<double> corners_;
  std::vector<double> sides_;
  std::vector<double> masses_;
  double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Corner-construction Cantor set with the uniform measure.
// ---------------------------------------------------------------------------
struct CantorSpec {
  int d = 1;
  std::vector<double> ell;  // edge lengths l_0 ... l_n
  double lambda = 0.4;

  int levels() const { return int(ell.size()) - 1; }
  void validate() const {
    if (d < 1) throw std::invalid_argument("cantor: dimension must be positive");
    if (ell.empty()) throw std::invalid_argument("cantor: need at least l_0");
    if (!(lambda > 0.0 && lambda < 0.5)) throw std::invalid_argument("cantor: lambda in (0, 1/2)");
    for (size_t k = 0; k + 1 < ell.size(); ++k)
      if (!(ell[k + 1] > 0.0 && ell[k + 1] < lambda * ell[k]))
        throw std::invalid_argument("cantor: need 0 < l_{k+1} < lambda l_k");
    if (!(ell[0] > 0.0)) throw std::invalid_argument("cantor: l_0 must be positive");
    if (levels() * d > 26) throw std::invalid_argument("cantor: 2^{nd} too large");
  }
};

class CantorMeasure {
 public:
  CantorMeasure(CantorSpec spec, double s) : spec_(std::move(spec)), s_(s) {
    spec_.validate();
    if (!(s > 0.0)) throw std::invalid_argument("cantor: s must be positive");
    n_ = spec_.levels();
    int d = spec_.d;
    base_mass_ = std::ldexp(1.0, -n_ * d);
    theta_.resize(size_t(n_) + 1);
    for (int k = 0; k <= n_; ++k)
      theta_[size_t(k)] = std::ldexp(1.0, -k * d) / std::pow(spec_.ell[size_t(k)], s);
    // base corners in lexicographic bit order, level-major
    corners_.assign(size_t(d), 0.0);
    for (int k = 0; k < n_; ++k) {
      double off = spec_.ell[size_t(k)] - spec_.ell[size_t(k) + 1];
      size_t cnt = corners_.size() / size_t(d);
      std::vector<double> next;
      next.reserve(corners_.size() << d);
      for (size_t i = 0; i < cnt; ++i)
        for (int e = 0; e < (1 << d); ++e)
          for (int a = 0; a < d; ++a)
            next.push_back(corners_[i * size_t(d) + size_t(a)] + ((e >> a) & 1) * off);
      corners_ = std::move(next);
    }
  }

  int dim() const { return spec_.d; }
  int levels() const { return n_; }
  double s() const { return s_; }
  const CantorSpec& spec() const { return spec_; }
  std::span<const double> theta() const { return theta_; }
  double total_mass() const { return 1.0; }
  size_t base_count() const { return corners_.size() / size_t(spec_.d); }
  double base_side() const { return spec_.ell.back(); }
  double base_mass() const { return base_mass_; }
  std::span<const double> base_corner(size_t i) const {
    return {corners_.data() + i * size_t(spec_.d), size_t(spec_.d)};
  }
  std::vector<double> base_center(size_t i) const {
    std::vector<double> c(base_corner(i).begin(), base_corner(i).end());
    for (auto& v : c) v += 0.5 * base_side();
    return c;
  }

  // mass of the open ball, exact via recursive cube/ball intersection
  double ball_mass(std::span<const double> x, double r) const {
    if (!(r >= 0.0)) throw std::invalid_argument("ball_mass: radius must be nonnegative");
    if (r == 0.0) return 0.0;
    std::vector<double> root(size_t(spec_.d), 0.0);
    return descend(x, r, 0, root);
  }

  std::vector<double> wolff_breakpoints(std::span<const double> x) const {
    return as_cubes().wolff_breakpoints(x);
  }
  std::vector<std::vector<double>> support_points(size_t max_count = 1024) const {
    return as_cubes().support_points(max_count);
  }

  UniformCubeMeasure as_cubes() const {
    std::vector<double> sides(base_count(), base_side());
    std::vector<double> masses(base_count(), base_mass_);
    return UniformCubeMeasure(spec_.d, corners_, std::move(sides), std::move(masses));
  }

  // point-mass surrogate: one atom of mass 2^{-nd} per base-cube center
  DiscreteMeasure atomize() const {
    std::vector<double> flat(corners_);
    for (auto& v : flat) v += 0.5 * base_side();
    return DiscreteMeasure(spec_.d, std::move(flat),
                           std::vector<double>(base_count(), base_mass_));
  }

 private:
  double descend(std::span<const double> x, double r, int k, std::vector<double>& corner) const {
    int d = spec_.d;
    double side = spec_.ell[size_t(k)];
    double r2 = r * r;
    if (geom::dist_min_sq(x, corner, side) >= r2) return 0.0;
    if (geom::dist_max_sq(x, corner, side) <= r2) return std::ldexp(1.0, -k * d);
    if (k == n_) {
      double frac = geom::ball_cube_volume(x, r, corner, side) / std::pow(side, double(d));
      return base_mass_ * frac;
    }
    double off = side - spec_.ell[size_t(k) + 1];
    double acc = 0.0;
    std::vector<double> child(static_cast<size_t>(d));
    for (int e = 0; e < (1 << d); ++e) {
      for (int a = 0; a < d; ++a) child[size_t(a)] = corner[size_t(a)] + ((e >> a) & 1) * off;
      acc += descend(x, r, k + 1, child);
    }
    return acc;
  }

  CantorSpec spec_;
  double s_;
  int n_ = 0;
  double base_mass_ = 1.0;
  std::vector<double> theta_;
  std::vector<double> corners_;  // base-cube corners, flat
};

inline CantorMeasure build_cantor(const CantorSpec& spec, double s) {
  if (!(s > 0.0 && s < double(spec.d)))
    throw std::invalid_argument("build_cantor: need 0 < s < d");
  return CantorMeasure(spec, s);
}

// ---------------------------------------------------------------------------
// Constructive dyadic Frostman measure: start from h(side) on each finest
// cell, walk upward, and rescale any subtree whose mass exceeds the cap of
// its cube.  The result satisfies mu(Q) <= h(side(Q)) for every cube of the
// root tree, and its total mass equals the optimal cube-gauge covering cost.
// ---------------------------------------------------------------------------
struct FrostmanResult {
  DiscreteMeasure mu;
  double mass = 0.0;
  std::vector<double> cell_masses;  // aligned with cells.cells
};

namespace detail {
// sorted aggregation of child (code, mass) into parent level
inline std::vector<std::pair<uint64_t, double>> aggregate_parents(
    const std::vector<std::pair<uint64_t, double>>& cur, int d, int bits) {
  std::vector<std::pair<uint64_t, double>> up;
  up.reserve(cur.size());
  for (const auto& [code, m] : cur) up.emplace_back(dyadic::parent_code(code, d, bits), m);
  std::sort(up.begin(), up.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<uint64_t, double>> merged;
  merged.reserve(up.size());
  for (const auto& e : up) {
    if (!merged.empty() && merged.back().first == e.first)
      merged.back().second += e.second;
    else
      merged.push_back(e);
  }
  return merged;
}
}  // namespace detail

inline FrostmanResult frostman_measure(const DyadicCellSet& cells, const GaugeFunction& h) {
  if (cells.empty()) throw std::invalid_argument("frostman_measure: empty cell set");
  int d = cells.dim();
  int bits = dyadic::bits_per_axis(d);
  double leaf_mass = h(cells.cell_side());

  std::vector<std::pair<uint64_t, double>> cur;
  cur.reserve(cells.size());
  for (uint64_t code : cells.cells) cur.emplace_back(code, leaf_mass);

  // ascend with caps, remembering the scale factor wherever one binds
  std::vector<std::vector<std::pair<uint64_t, double>>> factors(size_t(cells.depth) + 1);
  for (int k = cells.depth - 1; k >= 0; --k) {
    cur = detail::aggregate_parents(cur, d, bits);
    double cap = h(cells.root.side * std::ldexp(1.0, -k));
    for (auto& [code, m] : cur) {
      if (m > cap) {
        factors[size_t(k)].emplace_back(code, cap / m);
        m = cap;
      }
    }
  }

  auto factor_at = [&](int k, uint64_t code) {
    const auto& fs = factors[size_t(k)];
    auto it = std::lower_bound(fs.begin(), fs.end(), code,
                               [](const auto& e, uint64_t c) { return e.first < c; });
    return (it != fs.end() && it->first == code) ? it->second : 1.0;
  };

  std::vector<double> flat, ws, cell_masses;
  flat.reserve(cells.size() * size_t(d));
  ws.reserve(cells.size());
  NeumaierSum total;
  for (uint64_t code : cells.cells) {
    double m = leaf_mass;
    uint64_t up = code;
    for (int k = cells.depth; k >= 0; --k) {
      m *= factor_at(k, up);
      up = dyadic::parent_code(up, d, bits);
    }
    auto c = dyadic::cell_center(cells, code);
    flat.insert(flat.end(), c.begin(), c.end());
    ws.push_back(m);
    cell_masses.push_back(m);
    total.add(m);
  }
  return FrostmanResult{DiscreteMeasure(d, std::move(flat), std::move(ws)), total.value(),
                        std::move(cell_masses)};
}

// exhaustive cap check over the root tree: max over all dyadic cubes of
// mu(Q)/h(side(Q))  (test support; <= 1 + eps certifies the Frostman property)
inline double frostman_max_cap_ratio(const DyadicCellSet& cells, const GaugeFunction& h,
                                     const FrostmanResult& fr) {
  int d = cells.dim();
  int bits = dyadic::bits_per_axis(d);
  std::vector<std::pair<uint64_t, double>> cur;
  for (size_t i = 0; i < cells.size(); ++i) cur.emplace_back(cells.cells[i], fr.cell_masses[i]);
  double worst = 0.0;
  for (int k = cells.depth; k >= 0; --k) {
    double cap = h(cells.root.side * std::ldexp(1.0, -k));
    for (const auto& [code, m] : cur) worst = std::max(worst, m / cap);
    if (k > 0) cur = detail::aggregate_parents(cur, d, bits);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Measure discretization: one atom per mesh cube, placed at the center and
// carrying the cube's charge.
// ---------------------------------------------------------------------------
struct SampledDensity {
  int d = 1;
  Cube box;  // bounded support
  std::function<double(std::span<const double>)> f;
};

struct DiscretizeResult {
  DiscreteMeasure nu;
  double input_total_variation = 0.0;  // ||nu|| of the input
  double input_total_charge = 0.0;
};

inline DiscretizeResult discretize_measure(const SampledDensity& density, double mesh) {
  if (!(mesh > 0.0)) throw std::invalid_argument("discretize_measure: mesh must be positive");
  int d = density.d;
  if (int(density.box.corner.size()) != d || !(density.box.side > 0.0) ||
      !std::isfinite(density.box.side))
    throw std::invalid_argument("discretize_measure: support must be a bounded cube");
  int per_axis = int(std::ceil(density.box.side / mesh - 1e-12));
  if (per_axis < 1) per_axis = 1;
  if (std::pow(double(per_axis), double(d)) > double(1 << 26))
    throw std::invalid_argument("discretize_measure: mesh too fine");

  const auto& gl = gauss_legendre_8();
  std::vector<double> flat, ws;
  double tv = 0.0, charge = 0.0;
  std::vector<int> idx(size_t(d), 0);
  std::vector<double> pt(static_cast<size_t>(d));
  while (true) {
    // tensor Gauss over this mesh cube
    double w_cell = 0.0, tv_cell = 0.0;
    std::vector<int> g(size_t(d), 0);
    while (true) {
      double wq = 1.0;
      for (int a = 0; a < d; ++a) {
        double lo = density.box.corner[size_t(a)] + idx[size_t(a)] * mesh;
        pt[size_t(a)] = lo + 0.5 * mesh * (1.0 + gl[size_t(g[size_t(a)])].first);
        wq *= 0.5 * mesh * gl[size_t(g[size_t(a)])].second;
      }
      double v = density.f(pt);
      w_cell += wq * v;
      tv_cell += wq * std::abs(v);
      int a = 0;
      for (; a < d; ++a) {
        if (++g[size_t(a)] < int(gl.size())) break;
        g[size_t(a)] = 0;
      }
      if (a == d) break;
    }
    tv += tv_cell;
    charge += w_cell;
    if (w_cell != 0.0) {
      for (int a = 0; a < d; ++a)
        flat.push_back(density.box.corner[size_t(a)] + (idx[size_t(a)] + 0.5) * mesh);
      ws.push_back(w_cell);
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++idx[size_t(a)] < per_axis) break;
      idx[size_t(a)] = 0;
    }
    if (a == d) break;
  }
  if (ws.empty()) {
    flat.assign(density.box.corner.begin(), density.box.corner.end());
    ws.push_back(0.0);
  }
  return DiscretizeResult{DiscreteMeasure(d, std::move(flat), std::move(ws)), tv, charge};
}

// discrete input: atoms binned to the mesh grid anchored at `anchor`
inline DiscretizeResult discretize_measure(const DiscreteMeasure& nu,
                                           std::span<const double> anchor, double mesh) {
  if (!(mesh > 0.0)) throw std::invalid_argument("discretize_measure: mesh must be positive");
  int d = nu.dim();
  std::vector<double> flat, ws;
  std::vector<std::pair<std::vector<long long>, double>> bins;
  for (size_t i = 0; i < nu.natoms(); ++i) {
    std::vector<long long> key(static_cast<size_t>(d));
    for (int a = 0; a < d; ++a)
      key[size_t(a)] = (long long)std::floor((nu.atom(i)[size_t(a)] - anchor[size_t(a)]) / mesh);
    bool hit = false;
    for (auto& b : bins)
      if (b.first == key) {
        b.second += nu.weight(i);
        hit = true;
        break;
      }
    if (!hit) bins.emplace_back(std::move(key), nu.weight(i));
  }
  for (const auto& [key, w] : bins) {
    if (w == 0.0) continue;
    for (int a = 0; a < d; ++a) flat.push_back(anchor[size_t(a)] + (double(key[size_t(a)]) + 0.5) * mesh);
    ws.push_back(w);
  }
  if (ws.empty()) {
    flat.assign(anchor.begin(), anchor.end());
    ws.push_back(0.0);
  }
  return DiscretizeResult{DiscreteMeasure(d, std::move(flat), std::move(ws)),
                          nu.total_variation(), neumaier_total(nu.weights())};
}

}  // namespace rieszlab
