#pragma once

#include "rieszlab/operator.hpp"

namespace rieszlab {

// ---------------------------------------------------------------------------
// Dyadic covering upper bound for the h-content: exact optimum over dyadic
// coverings, cost h(side * sqrt(d)/2) per chosen cube (its circumscribed-ball
// radius), by the bottom-up DP  cost(Q) = min(h(r_Q), sum over children).
// ---------------------------------------------------------------------------
namespace detail {

template <class CostFn>
double tree_mincut(const DyadicCellSet& cells, const CostFn& cost_of_side) {
  if (cells.empty()) return 0.0;
  int d = cells.dim();
  int bits = dyadic::bits_per_axis(d);
  std::vector<std::pair<uint64_t, double>> cur;
  cur.reserve(cells.size());
  double leaf_cost = cost_of_side(cells.cell_side());
  for (uint64_t code : cells.cells) cur.emplace_back(code, leaf_cost);
  for (int k = cells.depth - 1; k >= 0; --k) {
    cur = aggregate_parents(cur, d, bits);
    double cap = cost_of_side(cells.root.side * std::ldexp(1.0, -k));
    for (auto& [code, c] : cur) c = std::min(c, cap);
  }
  return cur.front().second;
}

}  // namespace detail

inline double covering_upper_bound(const DyadicCellSet& cells, const GaugeFunction& h) {
  double ball_factor = 0.5 * std::sqrt(double(cells.dim()));
  return detail::tree_mincut(cells, [&](double side) { return h(side * ball_factor); });
}

// optimal dyadic covering priced by the cube gauge h(side); equals the
// Frostman mass by exact tree duality and is reported alongside it
inline double covering_cube_gauge_cost(const DyadicCellSet& cells, const GaugeFunction& h) {
  return detail::tree_mincut(cells, [&](double side) { return h(side); });
}

struct ContentBracket {
  double upper = 0.0;      // ball-gauge covering cost
  double lower = 0.0;      // Frostman mass (cube-gauge mincut)
  int depth = 0;
  size_t cells = 0;
  std::string gauge_id;
  double duality_ratio = 0.0;  // upper/lower in [2^-d, 1]; the ball-vs-cube gap
};

struct FrostmanLowerBound {
  DiscreteMeasure mu;
  double mass = 0.0;
};

inline FrostmanLowerBound frostman_lower_bound(const DyadicCellSet& cells,
                                               const GaugeFunction& h) {
  auto fr = frostman_measure(cells, h);
  return FrostmanLowerBound{std::move(fr.mu), fr.mass};
}

inline ContentBracket content_bracket(const DyadicCellSet& cells, const GaugeFunction& h) {
  ContentBracket out;
  out.depth = cells.depth;
  out.cells = cells.size();
  out.gauge_id = h.id();
  if (cells.empty()) return out;
  out.upper = covering_upper_bound(cells, h);
  out.lower = frostman_measure(cells, h).mass;
  out.duality_ratio = out.lower > 0.0 ? out.upper / out.lower : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Superlevel sets of Riesz transforms, discretized as marked finest cells of
// a window cube.  The declared semantic is the predicate at cell centers.
// ---------------------------------------------------------------------------
enum class SuperlevelMode { maximal, fixed_eps, absolute };

inline DyadicCellSet superlevel_cells(const DiscreteMeasure& nu, const RieszContext& ctx,
                                      double P, const Cube& window, int depth,
                                      SuperlevelMode mode, double eps = 0.0) {
  if (!(P > 0.0)) throw std::invalid_argument("superlevel_cells: P must be positive");
  if (mode == SuperlevelMode::fixed_eps && !(eps > 0.0))
    throw std::invalid_argument("superlevel_cells: fixed_eps mode needs eps > 0");
  int d = nu.dim();
  if (int(window.corner.size()) != d) throw std::invalid_argument("superlevel_cells: window dim");
  dyadic::check_depth(d, depth);

  DyadicCellSet set;
  set.root = window;
  set.depth = depth;
  double cs = set.cell_side();
  int bits = dyadic::bits_per_axis(d);
  uint64_t cells_per_axis = 1ull << depth;

  // A center farther than (||nu||/P)^{1/s} from every atom fails even the
  // absolute-sum test, which dominates the other two modes.
  double R = std::pow(nu.total_variation() / P, 1.0 / ctx.s) * (1.0 + 1e-9) + cs;
  std::vector<uint64_t> candidates;
  double full = 1.0;
  for (int a = 0; a < d; ++a) full *= double(cells_per_axis);
  double per_atom_box = 1.0;
  for (int a = 0; a < d; ++a) per_atom_box *= std::min(double(cells_per_axis), 2.0 * R / cs + 2.0);
  if (per_atom_box * double(nu.natoms()) < 0.5 * full) {
    for (size_t j = 0; j < nu.natoms(); ++j) {
      auto y = nu.atom(j);
      std::vector<int64_t> lo(static_cast<size_t>(d)), hi(static_cast<size_t>(d));
      bool empty = false;
      for (int a = 0; a < d; ++a) {
        double u0 = (y[size_t(a)] - R - window.corner[size_t(a)]) / cs - 0.5;
        double u1 = (y[size_t(a)] + R - window.corner[size_t(a)]) / cs - 0.5;
        lo[size_t(a)] = std::max<int64_t>(0, int64_t(std::ceil(u0)));
        hi[size_t(a)] = std::min<int64_t>(int64_t(cells_per_axis) - 1, int64_t(std::floor(u1)));
        if (lo[size_t(a)] > hi[size_t(a)]) empty = true;
      }
      if (empty) continue;
      std::vector<int64_t> idx(lo);
      while (true) {
        uint64_t code = 0;
        for (int a = 0; a < d; ++a) code |= uint64_t(idx[size_t(a)]) << (bits * a);
        candidates.push_back(code);
        int a = 0;
        for (; a < d; ++a) {
          if (++idx[size_t(a)] <= hi[size_t(a)]) break;
          idx[size_t(a)] = lo[size_t(a)];
        }
        if (a == d) break;
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  } else {
    if (full > double(1 << 22))
      throw std::invalid_argument("superlevel_cells: window resolution too fine to enumerate");
    candidates.reserve(size_t(full));
    std::vector<int64_t> idx(size_t(d), 0);
    while (true) {
      uint64_t code = 0;
      for (int a = 0; a < d; ++a) code |= uint64_t(idx[size_t(a)]) << (bits * a);
      candidates.push_back(code);
      int a = 0;
      for (; a < d; ++a) {
        if (++idx[size_t(a)] < int64_t(cells_per_axis)) break;
        idx[size_t(a)] = 0;
      }
      if (a == d) break;
    }
  }

  std::vector<char> marked(candidates.size(), 0);
  parallel_for(candidates.size(), [&](size_t k) {
    auto c = dyadic::cell_center(set, candidates[k]);
    bool hit = false;
    switch (mode) {
      case SuperlevelMode::maximal: {
        auto m = maximal_transform(nu, ctx, c);
        hit = m.at_atom || m.value > P;
        break;
      }
      case SuperlevelMode::fixed_eps:
        hit = truncated_transform(nu, ctx, c, eps).magnitude > P;
        break;
      case SuperlevelMode::absolute: {
        NeumaierSum s;
        bool at_atom = false;
        for (size_t j = 0; j < nu.natoms(); ++j) {
          double r = dist(std::span<const double>(c), nu.atom(j));
          if (r == 0.0) {
            at_atom = nu.weight(j) != 0.0;
            if (at_atom) break;
            continue;
          }
          s.add(std::abs(nu.weight(j)) * inv_rpow(r, ctx.s));
        }
        hit = at_atom || s.value() > P;
        break;
      }
    }
    marked[k] = hit ? 1 : 0;
  });
  for (size_t k = 0; k < candidates.size(); ++k)
    if (marked[k]) set.cells.push_back(candidates[k]);
  dyadic::normalize(set);
  return set;
}

// grid dilation: cells whose center is within `radius` of the center of a
// marked cell (the discrete stand-in for fattening a set by balls)
inline DyadicCellSet dilate_cells(const DyadicCellSet& cells, double radius) {
  DyadicCellSet out;
  out.root = cells.root;
  out.depth = cells.depth;
  int d = cells.dim();
  int bits = dyadic::bits_per_axis(d);
  double cs = cells.cell_side();
  int64_t reach = int64_t(std::floor(radius / cs + 1e-12));
  uint64_t cells_per_axis = 1ull << cells.depth;
  uint64_t coords[4];
  std::vector<int64_t> idx(static_cast<size_t>(d));
  for (uint64_t code : cells.cells) {
    dyadic::unpack(code, d, bits, coords);
    std::vector<int64_t> lo(static_cast<size_t>(d)), hi(static_cast<size_t>(d));
    for (int a = 0; a < d; ++a) {
      lo[size_t(a)] = std::max<int64_t>(0, int64_t(coords[a]) - reach);
      hi[size_t(a)] = std::min<int64_t>(int64_t(cells_per_axis) - 1, int64_t(coords[a]) + reach);
    }
    idx = lo;
    while (true) {
      double rr = 0.0;
      for (int a = 0; a < d; ++a) rr += sqr(double(idx[size_t(a)]) - double(coords[a]));
      if (rr * cs * cs <= radius * radius * (1.0 + 1e-12)) {
        uint64_t c2 = 0;
        for (int a = 0; a < d; ++a) c2 |= uint64_t(idx[size_t(a)]) << (bits * a);
        out.cells.push_back(c2);
      }
      int a = 0;
      for (; a < d; ++a) {
        if (++idx[size_t(a)] <= hi[size_t(a)]) break;
        idx[size_t(a)] = lo[size_t(a)];
      }
      if (a == d) break;
    }
  }
  dyadic::normalize(out);
  return out;
}

}  // namespace rieszlab
