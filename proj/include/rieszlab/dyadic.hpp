#pragma once

#include "rieszlab/common.hpp"

namespace rieszlab {

struct Cube {
  std::vector<double> corner;  // lexicographically smallest corner
  double side = 0.0;
  int dim() const { return int(corner.size()); }
};

// A set represented by its finest-level dyadic cells inside a root cube.
// Cell codes pack one integer coordinate per axis; per-axis coordinates use
// floor(63/d) bits, so d=1 supports depth 63, d=2 depth 31, d=3 depth 21.
struct DyadicCellSet {
  Cube root;
  int depth = 0;
  std::vector<uint64_t> cells;  // sorted, unique

  int dim() const { return root.dim(); }
  double cell_side() const { return root.side * std::ldexp(1.0, -depth); }
  bool empty() const { return cells.empty(); }
  size_t size() const { return cells.size(); }
};

namespace dyadic {

inline int bits_per_axis(int d) { return 63 / d; }

inline void check_depth(int d, int depth) {
  if (depth < 0 || depth > bits_per_axis(d))
    throw std::invalid_argument("dyadic: depth out of range for this dimension");
}

inline uint64_t pack(std::span<const uint64_t> coords, int bits) {
  uint64_t code = 0;
  for (size_t a = 0; a < coords.size(); ++a) code |= coords[a] << (bits * a);
  return code;
}

inline void unpack(uint64_t code, int d, int bits, uint64_t* coords) {
  uint64_t mask = (bits == 64) ? ~0ull : ((1ull << bits) - 1);
  for (int a = 0; a < d; ++a) coords[a] = (code >> (bits * a)) & mask;
}

inline uint64_t parent_code(uint64_t code, int d, int bits) {
  uint64_t coords[4];
  unpack(code, d, bits, coords);
  uint64_t out = 0;
  for (int a = 0; a < d; ++a) out |= (coords[a] >> 1) << (bits * a);
  return out;
}

inline std::vector<double> cell_center(const DyadicCellSet& set, uint64_t code) {
  int d = set.dim();
  int bits = bits_per_axis(d);
  uint64_t coords[4];
  unpack(code, d, bits, coords);
  double h = set.cell_side();
  std::vector<double> c(d);
  for (int a = 0; a < d; ++a) c[a] = set.root.corner[a] + (double(coords[a]) + 0.5) * h;
  return c;
}

inline Cube cell_cube(const DyadicCellSet& set, uint64_t code) {
  int d = set.dim();
  int bits = bits_per_axis(d);
  uint64_t coords[4];
  unpack(code, d, bits, coords);
  double h = set.cell_side();
  Cube q;
  q.corner.resize(d);
  for (int a = 0; a < d; ++a) q.corner[a] = set.root.corner[a] + double(coords[a]) * h;
  q.side = h;
  return q;
}

inline void normalize(DyadicCellSet& set) {
  std::sort(set.cells.begin(), set.cells.end());
  set.cells.erase(std::unique(set.cells.begin(), set.cells.end()), set.cells.end());
}

inline bool touches_boundary(const DyadicCellSet& set) {
  int d = set.dim();
  int bits = bits_per_axis(d);
  uint64_t last = (1ull << set.depth) - 1;
  uint64_t coords[4];
  for (uint64_t code : set.cells) {
    unpack(code, d, bits, coords);
    for (int a = 0; a < d; ++a)
      if (coords[a] == 0 || coords[a] == last) return true;
  }
  return false;
}

}  // namespace dyadic
}  // namespace rieszlab
