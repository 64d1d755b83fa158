#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace harmoniq {

// Integer lattice offset / site coordinate. Comparison is lexicographic
// (inherited from std::vector), which fixes the ordering used everywhere:
// site enumeration, block enumeration, and the recovery sweep.
using Offset = std::vector<int>;

inline Offset add(const Offset& a, const Offset& b) {
  Offset r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Offset sub(const Offset& a, const Offset& b) {
  Offset r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Offset negate(const Offset& a) {
  Offset r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

inline bool is_zero(const Offset& a) {
  for (int c : a)
    if (c != 0) return false;
  return true;
}

// All offsets in the box [lo, hi]^d, lexicographically ordered.
std::vector<Offset> hypercube_offsets(int dim, int lo, int hi);

// True when every component lies in [0, q].
inline bool in_corner_box(const Offset& a, int q) {
  for (int c : a)
    if (c < 0 || c > q) return false;
  return true;
}

std::string format_offset(const Offset& a);

}  // namespace harmoniq
