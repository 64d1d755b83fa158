#pragma once

#include <cstddef>
#include <vector>

#include "harmoniq/offset.hpp"

namespace harmoniq {

enum class Boundary { Fixed, Periodic };

// Finite set of unit-cell sites, stored in lexicographic order. Fixed
// boundary means displacements vanish outside the set; periodic wraps
// offsets modulo the box extents (no masking allowed in that case).
struct SiteSet {
  int dim = 0;
  Boundary boundary = Boundary::Fixed;
  std::vector<int> extents;     // bounding box [0, L_a) per axis
  std::vector<Offset> sites;    // lex sorted, unique

  std::size_t size() const { return sites.size(); }
  // Index in the lex ordering, or -1 when absent.
  int index_of(const Offset& s) const;
  bool contains(const Offset& s) const { return index_of(s) >= 0; }
  Offset wrap(Offset s) const;  // periodic reduction into the box
};

// Box [0,L_1) x ... x [0,L_d) minus the masked sites. Periodic boxes cannot
// be masked and must keep every site.
SiteSet build_site_set(const std::vector<int>& extents, Boundary boundary,
                       const std::vector<Offset>& masked = {});

// Padded codomain for a degree-q factor: union of {k + a : 0 <= a_i <= q}
// over k in S. For periodic sets this is S itself.
SiteSet pad_site_set(const SiteSet& s, int q);

}  // namespace harmoniq
