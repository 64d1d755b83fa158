#include "harmoniq/site_set.hpp"

#include <algorithm>
#include <set>

#include "harmoniq/errors.hpp"

namespace harmoniq {

int SiteSet::index_of(const Offset& s) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), s);
  if (it == sites.end() || *it != s) return -1;
  return static_cast<int>(it - sites.begin());
}

Offset SiteSet::wrap(Offset s) const {
  for (int a = 0; a < dim; ++a) {
    const int l = extents[a];
    s[a] %= l;
    if (s[a] < 0) s[a] += l;
  }
  return s;
}

SiteSet build_site_set(const std::vector<int>& extents, Boundary boundary,
                       const std::vector<Offset>& masked) {
  if (extents.empty() || extents.size() > 3)
    throw InvalidInputError("site set extents must have 1 to 3 axes");
  for (int l : extents)
    if (l < 1) throw InvalidInputError("site set extents must be positive");
  if (boundary == Boundary::Periodic && !masked.empty())
    throw InvalidInputError(
        "periodic site sets cannot be masked: translation invariance would "
        "be silently broken");

  SiteSet s;
  s.dim = static_cast<int>(extents.size());
  s.boundary = boundary;
  s.extents = extents;

  std::set<Offset> mask;
  for (const Offset& v : masked) {
    if (static_cast<int>(v.size()) != s.dim)
      throw InvalidInputError("masked site has wrong dimension");
    for (int a = 0; a < s.dim; ++a)
      if (v[a] < 0 || v[a] >= extents[a])
        throw InvalidInputError("masked site " + format_offset(v) +
                                " lies outside the box");
    mask.insert(v);
  }

  Offset cur(s.dim, 0);
  while (true) {
    if (!mask.count(cur)) s.sites.push_back(cur);
    int a = s.dim - 1;
    for (; a >= 0; --a) {
      if (++cur[a] < extents[a]) break;
      cur[a] = 0;
    }
    if (a < 0) break;
  }
  if (s.sites.empty())
    throw InvalidInputError("site set is empty after masking");
  return s;
}

SiteSet pad_site_set(const SiteSet& s, int q) {
  if (q < 0) throw InvalidInputError("padding degree must be >= 0");
  if (s.boundary == Boundary::Periodic) return s;

  std::set<Offset> padded;
  const std::vector<Offset> corner = hypercube_offsets(s.dim, 0, q);
  for (const Offset& k : s.sites)
    for (const Offset& a : corner) padded.insert(add(k, a));

  SiteSet out;
  out.dim = s.dim;
  out.boundary = Boundary::Fixed;
  out.extents = s.extents;
  for (int a = 0; a < out.dim; ++a) out.extents[a] += q;
  out.sites.assign(padded.begin(), padded.end());
  return out;
}

}  // namespace harmoniq
