#include "harmoniq/offset.hpp"

#include <sstream>

namespace harmoniq {

std::vector<Offset> hypercube_offsets(int dim, int lo, int hi) {
  std::vector<Offset> out;
  if (hi < lo) return out;
  const int span = hi - lo + 1;
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(span);
  out.reserve(total);
  Offset cur(dim, lo);
  for (std::size_t n = 0; n < total; ++n) {
    out.push_back(cur);
    for (int a = dim - 1; a >= 0; --a) {
      if (++cur[a] <= hi) break;
      cur[a] = lo;
    }
  }
  return out;
}

std::string format_offset(const Offset& a) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) os << ',';
    os << a[i];
  }
  os << ')';
  return os.str();
}

}  // namespace harmoniq
