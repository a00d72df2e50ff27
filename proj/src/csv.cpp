#include "krylov/csv.hpp"

#include <cmath>
#include <cstdio>

namespace krylov {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace krylov
