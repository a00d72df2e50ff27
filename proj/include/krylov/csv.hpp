#pragma once

#include <string>

namespace krylov {

// Round-trip exact text form of a double ("%.17g"); NaN prints as "nan".
std::string format_double(double value);

}  // namespace krylov
