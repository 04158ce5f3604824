#pragma once

#include <string>

namespace pgsrhb {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Current wall-clock time as an ISO-8601 UTC timestamp.
std::string iso8601_now();

}  // namespace pgsrhb
