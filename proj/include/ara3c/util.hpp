#pragma once

#include <string>

namespace ara3c {

// True when SOURCE_DATE_EPOCH is set: timestamps come from the variable and
// wall-clock columns are zeroed so two identical runs emit identical bytes.
bool reproducible_mode();

// ISO 8601 UTC, honoring SOURCE_DATE_EPOCH in reproducible mode.
std::string timestamp_utc();

// Shortest decimal form that round-trips the exact 64-bit value.
std::string format_double(double value);

}  // namespace ara3c
