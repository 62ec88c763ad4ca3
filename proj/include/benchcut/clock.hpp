#pragma once

#include <string>

namespace benchcut {

// Current wall time as RFC 3339 UTC with millisecond precision.
std::string now_rfc3339_utc();

}  // namespace benchcut
