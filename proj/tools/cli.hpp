#pragma once

#include <iosfwd>

namespace csiloc::cli {

/// Exit codes: 0 success, 1 usage error, 2 data, format or I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace csiloc::cli
