#pragma once

#include <iosfwd>

namespace hsdma::cli {

/// Exit codes: 0 success, 1 usage or parse error, 2 numerical failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hsdma::cli
