#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msurv {

/// Entry point of the `msurv` tool. Returns 0 on success and 2 on any usage
/// or validation error, with a diagnostic on `err`. Results go to the file
/// named by --out, or to `out` when it is absent.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msurv
