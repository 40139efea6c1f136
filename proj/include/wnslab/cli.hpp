#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wnslab {

/// Exit status: 0 success / all properties hold, 1 a property failed,
/// 2 usage or configuration error. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wnslab
