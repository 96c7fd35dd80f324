#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace atca {

/// Entry point behind the `atca` binary. `args` excludes the program name.
/// Returns 0 on success, 1 on runtime error, 2 on usage error.
int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atca
