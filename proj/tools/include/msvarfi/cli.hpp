#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msvarfi {

/// Entry point of the msvarfi tool. args excludes the program name.
/// Failures print `error: code=<code> message="<text>"` to err and return
/// a nonzero status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msvarfi
