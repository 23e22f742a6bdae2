#pragma once

#include <string>
#include <vector>

namespace gazelabel {

// Entry point behind the `gazelabel` binary. Exit codes: 0 on success, 1 on
// validation/usage errors, 2 on I/O errors.
int run_cli(const std::vector<std::string>& args);  // args without the program name
int run_cli(int argc, const char* const* argv);

}  // namespace gazelabel
