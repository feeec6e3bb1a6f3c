#ifndef UNADV_CLI_HPP
#define UNADV_CLI_HPP

#include <string>
#include <vector>

namespace unadv::cli {

// Entry point of the `unadv` command-line tool; args exclude the program
// name. Relative paths resolve against $UNADV_DATA_ROOT when that variable
// is set. Returns a process exit code and never throws.
int cli_main(std::vector<std::string> args);

} // namespace unadv::cli

#endif
