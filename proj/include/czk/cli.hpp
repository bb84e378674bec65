#ifndef CZK_CLI_HPP_
#define CZK_CLI_HPP_

#include <string>
#include <vector>

namespace czk {

// Entry point behind the czk binary: returns the process exit code.
// 0: all asserted bounds held; 1: a bound was violated (certificate
// written); 2: configuration error.
int cli_run(const std::vector<std::string>& args);

}  // namespace czk

#endif  // CZK_CLI_HPP_
