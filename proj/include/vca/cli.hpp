#pragma once

namespace vca {

/// Entry point behind the `vca` binary. Exit codes: 0 success, 1 usage
/// error, 2 runtime failure.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace vca
