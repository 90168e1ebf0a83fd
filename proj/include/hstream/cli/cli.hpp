#pragma once

#include <ostream>
#include <vector>

#include "hstream/frontend/diagnostic.hpp"
#include "hstream/frontend/sema.hpp"
#include "hstream/pdl.hpp"

namespace hstream::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;  // bad flags, compile errors, bad configuration
inline constexpr int kExitIoError = 2;    // unreadable or unwritable files, missing templates

/// `hstreamc` with subcommands compile, run, bench, check and loc. Data goes
/// to `out` (or to files); diagnostics go to `err`.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// UNKNOWN_DEVICE diagnostics for device clauses naming ids the platform
/// does not have. Kernels without an explicit clause always pass.
std::vector<frontend::Diagnostic> check_devices(const std::vector<frontend::KernelSpec>& kernels,
                                                const pdl::PlatformDescription& platform);

}  // namespace hstream::cli
