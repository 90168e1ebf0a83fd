#pragma once

#include <string_view>

#include "hstream/frontend/parser.hpp"
#include "hstream/frontend/sema.hpp"

namespace hstream::frontend {

/// Lexes, parses and checks one translation unit. Lexical and syntax errors
/// end up in `errors` like semantic ones, so callers see a single result.
CheckResult compile_source(std::string_view source);

}  // namespace hstream::frontend
