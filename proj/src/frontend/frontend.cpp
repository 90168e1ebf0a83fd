#include "hstream/frontend/frontend.hpp"

namespace hstream::frontend {

CheckResult compile_source(std::string_view source) {
  try {
    return check(parse_source(source));
  } catch (const DiagnosticError& e) {
    return CheckResult{{}, {e.diagnostic()}};
  }
}

}  // namespace hstream::frontend
