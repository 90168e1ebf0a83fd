#include "hstream/frontend/diagnostic.hpp"

#include <algorithm>

namespace hstream::frontend {

std::string format_diagnostic(std::string_view file, const Diagnostic& d) {
  return std::string(file) + ":" + std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": error[" +
         d.code + "]: " + d.message;
}

DiagnosticError::DiagnosticError(Diagnostic d)
    : std::runtime_error(std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": error[" + d.code +
                         "]: " + d.message),
      diag_(std::move(d)) {}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(),
                   [](const Diagnostic& a, const Diagnostic& b) { return a.loc < b.loc; });
}

}  // namespace hstream::frontend
