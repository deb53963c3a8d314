// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "protomon/term.hpp"

namespace protomon {

enum class DiagnosticKind {
  lexical,
  syntax,
  duplicate_name,
  unknown_pattern,
  arity_mismatch,
  unknown_equation,
  missing_main,
  unbound_variable,
  unguarded_recursion,
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  std::string message;
  SourceLoc loc;

  /// "line:col: kind: message"
  std::string format() const;
};

using ValidationError = Diagnostic;

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(Diagnostic d);
  const Diagnostic& diagnostic() const { return diag_; }

 private:
  Diagnostic diag_;
};

/// Thrown by load_spec when a spec parses but fails validation.
class InvalidSpec : public std::runtime_error {
 public:
  explicit InvalidSpec(std::vector<Diagnostic> errors);
  const std::vector<Diagnostic>& errors() const { return errors_; }

 private:
  std::vector<Diagnostic> errors_;
};

/// Throws ParseError on the first lexical or grammar violation.
Spec parse_spec(std::string_view text);

/// Empty iff names, arities, variable scopes, `Main` and recursion
/// guardedness all check out.
std::vector<ValidationError> validate_spec(const Spec& spec);

/// parse_spec followed by validate_spec; throws ParseError or InvalidSpec.
Spec load_spec(std::string_view text);

}  // namespace protomon
