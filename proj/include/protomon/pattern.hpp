// SPDX-License-Identifier: Apache-2.0

// Event types: keyed field patterns matched against event records by
// subset inclusion, with variables that unify on first use.

#pragma once

#include <memory>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "protomon/value.hpp"

namespace protomon {

struct SourceLoc {
  int line = 1;
  int column = 1;
};

struct PatternBody;

struct Literal {
  Atom value;
  bool operator==(const Literal&) const = default;
};

struct Wildcard {
  bool operator==(const Wildcard&) const = default;
};

struct Var {
  std::string name;
  bool operator==(const Var&) const = default;
};

struct Nested {
  std::shared_ptr<const PatternBody> body;
  bool operator==(const Nested& other) const;
};

using FieldPattern = std::variant<Literal, Wildcard, Var, Nested>;

struct Constraint {
  std::string key;
  FieldPattern pattern;
  bool operator==(const Constraint&) const = default;
};

/// Ordered constraints. A key repeated n times constrains the first n
/// positions of the list stored at that key, in order.
struct PatternBody {
  std::vector<Constraint> constraints;
  bool operator==(const PatternBody&) const = default;
};

struct PatternDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<PatternBody> alternatives;
  SourceLoc loc;

  /// Variables used in alternatives that are not parameters. They resolve by
  /// name against the binding in scope at the reference site.
  std::set<std::string> free_variables() const;
};

std::vector<Binding> match_body(const PatternBody& body, const Record& record,
                                const Binding& binding);

/// Matches `event` against every alternative of `decl` with `args`
/// substituted for its parameters. Requires args.size() == decl.params.size().
std::vector<Binding> match_decl(const PatternDecl& decl, std::span<const FieldPattern> args,
                                const Event& event, const Binding& binding);

/// True iff some declaration matches with its parameters as wildcards.
bool is_relevant(std::span<const PatternDecl> decls, const Event& event);

PatternBody substitute(const PatternBody& body, const std::map<std::string, FieldPattern>& subst);
FieldPattern substitute(const FieldPattern& pattern,
                        const std::map<std::string, FieldPattern>& subst);

void collect_variables(const PatternBody& body, std::set<std::string>& out);
void collect_variables(const FieldPattern& pattern, std::set<std::string>& out);

std::string to_source(const PatternBody& body);
std::string to_source(const FieldPattern& pattern);

}  // namespace protomon
