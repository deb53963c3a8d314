// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "protomon/pattern.hpp"

namespace protomon {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

/// Reference to a declared event type. `fixed` carries values already
/// chosen for the declaration's free variables; it is empty in parsed source.
struct PatternRef {
  std::string name;
  std::vector<FieldPattern> args;
  Binding fixed;
};
struct Seq {
  TermPtr first, second;
};
struct Shuffle {
  TermPtr left, right;
};
struct And {
  TermPtr left, right;
};
struct Or {
  TermPtr left, right;
};
struct Let {
  std::vector<std::string> vars;
  TermPtr body;
};
struct Star {
  TermPtr body;
};
struct EqRef {
  std::string name;
};
/// Empty trace. Only appears in monitor residuals.
struct Epsilon {};

struct Term {
  std::variant<PatternRef, Seq, Shuffle, And, Or, Let, Star, EqRef, Epsilon> node;
  SourceLoc loc;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

TermPtr make_term(decltype(Term::node) node, SourceLoc loc = {});
const TermPtr& epsilon();

/// Structural total order ignoring source locations.
int compare(const Term& a, const Term& b);
inline bool same_structure(const Term& a, const Term& b) { return compare(a, b) == 0; }
int compare(const Binding& a, const Binding& b);

struct Equation {
  std::string name;
  TermPtr body;
  SourceLoc loc;
};

/// A parsed protocol: declared event types plus named equations, entry `Main`.
struct Spec {
  std::vector<PatternDecl> decls;
  std::vector<Equation> equations;

  const PatternDecl* find_decl(std::string_view name) const;
  const Equation* find_equation(std::string_view name) const;
};

bool same_structure(const Spec& a, const Spec& b);

/// Concrete syntax; reparses to a structurally identical AST.
std::string to_source(const Term& term);
std::string to_source(const PatternDecl& decl);
std::string to_source(const Spec& spec);

}  // namespace protomon
