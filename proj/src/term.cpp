// SPDX-License-Identifier: Apache-2.0

#include "protomon/term.hpp"

#include <algorithm>

namespace protomon {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class T>
int three_way(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

int compare(const PatternBody& a, const PatternBody& b);

int compare(const FieldPattern& a, const FieldPattern& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  return std::visit(
      overloaded{
          [&](const Literal& x) { return three_way(x.value, std::get<Literal>(b).value); },
          [&](const Wildcard&) { return 0; },
          [&](const Var& x) { return three_way(x.name, std::get<Var>(b).name); },
          [&](const Nested& x) { return compare(*x.body, *std::get<Nested>(b).body); },
      },
      a);
}

int compare(const PatternBody& a, const PatternBody& b) {
  const auto& ca = a.constraints;
  const auto& cb = b.constraints;
  for (std::size_t i = 0; i < ca.size() && i < cb.size(); ++i) {
    if (int c = three_way(ca[i].key, cb[i].key)) return c;
    if (int c = compare(ca[i].pattern, cb[i].pattern)) return c;
  }
  return three_way(ca.size(), cb.size());
}

int compare_ptr(const TermPtr& a, const TermPtr& b) {
  if (a == b) return 0;
  return compare(*a, *b);
}

// Binding strength, loosest first.
enum Level { kShuffle = 0, kOr, kAnd, kSeq, kStar, kAtom };

void print(const Term& t, int min_level, std::string& out);

void print_binary(const TermPtr& l, const TermPtr& r, int level, std::string_view op,
                  int min_level, std::string& out) {
  bool parens = level < min_level;
  if (parens) out += "(";
  print(*l, level, out);
  out += op;
  print(*r, level + 1, out);
  if (parens) out += ")";
}

void print(const Term& t, int min_level, std::string& out) {
  std::visit(overloaded{
                 [&](const PatternRef& p) {
                   out += p.name;
                   if (!p.args.empty()) {
                     out += "(";
                     for (std::size_t i = 0; i < p.args.size(); ++i) {
                       if (i) out += ", ";
                       out += to_source(p.args[i]);
                     }
                     out += ")";
                   }
                   if (!p.fixed.empty()) {
                     out += "[";
                     bool first = true;
                     for (const auto& [k, v] : p.fixed) {
                       if (!first) out += ", ";
                       first = false;
                       out += k + "=" + to_source(v);
                     }
                     out += "]";
                   }
                 },
                 [&](const Seq& s) { print_binary(s.first, s.second, kSeq, " ", min_level, out); },
                 [&](const Shuffle& s) {
                   print_binary(s.left, s.right, kShuffle, " | ", min_level, out);
                 },
                 [&](const And& s) {
                   print_binary(s.left, s.right, kAnd, " /\\ ", min_level, out);
                 },
                 [&](const Or& s) { print_binary(s.left, s.right, kOr, " \\/ ", min_level, out); },
                 [&](const Let& l) {
                   out += "{let ";
                   for (std::size_t i = 0; i < l.vars.size(); ++i) {
                     if (i) out += ", ";
                     out += l.vars[i];
                   }
                   out += "; ";
                   print(*l.body, kShuffle, out);
                   out += "}";
                 },
                 [&](const Star& s) {
                   bool parens = kStar < min_level;
                   if (parens) out += "(";
                   print(*s.body, kAtom, out);
                   out += "*";
                   if (parens) out += ")";
                 },
                 [&](const EqRef& e) { out += e.name; },
                 [&](const Epsilon&) { out += "eps"; },
             },
             t.node);
}

}  // namespace

TermPtr make_term(decltype(Term::node) node, SourceLoc loc) {
  return std::make_shared<const Term>(Term{std::move(node), loc});
}

const TermPtr& epsilon() {
  static const TermPtr eps = make_term(Epsilon{});
  return eps;
}

int compare(const Binding& a, const Binding& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (int c = three_way(ia->first, ib->first)) return c;
    if (int c = three_way(ia->second, ib->second)) return c;
  }
  return three_way(a.size(), b.size());
}

int compare(const Term& a, const Term& b) {
  if (&a == &b) return 0;
  if (a.node.index() != b.node.index()) return a.node.index() < b.node.index() ? -1 : 1;
  return std::visit(
      overloaded{
          [&](const PatternRef& x) {
            const auto& y = std::get<PatternRef>(b.node);
            if (int c = three_way(x.name, y.name)) return c;
            for (std::size_t i = 0; i < x.args.size() && i < y.args.size(); ++i) {
              if (int c = compare(x.args[i], y.args[i])) return c;
            }
            if (int c = three_way(x.args.size(), y.args.size())) return c;
            return compare(x.fixed, y.fixed);
          },
          [&](const Seq& x) {
            const auto& y = std::get<Seq>(b.node);
            if (int c = compare_ptr(x.first, y.first)) return c;
            return compare_ptr(x.second, y.second);
          },
          [&](const Shuffle& x) {
            const auto& y = std::get<Shuffle>(b.node);
            if (int c = compare_ptr(x.left, y.left)) return c;
            return compare_ptr(x.right, y.right);
          },
          [&](const And& x) {
            const auto& y = std::get<And>(b.node);
            if (int c = compare_ptr(x.left, y.left)) return c;
            return compare_ptr(x.right, y.right);
          },
          [&](const Or& x) {
            const auto& y = std::get<Or>(b.node);
            if (int c = compare_ptr(x.left, y.left)) return c;
            return compare_ptr(x.right, y.right);
          },
          [&](const Let& x) {
            const auto& y = std::get<Let>(b.node);
            if (int c = three_way(x.vars, y.vars)) return c;
            return compare_ptr(x.body, y.body);
          },
          [&](const Star& x) { return compare_ptr(x.body, std::get<Star>(b.node).body); },
          [&](const EqRef& x) { return three_way(x.name, std::get<EqRef>(b.node).name); },
          [&](const Epsilon&) { return 0; },
      },
      a.node);
}

const PatternDecl* Spec::find_decl(std::string_view name) const {
  for (const auto& d : decls) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const Equation* Spec::find_equation(std::string_view name) const {
  for (const auto& e : equations) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

bool same_structure(const Spec& a, const Spec& b) {
  if (a.decls.size() != b.decls.size() || a.equations.size() != b.equations.size()) return false;
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    const auto& x = a.decls[i];
    const auto& y = b.decls[i];
    if (x.name != y.name || x.params != y.params || x.alternatives != y.alternatives) return false;
  }
  for (std::size_t i = 0; i < a.equations.size(); ++i) {
    if (a.equations[i].name != b.equations[i].name) return false;
    if (!same_structure(*a.equations[i].body, *b.equations[i].body)) return false;
  }
  return true;
}

std::string to_source(const Term& term) {
  std::string out;
  print(term, kShuffle, out);
  return out;
}

std::string to_source(const PatternDecl& decl) {
  std::string out = decl.name;
  if (!decl.params.empty()) {
    out += "(";
    for (std::size_t i = 0; i < decl.params.size(); ++i) {
      if (i) out += ", ";
      out += decl.params[i];
    }
    out += ")";
  }
  out += " matches ";
  for (std::size_t i = 0; i < decl.alternatives.size(); ++i) {
    if (i) out += " | ";
    out += to_source(decl.alternatives[i]);
  }
  return out + ";";
}

std::string to_source(const Spec& spec) {
  std::string out;
  for (const auto& d : spec.decls) out += to_source(d) + "\n";
  for (const auto& e : spec.equations) out += e.name + " = " + to_source(*e.body) + ";\n";
  return out;
}

}  // namespace protomon
