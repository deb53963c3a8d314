// SPDX-License-Identifier: Apache-2.0

#include "protomon/pattern.hpp"

#include <algorithm>
#include <cassert>

namespace protomon {

bool Nested::operator==(const Nested& other) const {
  if (body == other.body) return true;
  if (!body || !other.body) return false;
  return *body == *other.body;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool match_into(const PatternBody& body, const Record& record, Binding& binding);

bool match_field(const FieldPattern& pattern, const Value& value, std::size_t index,
                 Binding& binding) {
  return std::visit(
      overloaded{
          [&](const Literal& lit) {
            auto elem = element_at(value, index);
            return elem && *elem == lit.value;
          },
          [&](const Wildcard&) {
            // Presence of the key suffices for the first occurrence.
            return index == 0 || element_at(value, index).has_value();
          },
          [&](const Var& var) {
            auto elem = element_at(value, index);
            if (!elem) return false;
            auto [it, inserted] = binding.emplace(var.name, *elem);
            return inserted || it->second == *elem;
          },
          [&](const Nested& nested) {
            const Record* rec = value.record();
            return index == 0 && rec && match_into(*nested.body, *rec, binding);
          },
      },
      pattern);
}

bool match_into(const PatternBody& body, const Record& record, Binding& binding) {
  std::map<std::string_view, std::size_t> occurrences;
  for (const auto& c : body.constraints) {
    std::size_t index = occurrences[c.key]++;
    auto it = record.find(c.key);
    if (it == record.end()) return false;
    if (!match_field(c.pattern, it->second, index, binding)) return false;
  }
  return true;
}

std::map<std::string, FieldPattern> param_substitution(const PatternDecl& decl,
                                                       std::span<const FieldPattern> args) {
  assert(args.size() == decl.params.size());
  std::map<std::string, FieldPattern> subst;
  for (std::size_t i = 0; i < decl.params.size() && i < args.size(); ++i) {
    subst.emplace(decl.params[i], args[i]);
  }
  return subst;
}

}  // namespace

std::set<std::string> PatternDecl::free_variables() const {
  std::set<std::string> vars;
  for (const auto& alt : alternatives) collect_variables(alt, vars);
  for (const auto& p : params) vars.erase(p);
  return vars;
}

std::vector<Binding> match_body(const PatternBody& body, const Record& record,
                                const Binding& binding) {
  Binding extended = binding;
  if (!match_into(body, record, extended)) return {};
  return {std::move(extended)};
}

std::vector<Binding> match_decl(const PatternDecl& decl, std::span<const FieldPattern> args,
                                const Event& event, const Binding& binding) {
  auto subst = param_substitution(decl, args);
  std::vector<Binding> out;
  for (const auto& alt : decl.alternatives) {
    for (auto& b : match_body(substitute(alt, subst), event.fields(), binding)) {
      if (std::find(out.begin(), out.end(), b) == out.end()) out.push_back(std::move(b));
    }
  }
  return out;
}

bool is_relevant(std::span<const PatternDecl> decls, const Event& event) {
  for (const auto& decl : decls) {
    std::map<std::string, FieldPattern> subst;
    for (const auto& p : decl.params) subst.emplace(p, Wildcard{});
    for (const auto& v : decl.free_variables()) subst.emplace(v, Wildcard{});
    for (const auto& alt : decl.alternatives) {
      if (!match_body(substitute(alt, subst), event.fields(), {}).empty()) return true;
    }
  }
  return false;
}

FieldPattern substitute(const FieldPattern& pattern,
                        const std::map<std::string, FieldPattern>& subst) {
  if (const auto* v = std::get_if<Var>(&pattern)) {
    if (auto it = subst.find(v->name); it != subst.end()) return it->second;
    return pattern;
  }
  if (const auto* n = std::get_if<Nested>(&pattern)) {
    return Nested{std::make_shared<const PatternBody>(substitute(*n->body, subst))};
  }
  return pattern;
}

PatternBody substitute(const PatternBody& body, const std::map<std::string, FieldPattern>& subst) {
  if (subst.empty()) return body;
  PatternBody out;
  out.constraints.reserve(body.constraints.size());
  for (const auto& c : body.constraints) {
    out.constraints.push_back({c.key, substitute(c.pattern, subst)});
  }
  return out;
}

void collect_variables(const FieldPattern& pattern, std::set<std::string>& out) {
  if (const auto* v = std::get_if<Var>(&pattern)) {
    out.insert(v->name);
  } else if (const auto* n = std::get_if<Nested>(&pattern)) {
    collect_variables(*n->body, out);
  }
}

void collect_variables(const PatternBody& body, std::set<std::string>& out) {
  for (const auto& c : body.constraints) collect_variables(c.pattern, out);
}

std::string to_source(const FieldPattern& pattern) {
  return std::visit(overloaded{
                        [](const Literal& l) { return to_source(l.value); },
                        [](const Wildcard&) { return std::string("_"); },
                        [](const Var& v) { return v.name; },
                        [](const Nested& n) { return to_source(*n.body); },
                    },
                    pattern);
}

std::string to_source(const PatternBody& body) {
  std::string out = "{";
  for (std::size_t i = 0; i < body.constraints.size(); ++i) {
    if (i) out += ", ";
    out += body.constraints[i].key + ":" + to_source(body.constraints[i].pattern);
  }
  return out + "}";
}

}  // namespace protomon
