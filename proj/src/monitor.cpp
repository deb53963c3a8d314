// SPDX-License-Identifier: Apache-2.0

#include "protomon/monitor.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace protomon {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::accepting: return "accepting";
    case Verdict::continuing: return "continuing";
    case Verdict::violation: return "violation";
  }
  return "violation";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "accepting") return Verdict::accepting;
  if (s == "continuing") return Verdict::continuing;
  if (s == "violation") return Verdict::violation;
  return std::nullopt;
}

namespace {

// Residual constructors that drop empty-trace units.
TermPtr seq(TermPtr a, TermPtr b) {
  if (a->is<Epsilon>()) return b;
  if (b->is<Epsilon>()) return a;
  return make_term(Seq{std::move(a), std::move(b)});
}

TermPtr shuffle(TermPtr a, TermPtr b) {
  if (a->is<Epsilon>()) return b;
  if (b->is<Epsilon>()) return a;
  return make_term(Shuffle{std::move(a), std::move(b)});
}

TermPtr conj(TermPtr a, TermPtr b) {
  if (a->is<Epsilon>() && b->is<Epsilon>()) return a;
  return make_term(And{std::move(a), std::move(b)});
}

bool config_less(const Configuration& a, const Configuration& b) {
  if (int c = compare(*a.residual, *b.residual)) return c < 0;
  return compare(a.binding, b.binding) < 0;
}

bool config_equal(const Configuration& a, const Configuration& b) {
  return compare(*a.residual, *b.residual) == 0 && compare(a.binding, b.binding) == 0;
}

void normalize(std::vector<Configuration>& configs) {
  std::sort(configs.begin(), configs.end(), config_less);
  configs.erase(std::unique(configs.begin(), configs.end(), config_equal), configs.end());
}

std::optional<Binding> merge(const Binding& a, const Binding& b) {
  Binding out = a;
  for (const auto& [k, v] : b) {
    auto [it, inserted] = out.emplace(k, v);
    if (!inserted && it->second != v) return std::nullopt;
  }
  return out;
}

const PatternDecl& decl_of(const Spec& spec, const std::string& name) {
  const PatternDecl* d = spec.find_decl(name);
  assert(d && "spec must be validated");
  return *d;
}

const TermPtr& definition_of(const Spec& spec, const std::string& name) {
  const Equation* e = spec.find_equation(name);
  assert(e && "spec must be validated");
  return e->body;
}

bool nullable_impl(const Term& t, const Spec& spec, std::set<std::string>& expanding) {
  if (t.is<PatternRef>()) return false;
  if (t.is<Epsilon>() || t.is<Star>()) return true;
  if (const auto* s = t.as<Seq>()) {
    return nullable_impl(*s->first, spec, expanding) && nullable_impl(*s->second, spec, expanding);
  }
  if (const auto* s = t.as<Shuffle>()) {
    return nullable_impl(*s->left, spec, expanding) && nullable_impl(*s->right, spec, expanding);
  }
  if (const auto* s = t.as<And>()) {
    return nullable_impl(*s->left, spec, expanding) && nullable_impl(*s->right, spec, expanding);
  }
  if (const auto* s = t.as<Or>()) {
    return nullable_impl(*s->left, spec, expanding) || nullable_impl(*s->right, spec, expanding);
  }
  if (const auto* s = t.as<Let>()) return nullable_impl(*s->body, spec, expanding);
  if (const auto* e = t.as<EqRef>()) {
    // Guarded specs never revisit an equation here; the check keeps
    // unvalidated input from recursing forever.
    if (!expanding.insert(e->name).second) return false;
    bool r = nullable_impl(*definition_of(spec, e->name), spec, expanding);
    expanding.erase(e->name);
    return r;
  }
  return false;
}

class Deriver {
 public:
  Deriver(const Event& event, const Spec& spec) : event_(event), spec_(spec) {}

  std::vector<Configuration> of(const TermPtr& t) {
    std::vector<Configuration> out;
    const Term& term = *t;
    if (const auto* ref = term.as<PatternRef>()) {
      const PatternDecl& decl = decl_of(spec_, ref->name);
      for (auto& b : match_decl(decl, ref->args, event_, ref->fixed)) {
        for (const auto& [k, _] : ref->fixed) b.erase(k);
        out.push_back({epsilon(), std::move(b)});
      }
    } else if (const auto* s = term.as<Seq>()) {
      for (auto& c : of(s->first)) out.push_back({seq(c.residual, s->second), std::move(c.binding)});
      if (nullable(*s->first, spec_)) {
        for (auto& c : of(s->second)) out.push_back(std::move(c));
      }
    } else if (const auto* s = term.as<Shuffle>()) {
      for (auto& c : of(s->left)) {
        out.push_back({shuffle(c.residual, s->right), std::move(c.binding)});
      }
      for (auto& c : of(s->right)) {
        out.push_back({shuffle(s->left, c.residual), std::move(c.binding)});
      }
    } else if (const auto* s = term.as<And>()) {
      auto left = of(s->left);
      if (!left.empty()) {
        auto right = of(s->right);
        for (const auto& l : left) {
          for (const auto& r : right) {
            if (auto b = merge(l.binding, r.binding)) {
              out.push_back({conj(l.residual, r.residual), std::move(*b)});
            }
          }
        }
      }
    } else if (const auto* s = term.as<Or>()) {
      out = of(s->left);
      for (auto& c : of(s->right)) out.push_back(std::move(c));
    } else if (const auto* s = term.as<Star>()) {
      // The empty iteration contributes nothing, so only proper successors
      // of the body are prefixed to the loop.
      for (auto& c : of(s->body)) out.push_back({seq(c.residual, t), std::move(c.binding)});
    } else if (const auto* s = term.as<Let>()) {
      for (auto& c : of(s->body)) out.push_back(close_scope(*s, std::move(c)));
    } else if (const auto* e = term.as<EqRef>()) {
      out = of(definition_of(spec_, e->name));
    }
    normalize(out);
    return out;
  }

 private:
  Configuration close_scope(const Let& let, Configuration c) {
    Binding local;
    for (const auto& v : let.vars) {
      if (auto it = c.binding.find(v); it != c.binding.end()) {
        local.insert(*it);
        c.binding.erase(it);
      }
    }
    TermPtr body = substitute(c.residual, local, spec_);
    auto still_free = free_variables(*body, spec_);
    std::vector<std::string> remaining;
    for (const auto& v : let.vars) {
      if (!local.count(v) && still_free.count(v)) remaining.push_back(v);
    }
    if (!remaining.empty()) body = make_term(Let{std::move(remaining), body});
    return {std::move(body), std::move(c.binding)};
  }

  const Event& event_;
  const Spec& spec_;
};

void first_patterns(const Term& t, const Spec& spec, std::set<std::string>& expanding,
                    std::vector<std::string>& out) {
  if (t.is<PatternRef>()) {
    out.push_back(to_source(t));
  } else if (const auto* s = t.as<Seq>()) {
    first_patterns(*s->first, spec, expanding, out);
    if (nullable(*s->first, spec)) first_patterns(*s->second, spec, expanding, out);
  } else if (const auto* s = t.as<Shuffle>()) {
    first_patterns(*s->left, spec, expanding, out);
    first_patterns(*s->right, spec, expanding, out);
  } else if (const auto* s = t.as<Or>()) {
    first_patterns(*s->left, spec, expanding, out);
    first_patterns(*s->right, spec, expanding, out);
  } else if (const auto* s = t.as<And>()) {
    std::vector<std::string> l, r;
    first_patterns(*s->left, spec, expanding, l);
    first_patterns(*s->right, spec, expanding, r);
    for (const auto& a : l) {
      for (const auto& b : r) out.push_back(a == b ? a : a + " /\\ " + b);
    }
  } else if (const auto* s = t.as<Star>()) {
    first_patterns(*s->body, spec, expanding, out);
  } else if (const auto* s = t.as<Let>()) {
    first_patterns(*s->body, spec, expanding, out);
  } else if (const auto* e = t.as<EqRef>()) {
    if (!expanding.insert(e->name).second) return;
    first_patterns(*definition_of(spec, e->name), spec, expanding, out);
    expanding.erase(e->name);
  }
}

}  // namespace

MonitorState new_monitor(const Spec& spec) {
  (void)spec;
  MonitorState s;
  s.configs.push_back({make_term(EqRef{"Main"}), {}});
  return s;
}

bool nullable(const Term& term, const Spec& spec) {
  std::set<std::string> expanding;
  return nullable_impl(term, spec, expanding);
}

bool nullable(const Configuration& config, const Spec& spec) {
  return nullable(*config.residual, spec);
}

std::vector<Configuration> successors(const TermPtr& term, const Event& event, const Spec& spec) {
  return Deriver(event, spec).of(term);
}

MonitorState derive(const MonitorState& state, const Event& event, const Spec& spec) {
  assert(!state.latched_violation);
  MonitorState next;
  next.events_consumed = state.events_consumed + 1;
  Deriver deriver(event, spec);
  for (const auto& c : state.configs) {
    for (auto& s : deriver.of(c.residual)) {
      // Every variable is let-bound in a validated spec, so nothing escapes
      // to the top level.
      assert(s.binding.empty());
      next.configs.push_back({std::move(s.residual), {}});
    }
  }
  normalize(next.configs);
  next.latched_violation = next.configs.empty();
  return next;
}

Verdict verdict_of(const MonitorState& state, const Spec& spec) {
  if (state.latched_violation || state.configs.empty()) return Verdict::violation;
  for (const auto& c : state.configs) {
    if (nullable(c, spec)) return Verdict::accepting;
  }
  return Verdict::continuing;
}

StepResult step(const MonitorState& state, const Event& event, const Spec& spec) {
  bool relevant = is_relevant(spec.decls, event);
  if (state.latched_violation || !relevant) {
    MonitorState next = state;
    ++next.events_consumed;
    Verdict v = verdict_of(next, spec);
    return {std::move(next), v, relevant};
  }
  MonitorState next = derive(state, event, spec);
  Verdict v = verdict_of(next, spec);
  return {std::move(next), v, true};
}

std::vector<std::string> expected_event_types(const MonitorState& state, const Spec& spec) {
  std::vector<std::string> out;
  for (const auto& c : state.configs) {
    std::set<std::string> expanding;
    first_patterns(*c.residual, spec, expanding, out);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TermPtr substitute(const TermPtr& term, const Binding& values, const Spec& spec) {
  if (values.empty()) return term;
  const Term& t = *term;
  if (const auto* ref = t.as<PatternRef>()) {
    std::map<std::string, FieldPattern> subst;
    for (const auto& [k, v] : values) subst.emplace(k, Literal{v});
    PatternRef out{ref->name, {}, ref->fixed};
    out.args.reserve(ref->args.size());
    for (const auto& a : ref->args) out.args.push_back(protomon::substitute(a, subst));
    if (const PatternDecl* decl = spec.find_decl(ref->name)) {
      for (const auto& v : decl->free_variables()) {
        if (auto it = values.find(v); it != values.end()) out.fixed.emplace(v, it->second);
      }
    }
    return make_term(std::move(out), t.loc);
  }
  if (const auto* s = t.as<Seq>()) {
    return make_term(Seq{substitute(s->first, values, spec), substitute(s->second, values, spec)},
                     t.loc);
  }
  if (const auto* s = t.as<Shuffle>()) {
    return make_term(
        Shuffle{substitute(s->left, values, spec), substitute(s->right, values, spec)}, t.loc);
  }
  if (const auto* s = t.as<And>()) {
    return make_term(And{substitute(s->left, values, spec), substitute(s->right, values, spec)},
                     t.loc);
  }
  if (const auto* s = t.as<Or>()) {
    return make_term(Or{substitute(s->left, values, spec), substitute(s->right, values, spec)},
                     t.loc);
  }
  if (const auto* s = t.as<Star>()) {
    return make_term(Star{substitute(s->body, values, spec)}, t.loc);
  }
  if (const auto* s = t.as<Let>()) {
    Binding inner = values;
    for (const auto& v : s->vars) inner.erase(v);  // shadowed
    if (inner.empty()) return term;
    return make_term(Let{s->vars, substitute(s->body, inner, spec)}, t.loc);
  }
  return term;  // EqRef bodies are closed; Epsilon has no variables
}

std::set<std::string> free_variables(const Term& t, const Spec& spec) {
  std::set<std::string> out;
  if (const auto* ref = t.as<PatternRef>()) {
    for (const auto& a : ref->args) collect_variables(a, out);
    if (const PatternDecl* decl = spec.find_decl(ref->name)) {
      for (const auto& v : decl->free_variables()) {
        if (!ref->fixed.count(v)) out.insert(v);
      }
    }
  } else if (const auto* s = t.as<Seq>()) {
    out = free_variables(*s->first, spec);
    out.merge(free_variables(*s->second, spec));
  } else if (const auto* s = t.as<Shuffle>()) {
    out = free_variables(*s->left, spec);
    out.merge(free_variables(*s->right, spec));
  } else if (const auto* s = t.as<And>()) {
    out = free_variables(*s->left, spec);
    out.merge(free_variables(*s->right, spec));
  } else if (const auto* s = t.as<Or>()) {
    out = free_variables(*s->left, spec);
    out.merge(free_variables(*s->right, spec));
  } else if (const auto* s = t.as<Star>()) {
    out = free_variables(*s->body, spec);
  } else if (const auto* s = t.as<Let>()) {
    out = free_variables(*s->body, spec);
    for (const auto& v : s->vars) out.erase(v);
  }
  return out;
}

Monitor::Monitor(std::shared_ptr<const Spec> spec)
    : spec_(std::move(spec)), state_(new_monitor(*spec_)), last_live_(state_) {}

StepResult Monitor::step(const Event& event) {
  StepResult r = protomon::step(state_, event, *spec_);
  if (r.verdict == Verdict::violation && !first_violation_) {
    first_violation_ = r.state.events_consumed;
  }
  if (!r.state.latched_violation) last_live_ = r.state;
  state_ = r.state;
  return r;
}

std::vector<std::string> Monitor::expected() const {
  return expected_event_types(state_.latched_violation ? last_live_ : state_, *spec_);
}

}  // namespace protomon
