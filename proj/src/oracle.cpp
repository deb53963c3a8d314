// SPDX-License-Identifier: Apache-2.0

#include "protomon/oracle.hpp"

#include <map>
#include <string>

namespace protomon {

namespace {

void collect_atoms(const Value& v, std::set<Atom>& out) {
  if (const Atom* a = v.atom()) {
    out.insert(*a);
  } else if (const ValueList* l = v.list()) {
    out.insert(l->begin(), l->end());
  } else {
    for (const auto& [_, child] : *v.record()) collect_atoms(child, out);
  }
}

class Denotation {
 public:
  Denotation(const Spec& spec, std::span<const Event> alphabet, std::size_t max_len)
      : spec_(spec), alphabet_(alphabet), max_len_(max_len) {
    std::set<Atom> atoms;
    for (const auto& e : alphabet_) collect_atoms(Value(e.fields()), atoms);
    domain_.assign(atoms.begin(), atoms.end());
    if (domain_.empty()) domain_.push_back(Atom{std::string("_")});
    solve_equations();
  }

  TraceSet of(const Term& t, const Binding& values) const {
    if (const auto* ref = t.as<PatternRef>()) return singletons(*ref, values);
    if (t.is<Epsilon>()) return {Trace{}};
    if (const auto* s = t.as<Seq>()) return concat(of(*s->first, values), of(*s->second, values));
    if (const auto* s = t.as<Shuffle>()) {
      return interleave(of(*s->left, values), of(*s->right, values));
    }
    if (const auto* s = t.as<And>()) {
      TraceSet l = of(*s->left, values);
      TraceSet r = of(*s->right, values);
      TraceSet out;
      for (const auto& u : l) {
        if (r.count(u)) out.insert(u);
      }
      return out;
    }
    if (const auto* s = t.as<Or>()) {
      TraceSet out = of(*s->left, values);
      out.merge(of(*s->right, values));
      return out;
    }
    if (const auto* s = t.as<Star>()) return closure(of(*s->body, values));
    if (const auto* s = t.as<Let>()) return project(*s, values);
    if (const auto* e = t.as<EqRef>()) {
      auto it = equations_.find(e->name);
      return it == equations_.end() ? TraceSet{} : it->second;
    }
    return {};
  }

 private:
  TraceSet singletons(const PatternRef& ref, const Binding& values) const {
    TraceSet out;
    const PatternDecl* decl = spec_.find_decl(ref.name);
    if (!decl || decl->params.size() != ref.args.size() || max_len_ == 0) return out;
    Binding env = values;
    for (const auto& [k, v] : ref.fixed) env.insert_or_assign(k, v);
    for (std::size_t i = 0; i < alphabet_.size(); ++i) {
      if (!match_decl(*decl, ref.args, alphabet_[i], env).empty()) out.insert(Trace{i});
    }
    return out;
  }

  // Union over every assignment of the let's variables from the alphabet's
  // atoms. Values outside that domain match no event, and every operator is
  // monotone in the events a pattern matches, so they add no traces.
  TraceSet project(const Let& let, const Binding& values) const {
    TraceSet out;
    std::vector<std::size_t> choice(let.vars.size(), 0);
    for (;;) {
      Binding env = values;
      for (std::size_t i = 0; i < let.vars.size(); ++i) {
        env.insert_or_assign(let.vars[i], domain_[choice[i]]);
      }
      out.merge(of(*let.body, env));
      std::size_t k = 0;
      while (k < choice.size() && ++choice[k] == domain_.size()) choice[k++] = 0;
      if (k == choice.size()) break;
    }
    return out;
  }

  std::vector<std::vector<const Trace*>> by_length(const TraceSet& s) const {
    std::vector<std::vector<const Trace*>> out(max_len_ + 1);
    for (const auto& t : s) {
      if (t.size() <= max_len_) out[t.size()].push_back(&t);
    }
    return out;
  }

  TraceSet concat(const TraceSet& a, const TraceSet& b) const {
    TraceSet out;
    auto bl = by_length(b);
    for (const auto& u : a) {
      for (std::size_t len = 0; u.size() + len <= max_len_; ++len) {
        for (const Trace* v : bl[len]) {
          Trace w = u;
          w.insert(w.end(), v->begin(), v->end());
          out.insert(std::move(w));
        }
      }
    }
    return out;
  }

  static void weave(const Trace& u, std::size_t i, const Trace& v, std::size_t j, Trace& acc,
                    TraceSet& out) {
    if (i == u.size() && j == v.size()) {
      out.insert(acc);
      return;
    }
    if (i < u.size()) {
      acc.push_back(u[i]);
      weave(u, i + 1, v, j, acc, out);
      acc.pop_back();
    }
    if (j < v.size()) {
      acc.push_back(v[j]);
      weave(u, i, v, j + 1, acc, out);
      acc.pop_back();
    }
  }

  TraceSet interleave(const TraceSet& a, const TraceSet& b) const {
    TraceSet out;
    auto bl = by_length(b);
    Trace acc;
    for (const auto& u : a) {
      for (std::size_t len = 0; u.size() + len <= max_len_; ++len) {
        for (const Trace* v : bl[len]) weave(u, 0, *v, 0, acc, out);
      }
    }
    return out;
  }

  // Least set containing the empty trace and closed under prefixing a member
  // of `body`.
  TraceSet closure(const TraceSet& body) const {
    TraceSet step;
    for (const auto& t : body) {
      if (!t.empty()) step.insert(t);
    }
    TraceSet acc{Trace{}};
    TraceSet frontier = acc;
    while (!frontier.empty()) {
      TraceSet next;
      for (auto& t : concat(step, frontier)) {
        if (!acc.count(t)) next.insert(t);
      }
      acc.insert(next.begin(), next.end());
      frontier = std::move(next);
    }
    return acc;
  }

  // Kleene iteration from the empty assignment; the trace-set lattice is
  // finite at bounded length, so this reaches the least fixpoint.
  void solve_equations() {
    for (const auto& e : spec_.equations) equations_[e.name] = {};
    for (bool changed = true; changed;) {
      changed = false;
      std::map<std::string, TraceSet> next;
      for (const auto& e : spec_.equations) next[e.name] = of(*e.body, {});
      if (next != equations_) {
        equations_ = std::move(next);
        changed = true;
      }
    }
  }

  const Spec& spec_;
  std::span<const Event> alphabet_;
  std::size_t max_len_;
  std::vector<Atom> domain_;
  std::map<std::string, TraceSet> equations_;
};

}  // namespace

TraceSet enumerate_term(const Spec& spec, const Term& term, std::span<const Event> alphabet,
                        std::size_t max_len) {
  Denotation d(spec, alphabet, max_len);
  return d.of(term, {});
}

TraceSet enumerate_traces(const Spec& spec, std::span<const Event> alphabet,
                          std::size_t max_len) {
  Denotation d(spec, alphabet, max_len);
  return d.of(*make_term(EqRef{"Main"}), {});
}

}  // namespace protomon
