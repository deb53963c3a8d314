// SPDX-License-Identifier: Apache-2.0

// Online verdict engine. A monitor state is the set of residual terms that
// are still viable after the events seen so far; each event replaces every
// residual with its derivatives.
//
// Variables are scoped by substitution: when an event binds a variable of
// an enclosing `let`, the value is written into the let's residual body as a
// literal and the variable leaves the binding. Successive iterations of a
// starred let therefore start with fresh variables, and a completed let
// leaves nothing behind.

#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "protomon/term.hpp"

namespace protomon {

enum class Verdict { accepting, continuing, violation };

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct Configuration {
  TermPtr residual;
  /// Variables bound by the event being consumed that still await
  /// substitution by their let. Empty between events.
  Binding binding;
};

struct MonitorState {
  std::vector<Configuration> configs;  // sorted, deduplicated
  bool latched_violation = false;
  std::size_t events_consumed = 0;
};

MonitorState new_monitor(const Spec& spec);

bool nullable(const Term& term, const Spec& spec);
bool nullable(const Configuration& config, const Spec& spec);

/// All (residual, binding) successors of `term` on `event`. Bindings hold the
/// variables free in `term` that the event fixed.
std::vector<Configuration> successors(const TermPtr& term, const Event& event, const Spec& spec);

/// Requires !state.latched_violation. Latches when no configuration survives.
MonitorState derive(const MonitorState& state, const Event& event, const Spec& spec);

Verdict verdict_of(const MonitorState& state, const Spec& spec);

struct StepResult {
  MonitorState state;
  Verdict verdict;
  bool relevant;
};

/// One monitoring step. Irrelevant events and events after a violation leave
/// the configurations untouched; every event advances events_consumed.
StepResult step(const MonitorState& state, const Event& event, const Spec& spec);

/// Event types some configuration could consume next, in concrete syntax.
std::vector<std::string> expected_event_types(const MonitorState& state, const Spec& spec);

/// Replaces free occurrences of the bound variables in `term` by literals.
TermPtr substitute(const TermPtr& term, const Binding& values, const Spec& spec);
std::set<std::string> free_variables(const Term& term, const Spec& spec);

/// Stateful convenience wrapper around step(); remembers the last live state
/// so that a violation can be explained.
class Monitor {
 public:
  explicit Monitor(std::shared_ptr<const Spec> spec);

  StepResult step(const Event& event);
  const MonitorState& state() const { return state_; }
  const Spec& spec() const { return *spec_; }
  Verdict verdict() const { return verdict_of(state_, *spec_); }
  std::optional<std::size_t> first_violation() const { return first_violation_; }
  /// Event types that would have been accepted instead of the violating one,
  /// or the currently acceptable ones if nothing was violated.
  std::vector<std::string> expected() const;

 private:
  std::shared_ptr<const Spec> spec_;
  MonitorState state_;
  MonitorState last_live_;
  std::optional<std::size_t> first_violation_;
};

}  // namespace protomon
