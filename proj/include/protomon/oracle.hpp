// SPDX-License-Identifier: Apache-2.0

// Bounded denotational semantics of protocol terms, computed by set
// construction over a finite alphabet. It shares only event matching with
// the online monitor and serves as its reference in tests.

#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "protomon/term.hpp"

namespace protomon {

/// A trace as indices into the alphabet.
using Trace = std::vector<std::size_t>;
using TraceSet = std::set<Trace>;

/// Traces of length <= max_len over `alphabet` in the language of `Main`.
TraceSet enumerate_traces(const Spec& spec, std::span<const Event> alphabet, std::size_t max_len);

/// Same for an arbitrary closed term of `spec`.
TraceSet enumerate_term(const Spec& spec, const Term& term, std::span<const Event> alphabet,
                        std::size_t max_len);

}  // namespace protomon
