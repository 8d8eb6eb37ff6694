// SPDX-License-Identifier: MIT
// Brute-force ground truth for the detectors, computed directly from the
// ordering definitions with no code shared with the streaming engines.
// Capped at 500 events.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "racemon/report.h"
#include "racemon/trace.h"

namespace racemon {

// Membership bitset over trace indices.
using EventSet = std::vector<bool>;

// All conflicting pairs (i, j), i < j, unordered by the happens-before order
// (thread order plus release->acquire on the same lock, transitively closed).
std::vector<RacePair> hb_pairs(const Trace& tr);

// Least set containing S that is closed under thread-order predecessors and
// last-writes of member reads.
EventSet tl_closure(const Trace& tr, const EventSet& s);

// Least set containing {prev(i1), prev(i2)} (absent prevs contribute nothing)
// closed under: thread-order predecessors; last-writes of member reads;
// acquires of critical sections that strictly contain a member; and matching
// releases of member acquires that are followed by a later member acquire of
// the same lock.
EventSet sp_ideal(const Trace& tr, int64_t i1, int64_t i2);

// All conflicting pairs whose ideal contains neither endpoint.
std::vector<RacePair> sp_pairs(const Trace& tr);

// Keeps pairs with span <= w.
std::vector<RacePair> filter_span(const std::vector<RacePair>& pairs, int64_t w);

// Oracle runs wrapped as reports (window w <= 0 means no span filter).
RaceReport oracle_hb_report(const Trace& tr, int64_t w);
RaceReport oracle_sp_report(const Trace& tr, int64_t w);

}  // namespace racemon
