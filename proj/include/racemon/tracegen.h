// SPDX-License-Identifier: MIT
// Deterministic generator of well-formed random traces.
#pragma once

#include <cstdint>

#include "racemon/trace.h"

namespace racemon {

struct GenParams {
    int32_t threads = 2;
    int32_t vars = 2;
    int32_t locks = 1;
    int64_t length = 50;
    double lock_density = 0.1;   // chance a step opens a critical section
    double read_bias = 0.5;      // reads vs writes among accesses
    double cs_len_mean = 3.0;    // geometric critical-section body length
    bool allow_dangling = false; // leave locks held at end of trace
    uint64_t seed = 1;
};

// Same params => bit-identical trace. Always well-formed; locks are held in
// properly nested (per-thread LIFO) order. Throws std::invalid_argument on
// infeasible params (lock_density > 0 with locks == 0, threads < 1, ...).
Trace gen_trace(const GenParams& p);

// gen_trace plus one planted conflicting write pair on a fresh variable at
// exactly the target span, with only plain accesses between the endpoints, so
// the pair is a race by construction. target_span >= 2 and the result must
// still fit length + target_span events; the planted endpoints use threads 0
// and 1 (threads >= 2 required).
struct PlantedRace {
    Trace trace;
    int64_t i = -1;  // first endpoint
    int64_t j = -1;  // second endpoint
};
PlantedRace plant_short_race(const GenParams& p, int64_t target_span);

// Prepends `count` events of a fresh thread touching fresh variables; the
// prefix cannot synchronize or conflict with the base trace. Base indices
// shift up by count.
Trace add_noise_prefix(const Trace& base, int64_t count, uint64_t seed);

}  // namespace racemon
