// SPDX-License-Identifier: MIT
// Options shared by the streaming detectors.
#pragma once

#include <cstdint>

namespace racemon {

enum class Granularity : uint8_t { Pairs = 0, Vars = 1, Decision = 2 };

struct DetectOptions {
    Granularity granularity = Granularity::Pairs;
    bool first_race = false;      // stop the run at the first reported pair
    bool assert_state = false;    // run full consistency scans after every event
    bool complete_candidates = true;  // sync-preserving detector: check every live
                                      // candidate record, not just the newest per thread
};

}  // namespace racemon
