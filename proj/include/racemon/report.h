// SPDX-License-Identifier: MIT
// Race reports and their serialized forms.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace racemon {

// Raised on violated internal invariants; the CLI maps it to exit code 2.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

#define RM_CHECK(cond, msg)                                  \
    do {                                                     \
        if (!(cond)) throw ::racemon::InternalError((msg));  \
    } while (0)

struct RacePair {
    int64_t i = -1;
    int64_t j = -1;
    std::string var;
    std::string kinds;  // two chars from {r,w}: kind at i, kind at j

    int64_t span() const { return j - i + 1; }
    bool operator==(const RacePair&) const = default;
};

struct RunCounters {
    int64_t events = 0;
    int64_t races = 0;
    int64_t peak_clocks = 0;   // live vector clocks (threads + allocated lock/var clocks)
    int64_t peak_records = 0;  // live event-local records (window slots / access + CS entries)
};

struct RaceReport {
    std::string algo;
    int64_t window = 0;  // 0 = unwindowed
    uint64_t trace_hash = 0;
    bool decision = false;
    std::vector<RacePair> pairs;          // sorted by (i, j), deduplicated
    std::vector<std::string> racy_vars;   // sorted, unique
    RunCounters counters;
};

// Sorts/dedups pairs, derives racy_vars and decision from them.
void canonicalize(RaceReport& rep);

std::string to_json(const RaceReport& rep);
std::string to_csv(const RaceReport& rep);
// Parses a JSON report produced by to_json (used by the diff command).
bool from_json(const std::string& text, RaceReport& rep, std::string& err);

// FNV-1a 64-bit.
struct Fnv1a64 {
    uint64_t state = 1469598103934665603ull;
    void update(const void* data, size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (size_t k = 0; k < n; ++k) {
            state ^= p[k];
            state *= 1099511628211ull;
        }
    }
    uint64_t digest() const { return state; }
};

}  // namespace racemon
