// SPDX-License-Identifier: MIT
#include "racemon/tracegen.h"

#include <random>
#include <stdexcept>
#include <string>

namespace racemon {
namespace {

// std::mt19937_64 is fully specified by the standard; reductions below avoid
// std distributions, whose outputs vary across library implementations.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(uint64_t seed) : gen(seed) {}
    uint64_t next() { return gen(); }
    int64_t below(int64_t n) { return static_cast<int64_t>(next() % static_cast<uint64_t>(n)); }
    double unit() { return (next() >> 11) * 0x1.0p-53; }
};

void setup_names(Trace& tr, const GenParams& p) {
    for (int32_t t = 0; t < p.threads; ++t) tr.intern_thread("T" + std::to_string(t + 1));
    for (int32_t v = 0; v < p.vars; ++v) tr.intern_var("x" + std::to_string(v));
    for (int32_t l = 0; l < p.locks; ++l) tr.intern_lock("l" + std::to_string(l));
}

// First name of the form <prefix><k> not already interned.
std::string fresh_name(const std::vector<std::string>& names, const std::string& prefix) {
    for (int32_t k = 1;; ++k) {
        std::string cand = prefix + std::to_string(k);
        bool taken = false;
        for (const std::string& n : names)
            if (n == cand) {
                taken = true;
                break;
            }
        if (!taken) return cand;
    }
}

void validate(const GenParams& p) {
    if (p.threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (p.length < 0) throw std::invalid_argument("length must be >= 0");
    if (p.vars < 1) throw std::invalid_argument("vars must be >= 1");
    if (p.locks < 0) throw std::invalid_argument("locks must be >= 0");
    if (p.lock_density > 0.0 && p.locks == 0)
        throw std::invalid_argument("lock_density > 0 requires locks > 0");
    if (p.lock_density < 0.0 || p.lock_density > 1.0 || p.read_bias < 0.0 ||
        p.read_bias > 1.0)
        throw std::invalid_argument("densities must lie in [0, 1]");
    if (p.cs_len_mean < 1.0) throw std::invalid_argument("cs_len_mean must be >= 1");
}

}  // namespace

Trace gen_trace(const GenParams& p) {
    validate(p);
    Trace tr;
    setup_names(tr, p);
    Rng rng(p.seed);

    std::vector<std::vector<int32_t>> held(p.threads);  // per-thread LIFO lock stacks
    std::vector<char> lock_busy(p.locks, 0);
    int64_t held_total = 0;
    const double close_prob = 1.0 / p.cs_len_mean;

    for (int64_t i = 0; i < p.length; ++i) {
        const int64_t remaining = p.length - i;
        // Reserve room for the closing releases unless they may dangle.
        if (!p.allow_dangling && held_total == remaining) {
            int32_t t = 0;
            while (held[t].empty()) ++t;
            const int32_t lk = held[t].back();
            held[t].pop_back();
            lock_busy[lk] = 0;
            --held_total;
            tr.events.push_back(Event{t, OpKind::Release, lk});
            continue;
        }
        const int32_t t = static_cast<int32_t>(rng.below(p.threads));
        if (!held[t].empty() && rng.unit() < close_prob) {
            const int32_t lk = held[t].back();
            held[t].pop_back();
            lock_busy[lk] = 0;
            --held_total;
            tr.events.push_back(Event{t, OpKind::Release, lk});
            continue;
        }
        if (p.locks > 0 && rng.unit() < p.lock_density &&
            (p.allow_dangling || held_total + 1 < remaining)) {
            int32_t free_count = 0;
            for (int32_t l = 0; l < p.locks; ++l)
                if (!lock_busy[l]) ++free_count;
            if (free_count > 0) {
                int64_t pick = rng.below(free_count);
                int32_t lk = 0;
                for (int32_t l = 0; l < p.locks; ++l) {
                    if (lock_busy[l]) continue;
                    if (pick-- == 0) {
                        lk = l;
                        break;
                    }
                }
                lock_busy[lk] = 1;
                held[t].push_back(lk);
                ++held_total;
                tr.events.push_back(Event{t, OpKind::Acquire, lk});
                continue;
            }
        }
        const int32_t x = static_cast<int32_t>(rng.below(p.vars));
        const OpKind k = rng.unit() < p.read_bias ? OpKind::Read : OpKind::Write;
        tr.events.push_back(Event{t, k, x});
    }
    tr.finalize();
    return tr;
}

PlantedRace plant_short_race(const GenParams& p, int64_t target_span) {
    if (target_span < 2) throw std::invalid_argument("target_span must be >= 2");
    if (p.threads < 2) throw std::invalid_argument("planting needs >= 2 threads");
    Trace tr = gen_trace(p);

    const int32_t racy_var = tr.intern_var(fresh_name(tr.var_names, "px"));
    const int32_t filler_var = tr.intern_var(fresh_name(tr.var_names, "pf"));
    const int64_t pos = tr.size() / 2;

    // Contiguous block of plain accesses: insertion cannot break the lock
    // protocol, and nothing inside the block synchronizes, so the endpoints
    // stay unordered.
    std::vector<Event> block;
    block.push_back(Event{0, OpKind::Write, racy_var});
    for (int64_t k = 0; k < target_span - 2; ++k)
        block.push_back(Event{0, OpKind::Read, filler_var});
    block.push_back(Event{1, OpKind::Write, racy_var});

    tr.events.insert(tr.events.begin() + pos, block.begin(), block.end());
    tr.finalize();
    return PlantedRace{std::move(tr), pos, pos + target_span - 1};
}

Trace add_noise_prefix(const Trace& base, int64_t count, uint64_t seed) {
    Trace tr;
    tr.thread_names = base.thread_names;
    tr.var_names = base.var_names;
    tr.lock_names = base.lock_names;
    const int32_t noise_tid = tr.intern_thread(fresh_name(tr.thread_names, "T"));
    Rng rng(seed);
    const int32_t noise_vars = 4;
    std::vector<int32_t> vids;
    for (int32_t v = 0; v < noise_vars; ++v)
        vids.push_back(tr.intern_var(fresh_name(tr.var_names, "nz")));
    for (int64_t k = 0; k < count; ++k) {
        const int32_t x = vids[rng.below(noise_vars)];
        const OpKind kind = rng.unit() < 0.5 ? OpKind::Read : OpKind::Write;
        tr.events.push_back(Event{noise_tid, kind, x});
    }
    tr.events.insert(tr.events.end(), base.events.begin(), base.events.end());
    tr.finalize();
    return tr;
}

}  // namespace racemon
