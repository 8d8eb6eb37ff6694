// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <algorithm>
#include <set>

#include "racemon/oracle.h"
#include "racemon/sp.h"
#include "racemon/tracegen.h"
#include "test_util.h"

using namespace racemon;
using rmtest::corpus_params;
using rmtest::has_pair;
using rmtest::pair_keys;
using rmtest::parse_or_die;
using rmtest::PairKey;

namespace {

// Shifts every pair's indices by d, for noise-prefix comparisons.
std::vector<PairKey> shifted_keys(const std::vector<RacePair>& ps, int64_t d) {
    std::vector<PairKey> ks;
    for (const auto& p : ps) ks.emplace_back(p.i + d, p.j + d, p.var);
    std::sort(ks.begin(), ks.end());
    return ks;
}

}  // namespace

TEST_SUITE("sp") {

TEST_CASE("the pinned writer pair is not reorderable, the free one is") {
    Trace pinned = parse_or_die(rmtest::kPinnedTrace);
    const RaceReport full = syncp_run(pinned);
    CHECK(pair_keys(full.pairs) == std::vector<PairKey>{{1, 2, "y"}, {3, 4, "x"}});
    CHECK_FALSE(has_pair(full.pairs, 3, 8));

    Trace free_tr = parse_or_die(rmtest::kFreeTrace);
    CHECK(pair_keys(syncp_run(free_tr).pairs) ==
          std::vector<PairKey>{{1, 2, "x"}, {1, 6, "x"}});
}

TEST_CASE("the distant pair needs a window that spans it") {
    Trace tr = parse_or_die(rmtest::kFreeTrace);
    CHECK(has_pair(ssp_run(tr, 7).pairs, 1, 6));
    CHECK(has_pair(ssp_run(tr, 6).pairs, 1, 6));  // span is exactly 6
    CHECK_FALSE(has_pair(ssp_run(tr, 3).pairs, 1, 6));
    CHECK(has_pair(ssp_run(tr, 3).pairs, 1, 2));
}

TEST_CASE("full-trace pair sets equal the brute-force oracle") {
    for (uint64_t k = 500; k < 600; ++k) {
        const GenParams p = corpus_params(k, 3, 3, 2, 60);
        const Trace tr = gen_trace(p);
        CAPTURE(k);
        CHECK(pair_keys(syncp_run(tr).pairs) == pair_keys(sp_pairs(tr)));
    }
}

TEST_CASE("windowed pair sets equal the span-filtered oracle") {
    for (uint64_t k = 600; k < 680; ++k) {
        const GenParams p = corpus_params(k, 3, 3, 2, 60);
        const Trace tr = gen_trace(p);
        const auto oracle = sp_pairs(tr);
        const int64_t ws[] = {4, 9, std::max<int64_t>(tr.size(), 2)};
        for (int64_t w : ws) {
            CAPTURE(k);
            CAPTURE(w);
            const RaceReport rep = ssp_run(tr, w);
            CHECK(pair_keys(rep.pairs) == pair_keys(filter_span(oracle, w)));
            CHECK(rep.decision == !filter_span(oracle, w).empty());
        }
    }
}

TEST_CASE("sections longer than the window spill and replay transparently") {
    int spilled_traces = 0;
    for (uint64_t k = 700; k < 760; ++k) {
        GenParams p = corpus_params(k, 3, 2, 2, 100);
        p.locks = std::max(p.locks, 1);
        p.lock_density = 0.3;
        p.cs_len_mean = 30.0;
        const Trace tr = gen_trace(p);
        bool has_long_cs = false;
        for (int64_t i = 0; i < tr.size(); ++i)
            if (tr.events[i].kind == OpKind::Acquire &&
                (match_of(tr, i) < 0 || match_of(tr, i) - i >= 4))
                has_long_cs = true;
        if (has_long_cs) ++spilled_traces;
        const auto oracle = sp_pairs(tr);
        for (int64_t w : {4, 8}) {
            CAPTURE(k);
            CAPTURE(w);
            CHECK(pair_keys(ssp_run(tr, w).pairs) ==
                  pair_keys(filter_span(oracle, w)));
        }
    }
    CHECK(spilled_traces >= 40);  // the corpus must actually exercise spills
}

TEST_CASE("evicting a load-bearing closed section over-reports conservatively") {
    // Four threads can chain two critical sections through last-write edges
    // so that the closure reaching e1 runs through a section whose release
    // left the window. The record budget (w + L) forces that record free, so
    // the windowed fixed point comes up short and reports the pair. The
    // over-report is conservative (the pair is genuinely concurrent), and it
    // cannot happen with three threads: there every enabling chain through a
    // freed record is already covered by the endpoints' own thread prefixes.
    Trace tr = parse_or_die(
        "T4|acq(L2)\n"   // 0: stays open across the window boundary
        "T4|w(u)\n"      // 1
        "T3|acq(L1)\n"   // 2
        "T3|w(v)\n"      // 3
        "T3|r(u)\n"      // 4: drags T4's prefix into the release closure
        "T3|rel(L1)\n"   // 5: evicted at w=8; its closure is load-bearing
        "T1|r(v)\n"      // 6: seeds the L1 acquire
        "T1|w(x)\n"      // 7: e1
        "T4|r(x)\n"      // 8: drags e1 into L2's release closure
        "T4|rel(L2)\n"   // 9
        "T2|acq(L1)\n"   // 10
        "T2|rel(L1)\n"   // 11
        "T2|acq(L2)\n"   // 12
        "T2|rel(L2)\n"   // 13
        "T2|w(x)\n");    // 14: e2
    const auto oracle = sp_pairs(tr);
    CHECK_FALSE(has_pair(oracle, 7, 14));          // full closure reaches e1
    CHECK(has_pair(hb_pairs(tr), 7, 14));          // yet the pair is concurrent
    CHECK(has_pair(ssp_run(tr, 8).pairs, 7, 14));  // windowed run reports it
    // With nothing evicted the fixed point sees every record and agrees.
    CHECK(pair_keys(syncp_run(tr).pairs) == pair_keys(oracle));
}

TEST_CASE("an independent prefix shifts verdicts without changing them") {
    for (uint64_t k = 800; k < 820; ++k) {
        GenParams p = corpus_params(k, 3, 3, 2, 50);
        const Trace base = gen_trace(p);
        const Trace noised = add_noise_prefix(base, 30, k);
        REQUIRE(check_well_formed(noised).ok);
        CAPTURE(k);
        CHECK(pair_keys(sp_pairs(noised)) == shifted_keys(sp_pairs(base), 30));
        CHECK(pair_keys(syncp_run(noised).pairs) ==
              shifted_keys(syncp_run(base).pairs, 30));
    }
}

TEST_CASE("head-only candidate checks stay sound") {
    DetectOptions heads;
    heads.complete_candidates = false;
    for (uint64_t k = 900; k < 950; ++k) {
        const GenParams p = corpus_params(k, 3, 3, 2, 60);
        const Trace tr = gen_trace(p);
        const auto complete = pair_keys(ssp_run(tr, 8).pairs);
        const RaceReport rep = ssp_run(tr, 8, heads);
        CAPTURE(k);
        for (const auto& pr : rep.pairs) {
            CHECK(pr.span() <= 8);
            CHECK(std::binary_search(complete.begin(), complete.end(),
                                     PairKey{pr.i, pr.j, pr.var}));
        }
    }
}

TEST_CASE("state scans and the record bound hold after every event") {
    DetectOptions opt;
    opt.assert_state = true;
    for (uint64_t k = 1000; k < 1030; ++k) {
        GenParams p = corpus_params(k, 3, 2, 2, 70);
        p.cs_len_mean = 20.0;
        if (p.locks > 0) p.lock_density = 0.25;
        const Trace tr = gen_trace(p);
        for (int64_t w : {4, 8, 16}) {
            const RaceReport rep = ssp_run(tr, w, opt);  // throws on a bad scan
            CHECK(rep.counters.peak_records <= w + p.locks);
        }
    }
}

TEST_CASE("granularity and first-race modes trim output, not verdicts") {
    for (uint64_t k = 1100; k < 1130; ++k) {
        const GenParams p = corpus_params(k, 3, 3, 2, 60);
        const Trace tr = gen_trace(p);
        const RaceReport base = ssp_run(tr, 8);

        DetectOptions first;
        first.first_race = true;
        const RaceReport f = ssp_run(tr, 8, first);
        CHECK(f.decision == base.decision);
        CHECK(f.pairs.size() <= 1);

        DetectOptions vars;
        vars.granularity = Granularity::Vars;
        const RaceReport v = ssp_run(tr, 8, vars);
        CHECK(v.racy_vars == base.racy_vars);

        DetectOptions dec;
        dec.granularity = Granularity::Decision;
        CHECK(ssp_run(tr, 8, dec).decision == base.decision);
    }
}

TEST_CASE("window construction rejects out-of-range sizes") {
    CHECK_THROWS_AS(make_short_sp_detector(1), std::invalid_argument);
}

TEST_CASE("dangling critical sections at the end of the trace are handled") {
    Trace tr = parse_or_die(
        "T1|acq(m)\n"
        "T1|w(x)\n"
        "T2|w(x)\n"
        "T2|acq(n)\n"
        "T2|r(x)\n");
    const auto oracle = sp_pairs(tr);
    CHECK(pair_keys(syncp_run(tr).pairs) == pair_keys(oracle));
    CHECK(pair_keys(ssp_run(tr, 3).pairs) == pair_keys(filter_span(oracle, 3)));
}

}  // TEST_SUITE
