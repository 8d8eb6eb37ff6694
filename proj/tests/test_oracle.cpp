// SPDX-License-Identifier: MIT
#include <doctest.h>

#include "racemon/oracle.h"
#include "racemon/report.h"
#include "test_util.h"

using namespace racemon;
using rmtest::pair_keys;
using rmtest::parse_or_die;
using rmtest::PairKey;

namespace {

EventSet singleton(const Trace& tr, int64_t i) {
    EventSet s(tr.size(), false);
    s[i] = true;
    return s;
}

std::vector<int64_t> members(const EventSet& s) {
    std::vector<int64_t> out;
    for (size_t k = 0; k < s.size(); ++k)
        if (s[k]) out.push_back((int64_t)k);
    return out;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("unordered conflicting pairs of the swap trace") {
    Trace tr = parse_or_die(rmtest::kSwapTrace);
    auto ps = hb_pairs(tr);
    CHECK(pair_keys(ps) == std::vector<PairKey>{{0, 3, "y"}, {1, 2, "x"}});
    for (const auto& p : ps) CHECK(p.kinds == "ww");
}

TEST_CASE("a release->acquire bridge orders the writer pair") {
    Trace tr = parse_or_die(rmtest::kBridgedTrace);
    CHECK(hb_pairs(tr).empty());
}

TEST_CASE("unordered pairs of the pinned trace include the distant writer pair") {
    Trace tr = parse_or_die(rmtest::kPinnedTrace);
    CHECK(pair_keys(hb_pairs(tr)) ==
          std::vector<PairKey>{{1, 2, "y"}, {3, 4, "x"}, {3, 8, "x"}});
}

TEST_CASE("thread-local closure pulls in predecessors and last writes") {
    Trace tr = parse_or_die(rmtest::kFreeTrace);
    const EventSet c = tl_closure(tr, singleton(tr, 2));
    CHECK(members(c) == std::vector<int64_t>{0, 1, 2});

    CHECK(members(tl_closure(tr, EventSet(tr.size(), false))).empty());
    CHECK(tl_closure(tr, c) == c);  // closure is idempotent
}

TEST_CASE("candidate ideal of the pinned writer pair contains its first endpoint") {
    Trace tr = parse_or_die(rmtest::kPinnedTrace);
    const EventSet ideal = sp_ideal(tr, 3, 8);
    CHECK(members(ideal) == std::vector<int64_t>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(ideal[3]);
    CHECK_FALSE(ideal[8]);
}

TEST_CASE("candidate ideal of the free writer pair avoids both endpoints") {
    Trace tr = parse_or_die(rmtest::kFreeTrace);
    const EventSet ideal = sp_ideal(tr, 1, 6);
    CHECK(members(ideal) == std::vector<int64_t>{4, 5});
}

TEST_CASE("first events with no predecessors seed an empty ideal") {
    Trace tr = parse_or_die("T1|w(x)\nT2|w(x)\n");
    CHECK(members(sp_ideal(tr, 0, 1)).empty());
    CHECK(pair_keys(sp_pairs(tr)) == std::vector<PairKey>{{0, 1, "x"}});
}

TEST_CASE("reorderable pairs of the proof traces") {
    Trace pinned = parse_or_die(rmtest::kPinnedTrace);
    CHECK(pair_keys(sp_pairs(pinned)) ==
          std::vector<PairKey>{{1, 2, "y"}, {3, 4, "x"}});

    Trace free_tr = parse_or_die(rmtest::kFreeTrace);
    CHECK(pair_keys(sp_pairs(free_tr)) ==
          std::vector<PairKey>{{1, 2, "x"}, {1, 6, "x"}});
}

TEST_CASE("span filter") {
    Trace tr = parse_or_die(rmtest::kSwapTrace);
    const auto ps = hb_pairs(tr);
    CHECK(pair_keys(filter_span(ps, 2)) == std::vector<PairKey>{{1, 2, "x"}});
    CHECK(filter_span(ps, 4) == ps);
    CHECK(filter_span(ps, 100) == ps);
    CHECK(filter_span(ps, 1).empty());
}

TEST_CASE("oracle reports carry the span filter and canonical ordering") {
    Trace tr = parse_or_die(rmtest::kSwapTrace);
    RaceReport rep = oracle_hb_report(tr, 2);
    CHECK(rep.algo == "oracle-hb");
    CHECK(rep.window == 2);
    CHECK(rep.decision);
    CHECK(pair_keys(rep.pairs) == std::vector<PairKey>{{1, 2, "x"}});
    CHECK(rep.racy_vars == std::vector<std::string>{"x"});
    CHECK(rep.counters.races == 1);

    RaceReport sp = oracle_sp_report(tr, 0);
    CHECK(sp.algo == "oracle-sp");
    CHECK(sp.window == 0);
    CHECK(pair_keys(sp.pairs) == std::vector<PairKey>{{0, 3, "y"}, {1, 2, "x"}});
}

TEST_CASE("oracles refuse traces beyond the brute-force cap") {
    Trace tr;
    const int32_t t = tr.intern_thread("T1");
    const int32_t x = tr.intern_var("x");
    for (int k = 0; k < 501; ++k) tr.events.push_back(Event{t, OpKind::Read, x});
    tr.finalize();
    CHECK_THROWS_AS(hb_pairs(tr), InternalError);
    CHECK_THROWS_AS(sp_pairs(tr), InternalError);
    CHECK_THROWS_AS(tl_closure(tr, EventSet(tr.size(), false)), InternalError);
    CHECK_THROWS_AS(sp_ideal(tr, 0, 1), InternalError);
}

}  // TEST_SUITE
