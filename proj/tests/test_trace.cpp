// SPDX-License-Identifier: MIT
#include <doctest.h>

#include "racemon/trace.h"
#include "test_util.h"

using namespace racemon;

TEST_SUITE("trace") {

TEST_CASE("parse ignores comments and round-trips through serialize") {
    const std::string text =
        "# header comment\n"
        "T1|w(x)\n"
        "\n"
        "  T2|r(x)  \n"
        "T1|acq(m)\n"
        "T1|rel(m)\n";
    Trace tr;
    WfReport err;
    REQUIRE(parse_trace(text, tr, err));
    REQUIRE(tr.size() == 4);
    CHECK(tr.events[0] == Event{0, OpKind::Write, 0});
    CHECK(tr.events[1] == Event{1, OpKind::Read, 0});
    CHECK(tr.events[2] == Event{0, OpKind::Acquire, 0});
    CHECK(tr.events[3] == Event{0, OpKind::Release, 0});
    CHECK(tr.src_lines == std::vector<int32_t>{2, 4, 5, 6});

    const std::string canon = serialize(tr);
    CHECK(canon == "T1|w(x)\nT2|r(x)\nT1|acq(m)\nT1|rel(m)\n");
    Trace tr2;
    REQUIRE(parse_trace(canon, tr2, err));
    CHECK(tr2.events == tr.events);
    CHECK(serialize(tr2) == canon);
}

TEST_CASE("names intern densely in order of first appearance") {
    Trace tr = rmtest::parse_or_die("T9|w(b)\nT2|r(a)\nT9|r(a)\n");
    CHECK(tr.thread_names == std::vector<std::string>{"T9", "T2"});
    CHECK(tr.var_names == std::vector<std::string>{"b", "a"});
    CHECK(tr.events[2].tid == 0);
    CHECK(tr.events[2].obj == 1);
}

TEST_CASE("malformed lines are rejected with their location") {
    const char* bad[] = {
        "T|r(x)",     // thread needs digits
        "X1|r(x)",    // threads start with T
        "T1|z(x)",    // unknown op
        "T1|r()",     // empty object
        "T1|r(x",     // missing paren
        "T1|r(x)y",   // trailing garbage
        "T1 r(x)",    // missing separator
        "T1|acq(x))", // double paren
    };
    for (const char* line : bad) {
        Trace tr;
        WfReport err;
        CAPTURE(line);
        CHECK_FALSE(parse_trace(std::string("T1|w(a)\n") + line + "\n", tr, err));
        CHECK(err.line == 2);
        CHECK_FALSE(err.message.empty());
    }
}

TEST_CASE("lock discipline violations are rejected, dangling acquires are not") {
    auto wf = [](const char* text) {
        Trace tr;
        WfReport err;
        REQUIRE(parse_trace(text, tr, err));
        return check_well_formed(tr);
    };

    WfReport r = wf("T1|acq(m)\nT1|acq(m)\n");
    CHECK_FALSE(r.ok);
    CHECK(r.index == 1);

    r = wf("T1|acq(m)\nT2|acq(m)\n");
    CHECK_FALSE(r.ok);
    CHECK(r.index == 1);

    r = wf("T1|rel(m)\n");
    CHECK_FALSE(r.ok);
    CHECK(r.index == 0);

    r = wf("T1|acq(m)\nT2|rel(m)\n");
    CHECK_FALSE(r.ok);
    CHECK(r.index == 1);

    CHECK(wf("T1|acq(m)\nT1|w(x)\n").ok);  // dangling acquire is legal
    CHECK(wf("T1|acq(m)\nT1|rel(m)\nT2|acq(m)\nT2|rel(m)\n").ok);
}

TEST_CASE("incremental checker agrees with the whole-trace check") {
    const char* texts[] = {
        "T1|acq(m)\nT1|rel(m)\nT1|rel(m)\n",
        "T1|acq(m)\nT2|acq(n)\nT2|rel(n)\nT1|rel(m)\n",
        "T1|acq(m)\nT2|acq(m)\n",
    };
    for (const char* text : texts) {
        Trace tr;
        WfReport err;
        REQUIRE(parse_trace(text, tr, err));
        const WfReport whole = check_well_formed(tr);
        WfChecker chk;
        WfReport step_err;
        bool ok = true;
        int64_t fail_at = -1;
        for (int64_t i = 0; i < tr.size() && ok; ++i) {
            ok = chk.step(tr.events[i], i, i + 1, step_err);
            if (!ok) fail_at = i;
        }
        CAPTURE(text);
        CHECK(ok == whole.ok);
        if (!ok) CHECK(fail_at == whole.index);
    }
}

TEST_CASE("derived indices: thread order, matches, last writes") {
    Trace tr = rmtest::parse_or_die(
        "T1|w(x)\n"   // 0
        "T2|r(x)\n"   // 1
        "T1|acq(m)\n" // 2
        "T2|w(x)\n"   // 3
        "T1|rel(m)\n" // 4
        "T1|r(x)\n"   // 5
        "T2|acq(m)\n" // 6: dangling
    );
    CHECK(tr.local_idx == std::vector<int32_t>{0, 0, 1, 1, 2, 3, 2});
    CHECK(prev(tr, 0) == -1);
    CHECK(prev(tr, 5) == 4);
    CHECK(prev(tr, 6) == 3);
    CHECK(match_of(tr, 2) == 4);
    CHECK(match_of(tr, 4) == 2);
    CHECK(match_of(tr, 6) == -1);
    CHECK(lw(tr, 1) == 0);
    CHECK(lw(tr, 5) == 3);
    CHECK(lw(tr, 0) == -1);  // writes have no lw
}

TEST_CASE("conflicts and spans") {
    const Event w1{0, OpKind::Write, 0};
    const Event r2{1, OpKind::Read, 0};
    const Event r3{2, OpKind::Read, 0};
    const Event wother{1, OpKind::Write, 1};
    const Event acq{1, OpKind::Acquire, 0};
    CHECK(conflicting(w1, r2));
    CHECK(conflicting(r2, w1));
    CHECK_FALSE(conflicting(r2, r3));                    // two reads
    CHECK_FALSE(conflicting(w1, wother));                // different vars
    CHECK_FALSE(conflicting(w1, Event{0, OpKind::Read, 0}));  // same thread
    CHECK_FALSE(conflicting(w1, acq));                   // sync is not an access
    CHECK(span(0, 1) == 2);
    CHECK(span(3, 3) == 1);
    CHECK(span(2, 9) == 8);
}

TEST_CASE("empty input parses to an empty trace") {
    Trace tr;
    WfReport err;
    CHECK(parse_trace("", tr, err));
    CHECK(tr.size() == 0);
    CHECK(parse_trace("# only a comment\n\n", tr, err));
    CHECK(tr.size() == 0);
    CHECK(check_well_formed(tr).ok);
}

}  // TEST_SUITE
