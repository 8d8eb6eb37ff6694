// SPDX-License-Identifier: MIT
#include "racemon/oracle.h"

#include <algorithm>
#include <functional>

#include "run_util.h"

namespace racemon {
namespace {

constexpr int64_t kOracleCap = 500;

char kind_char(OpKind k) { return k == OpKind::Read ? 'r' : 'w'; }

// Per-lock acquire lists. Shared precomputation for the closures.
struct ClosureCtx {
    explicit ClosureCtx(const Trace& tr) : tr(tr) {
        lock_acqs.resize(tr.lock_count());
        for (int64_t i = 0; i < tr.size(); ++i)
            if (tr.events[i].kind == OpKind::Acquire)
                lock_acqs[tr.events[i].obj].push_back(i);
    }

    const Trace& tr;
    std::vector<std::vector<int64_t>> lock_acqs;
};

// Least fixed point containing the seed, closed under thread order and
// last-write edges; with sp_rules also under the same-lock acquire-pair
// release rule (the earlier of two member acquires pulls in its release).
class Closure {
  public:
    Closure(const ClosureCtx& ctx, bool sp_rules)
        : ctx_(ctx), sp_(sp_rules), member_(ctx.tr.size(), 0) {}

    void add(int64_t i) {
        if (i < 0 || member_[i]) return;
        member_[i] = 1;
        work_.push_back(i);
    }

    void run() {
        const Trace& tr = ctx_.tr;
        while (!work_.empty()) {
            const int64_t f = work_.back();
            work_.pop_back();
            add(tr.prev_idx[f]);
            if (tr.events[f].kind == OpKind::Read) add(tr.lw_idx[f]);
            if (!sp_) continue;
            if (tr.events[f].kind == OpKind::Acquire) {
                bool later_member = false;
                for (int64_t b : ctx_.lock_acqs[tr.events[f].obj]) {
                    if (b == f || !member_[b]) continue;
                    if (b < f)
                        add(tr.match_idx[b]);
                    else
                        later_member = true;
                }
                if (later_member) add(tr.match_idx[f]);
            }
        }
    }

    bool contains(int64_t i) const { return member_[i] != 0; }
    EventSet take() {
        EventSet s(member_.size());
        for (size_t i = 0; i < member_.size(); ++i) s[i] = member_[i] != 0;
        return s;
    }

  private:
    const ClosureCtx& ctx_;
    bool sp_;
    std::vector<char> member_;
    std::vector<int64_t> work_;
};

std::vector<RacePair> collect_pairs(const Trace& tr,
                                    const std::function<bool(int64_t, int64_t)>& racy) {
    std::vector<RacePair> out;
    for (int64_t j = 0; j < tr.size(); ++j) {
        if (!is_access(tr.events[j].kind)) continue;
        for (int64_t i = 0; i < j; ++i) {
            if (!conflicting(tr.events[i], tr.events[j])) continue;
            if (!racy(i, j)) continue;
            RacePair p;
            p.i = i;
            p.j = j;
            p.var = tr.var_names[tr.events[i].obj];
            p.kinds = {kind_char(tr.events[i].kind), kind_char(tr.events[j].kind)};
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace

std::vector<RacePair> hb_pairs(const Trace& tr) {
    RM_CHECK(tr.size() <= kOracleCap, "oracle input too large");
    const int64_t n = tr.size();
    const size_t words = static_cast<size_t>((n + 63) / 64);
    // reach[i] = set of events ordered at or before i by happens-before.
    std::vector<std::vector<uint64_t>> reach(n, std::vector<uint64_t>(words, 0));
    // Running union of the reach sets of all releases seen per lock.
    std::vector<std::vector<uint64_t>> rel_union(tr.lock_count(),
                                                 std::vector<uint64_t>(words, 0));
    std::vector<int64_t> tlast(tr.thread_count(), -1);
    for (int64_t i = 0; i < n; ++i) {
        const Event& ev = tr.events[i];
        auto& row = reach[i];
        if (tlast[ev.tid] >= 0) row = reach[tlast[ev.tid]];
        tlast[ev.tid] = i;
        if (ev.kind == OpKind::Acquire)
            for (size_t k = 0; k < words; ++k) row[k] |= rel_union[ev.obj][k];
        row[i / 64] |= 1ull << (i % 64);
        if (ev.kind == OpKind::Release)
            for (size_t k = 0; k < words; ++k) rel_union[ev.obj][k] |= row[k];
    }
    return collect_pairs(tr, [&](int64_t i, int64_t j) {
        return (reach[j][i / 64] & (1ull << (i % 64))) == 0;
    });
}

EventSet tl_closure(const Trace& tr, const EventSet& s) {
    RM_CHECK(tr.size() <= kOracleCap, "oracle input too large");
    ClosureCtx ctx(tr);
    Closure c(ctx, /*sp_rules=*/false);
    for (int64_t i = 0; i < tr.size(); ++i)
        if (i < (int64_t)s.size() && s[i]) c.add(i);
    c.run();
    return c.take();
}

EventSet sp_ideal(const Trace& tr, int64_t i1, int64_t i2) {
    RM_CHECK(tr.size() <= kOracleCap, "oracle input too large");
    ClosureCtx ctx(tr);
    Closure c(ctx, /*sp_rules=*/true);
    c.add(tr.prev_idx[i1]);
    c.add(tr.prev_idx[i2]);
    c.run();
    return c.take();
}

std::vector<RacePair> sp_pairs(const Trace& tr) {
    RM_CHECK(tr.size() <= kOracleCap, "oracle input too large");
    ClosureCtx ctx(tr);
    return collect_pairs(tr, [&](int64_t i, int64_t j) {
        Closure c(ctx, /*sp_rules=*/true);
        c.add(tr.prev_idx[i]);
        c.add(tr.prev_idx[j]);
        c.run();
        return !c.contains(i) && !c.contains(j);
    });
}

std::vector<RacePair> filter_span(const std::vector<RacePair>& pairs, int64_t w) {
    std::vector<RacePair> out;
    for (const RacePair& p : pairs)
        if (p.span() <= w) out.push_back(p);
    return out;
}

namespace {

RaceReport oracle_report(const Trace& tr, int64_t w, const char* algo,
                         std::vector<RacePair> pairs) {
    RaceReport rep;
    rep.algo = algo;
    rep.window = w > 0 ? w : 0;
    rep.pairs = w > 0 ? filter_span(pairs, w) : std::move(pairs);
    rep.counters.events = tr.size();
    canonicalize(rep);
    Fnv1a64 h;
    hash_trace_into(tr, h);
    rep.trace_hash = h.digest();
    return rep;
}

}  // namespace

RaceReport oracle_hb_report(const Trace& tr, int64_t w) {
    return oracle_report(tr, w, "oracle-hb", hb_pairs(tr));
}

RaceReport oracle_sp_report(const Trace& tr, int64_t w) {
    return oracle_report(tr, w, "oracle-sp", sp_pairs(tr));
}

}  // namespace racemon
