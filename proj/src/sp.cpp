// SPDX-License-Identifier: MIT
#include "racemon/sp.h"

#include <algorithm>
#include <array>
#include <deque>
#include <optional>

#include "racemon/clocks.h"
#include "run_util.h"

namespace racemon {
namespace {

// Thread-local closures in count encoding: component t = number of t-events in
// the closure. Closures are per-thread prefixes, so membership of the event
// with thread-local index k is the test vec[t] > k.
using Tlc = VectorTimestamp;

char kind_char(OpKind k) { return k == OpKind::Read ? 'r' : 'w'; }

// One critical section of (thread, lock). Open until the release arrives.
struct CsRec {
    int64_t acq_idx = -1;
    int32_t thread = -1;
    int32_t lock = -1;
    int32_t acq_local = -1;
    bool closed = false;
    int64_t rel_idx = -1;
    int32_t rel_local = -1;
    Tlc tlc_rel;
};

struct AccRec {
    int64_t idx = -1;
    int32_t local = -1;
    Tlc tlc_prev;  // closure of the thread's preceding event (the check seed)
    Tlc tlc_self;  // closure of the access itself
};

class PairLogSp {
  public:
    explicit PairLogSp(const DetectOptions& opt) : opt_(opt) {}
    bool var_settled(int32_t x) const {
        return opt_.granularity == Granularity::Vars && x < (int32_t)var_racy_.size() &&
               var_racy_[x];
    }
    void add(int64_t i, int64_t j, int32_t x, const char* kinds, const Trace& names,
             bool* done) {
        if ((int32_t)var_racy_.size() <= x) var_racy_.resize(x + 1, 0);
        if (opt_.granularity == Granularity::Vars && var_racy_[x]) return;
        var_racy_[x] = 1;
        pairs_.push_back(RacePair{i, j, names.var_names[x], kinds});
        if (opt_.first_race || opt_.granularity == Granularity::Decision) *done = true;
    }
    std::vector<RacePair> take() { return std::move(pairs_); }

  private:
    DetectOptions opt_;
    std::vector<RacePair> pairs_;
    std::vector<char> var_racy_;
};

// ---------------------------------------------------------------------------
// Windowed sync-preserving detector. Per event it keeps the thread-local
// closure; per window-resident access a seed record; per critical section a
// record with closure and prefix-count vectors at both boundaries. A race
// check seeds an ideal with the two predecessor closures and runs the closure
// rules to a fixed point over resident sections (plus at most one spilled open
// section per lock); the candidate is racy iff it stays outside the ideal.
// ---------------------------------------------------------------------------

class ShortSpDetector final : public Detector {
  public:
    ShortSpDetector(int64_t w, const DetectOptions& opt, const char* algo)
        : w_(w), opt_(opt), log_(opt), algo_(algo) {
        if (w < 2) throw std::invalid_argument("window must be >= 2");
        ring_.assign(static_cast<size_t>(w), Slot{});
    }

    void step(const Event& ev, int64_t index) override {
        if (done_) return;
        grow(ev);
        ++counters_.events;
        idx_now_ = index;
        h_ = (h_ + 1) % w_;
        if (ring_[h_].idx >= 0) collect();
        if (ev.kind == OpKind::Release && open_[ev.obj].has_value()) replay(ev);
        if (is_access(ev.kind)) check(ev, index);
        advance(ev, index);
        ring_[h_] = Slot{ev, index};
        if (opt_.assert_state) scan();
    }

    const Trace& names() const override { return names_; }
    Trace& names() override { return names_; }
    bool done() const override { return done_; }

    RaceReport finish() override {
        RaceReport rep;
        rep.algo = algo_;
        rep.window = w_;
        rep.pairs = log_.take();
        rep.counters = counters_;
        canonicalize(rep);
        return rep;
    }

  private:
    struct Slot {
        Event ev;
        int64_t idx = -1;
    };

    void grow(const Event& ev) {
        if ((int32_t)ct_.size() <= ev.tid) {
            bump_clocks(ev.tid + 1 - (int64_t)ct_.size());
            ct_.resize(ev.tid + 1);
        }
        if (is_access(ev.kind) && (int32_t)acc_.size() <= ev.obj) {
            acc_.resize(ev.obj + 1);
            lw_.resize(ev.obj + 1);
        }
        if (is_access(ev.kind)) {
            for (auto& byKind : acc_[ev.obj])
                if ((int32_t)byKind.size() < (int32_t)ct_.size()) byKind.resize(ct_.size());
        }
        if (is_sync(ev.kind) && ev.obj >= locks_) {
            locks_ = ev.obj + 1;
            open_.resize(locks_);
        }
        if ((int32_t)cs_.size() < (int32_t)ct_.size()) cs_.resize(ct_.size());
        for (auto& row : cs_)
            if ((int32_t)row.size() < locks_) row.resize(locks_);
    }

    void bump_clocks(int64_t d) {
        clocks_ += d;
        counters_.peak_clocks = std::max(counters_.peak_clocks, clocks_);
    }
    void bump_records(int64_t d) {
        records_ += d;
        counters_.peak_records = std::max(counters_.peak_records, records_);
    }

    // --- closure membership helpers -------------------------------------

    static bool member(const Tlc& ideal, int32_t thread, int32_t local) {
        return vt_at(ideal, thread) > local;
    }

    template <class F>
    void for_each_cs(F&& f) const {
        for (const auto& row : cs_)
            for (const auto& dq : row)
                for (const CsRec& e : dq) f(e);
        for (const auto& o : open_)
            if (o.has_value()) f(*o);
    }

    // Grows the ideal to the least fixed point of the closure rule over
    // resident + spilled critical sections: a member acquire followed by a
    // member acquire of the same lock pulls in its release. Joined vectors
    // are themselves thread-order and last-write closed, so the union stays
    // closed and no separate pass is needed for those rules.
    void close_ideal(Tlc& ideal) {
        bool changed = true;
        while (changed) {
            changed = false;
            lock_max_.assign(locks_, -1);
            for_each_cs([&](const CsRec& e) {
                if (member(ideal, e.thread, e.acq_local))
                    lock_max_[e.lock] = std::max(lock_max_[e.lock], e.acq_idx);
            });
            for_each_cs([&](const CsRec& e) {
                if (e.closed && member(ideal, e.thread, e.acq_local) &&
                    !member(ideal, e.thread, e.rel_local) &&
                    lock_max_[e.lock] > e.acq_idx) {
                    vt_join(ideal, e.tlc_rel);
                    changed = true;
                }
            });
        }
    }

    // --- race check (before the event's own closure step) ----------------

    void check(const Event& ev, int64_t index) {
        const int32_t x = ev.obj;
        if (log_.var_settled(x)) return;
        const int32_t t2 = ev.tid;
        const OpKind k2 = ev.kind;
        for (int32_t t1 = 0; t1 < (int32_t)ct_.size() && !done_; ++t1) {
            if (t1 == t2 || log_.var_settled(x)) continue;
            for (int kk = 0; kk < 2 && !done_; ++kk) {
                const OpKind k1 = kk == 0 ? OpKind::Read : OpKind::Write;
                if (k1 == OpKind::Read && k2 == OpKind::Read) continue;
                if ((int32_t)acc_[x][kk].size() <= t1) continue;
                auto& dq = acc_[x][kk][t1];
                if (dq.empty()) continue;
                if (opt_.complete_candidates) {
                    for (const AccRec& cand : dq) {
                        check_candidate(cand, t1, k1, ev, index);
                        if (done_ || log_.var_settled(x)) break;
                    }
                } else {
                    check_candidate(dq.back(), t1, k1, ev, index);
                }
            }
        }
    }

    void check_candidate(const AccRec& cand, int32_t t1, OpKind k1, const Event& ev,
                         int64_t index) {
        scratch_ = cand.tlc_prev;
        vt_join(scratch_, ct_[ev.tid]);
        if (member(scratch_, t1, cand.local)) return;  // ordered through the seed
        close_ideal(scratch_);
        if (member(scratch_, t1, cand.local)) return;  // ordered through sections
        const char kinds[3] = {kind_char(k1), kind_char(ev.kind), 0};
        log_.add(cand.idx, index, ev.obj, kinds, names_, &done_);
    }

    // --- closure step and record allocation ------------------------------

    void advance(const Event& ev, int64_t index) {
        const int32_t t = ev.tid;
        switch (ev.kind) {
            case OpKind::Read:
            case OpKind::Write: {
                AccRec rec;
                rec.idx = index;
                rec.tlc_prev = ct_[t];
                if (ev.kind == OpKind::Read && !lw_[ev.obj].empty())
                    vt_join(ct_[t], lw_[ev.obj]);
                tick(t);
                rec.local = vt_at(ct_[t], t) - 1;
                rec.tlc_self = ct_[t];
                if (ev.kind == OpKind::Write) {
                    if (lw_[ev.obj].empty()) bump_clocks(+1);
                    lw_[ev.obj] = ct_[t];
                }
                acc_[ev.obj][ev.kind == OpKind::Read ? 0 : 1][t].push_back(std::move(rec));
                bump_records(+1);
                break;
            }
            case OpKind::Acquire: {
                tick(t);
                CsRec rec;
                rec.acq_idx = index;
                rec.thread = t;
                rec.lock = ev.obj;
                rec.acq_local = vt_at(ct_[t], t) - 1;
                cs_[t][ev.obj].push_back(std::move(rec));
                bump_records(+1);
                break;
            }
            case OpKind::Release: {
                tick(t);
                auto& dq = cs_[t][ev.obj];
                RM_CHECK(!dq.empty() && !dq.back().closed,
                         "release without an open section record");
                CsRec& rec = dq.back();
                rec.closed = true;
                rec.rel_idx = index;
                rec.rel_local = vt_at(ct_[t], t) - 1;
                rec.tlc_rel = ct_[t];
                break;
            }
        }
    }

    void tick(int32_t t) { vt_set(ct_[t], t, vt_at(ct_[t], t) + 1); }

    // --- window boundary ---------------------------------------------------

    void collect() {
        const Event eo = ring_[h_].ev;
        const int64_t eidx = ring_[h_].idx;
        const int32_t t = eo.tid;
        switch (eo.kind) {
            case OpKind::Read:
            case OpKind::Write: {
                auto& dq = acc_[eo.obj][eo.kind == OpKind::Read ? 0 : 1][t];
                RM_CHECK(!dq.empty() && dq.front().idx == eidx,
                         "access record list out of step with the window");
                dq.pop_front();
                bump_records(-1);
                break;
            }
            case OpKind::Acquire: {
                auto& dq = cs_[t][eo.obj];
                auto it = std::find_if(dq.begin(), dq.end(), [&](const CsRec& e) {
                    return e.acq_idx == eidx;
                });
                RM_CHECK(it != dq.end(), "evicted acquire has no section record");
                if (!it->closed) {
                    // The matching release is still ahead: spill so later
                    // checks can keep treating the window as well-formed.
                    RM_CHECK(!open_[eo.obj].has_value(),
                             "two spilled open sections on one lock");
                    open_[eo.obj] = std::move(*it);
                    dq.erase(it);
                }
                // Closed records stay until their release leaves the window.
                break;
            }
            case OpKind::Release: {
                auto& dq = cs_[t][eo.obj];
                RM_CHECK(!dq.empty() && dq.front().closed && dq.front().rel_idx == eidx,
                         "section record list out of step with the window");
                dq.pop_front();
                bump_records(-1);
                break;
            }
        }
    }

    void replay(const Event& ev) {
        auto& dq = cs_[ev.tid][ev.obj];
        RM_CHECK(open_[ev.obj]->thread == ev.tid, "spilled section held by another thread");
        RM_CHECK(dq.empty(), "resident section while replaying a spilled acquire");
        dq.push_back(std::move(*open_[ev.obj]));
        open_[ev.obj].reset();
    }

    // Full consistency scan (assert mode).
    void scan() const {
        int64_t n = 0;
        for (const auto& byVar : acc_)
            for (const auto& byKind : byVar)
                for (const auto& dq : byKind) {
                    for (const AccRec& r : dq)
                        RM_CHECK(idx_now_ - r.idx < w_, "stale access record");
                    n += (int64_t)dq.size();
                }
        int64_t opens = 0;
        for (const auto& row : cs_)
            for (const auto& dq : row)
                for (const CsRec& e : dq) {
                    RM_CHECK(!e.closed || idx_now_ - e.rel_idx < w_, "stale section record");
                    ++n;
                }
        for (const auto& o : open_)
            if (o.has_value()) {
                ++opens;
                ++n;
            }
        RM_CHECK(n == records_, "record counter out of step");
        RM_CHECK(records_ <= w_ + locks_, "record count exceeds window + locks bound");
    }

    int64_t w_;
    DetectOptions opt_;
    PairLogSp log_;
    std::string algo_;
    Trace names_;
    bool done_ = false;
    int64_t idx_now_ = -1;
    int64_t h_ = -1;
    std::vector<Slot> ring_;
    std::vector<Tlc> ct_;
    std::vector<Tlc> lw_;
    // acc_[var][0=r,1=w][thread], records in trace order.
    std::vector<std::array<std::vector<std::deque<AccRec>>, 2>> acc_;
    // cs_[thread][lock], records in trace order; at most the last is open.
    std::vector<std::vector<std::deque<CsRec>>> cs_;
    std::vector<std::optional<CsRec>> open_;
    int32_t locks_ = 0;
    std::vector<int64_t> lock_max_;
    Tlc scratch_;
    RunCounters counters_;
    int64_t clocks_ = 0;
    int64_t records_ = 0;
};

}  // namespace

std::unique_ptr<Detector> make_short_sp_detector(int64_t w, const DetectOptions& opt) {
    return std::make_unique<ShortSpDetector>(w, opt, "short-syncp");
}

RaceReport ssp_run(const Trace& tr, int64_t w, const DetectOptions& opt) {
    ShortSpDetector det(w, opt, "short-syncp");
    return run_materialized(det, tr);
}

RaceReport syncp_run(const Trace& tr, const DetectOptions& opt) {
    ShortSpDetector det(std::max<int64_t>(tr.size(), 2), opt, "syncp");
    RaceReport rep = run_materialized(det, tr);
    rep.window = 0;  // unwindowed baseline
    return rep;
}

}  // namespace racemon
