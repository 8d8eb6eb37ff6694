// SPDX-License-Identifier: MIT
#include "racemon/hb.h"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "racemon/clocks.h"
#include "run_util.h"

namespace racemon {
namespace {

// Shared pair bookkeeping honoring granularity and first_race.
class PairLog {
  public:
    explicit PairLog(const DetectOptions& opt) : opt_(opt) {}

    // True if checks on this var can be skipped entirely (vars granularity and
    // the var is already known racy).
    bool var_settled(int32_t x) const {
        return opt_.granularity == Granularity::Vars && x < (int32_t)var_racy_.size() &&
               var_racy_[x];
    }

    void add(int64_t i, int64_t j, int32_t x, const char* kinds, const Trace& names,
             bool* done) {
        if ((int32_t)var_racy_.size() <= x) var_racy_.resize(x + 1, 0);
        if (opt_.granularity == Granularity::Vars && var_racy_[x]) return;
        var_racy_[x] = 1;
        RacePair p;
        p.i = i;
        p.j = j;
        p.var = names.var_names[x];
        p.kinds = kinds;
        pairs_.push_back(std::move(p));
        if (opt_.first_race || opt_.granularity == Granularity::Decision) *done = true;
    }

    std::vector<RacePair> take() { return std::move(pairs_); }

  private:
    DetectOptions opt_;
    std::vector<RacePair> pairs_;
    std::vector<char> var_racy_;
};

// ---------------------------------------------------------------------------
// Full-trace happens-before detector. Thread clocks tick at every event; write
// summaries are epochs, read summaries are full clocks. Recorded (thread,
// local time) entries are resolved to trace indices through per-thread index
// records so reported pairs carry real positions.
// ---------------------------------------------------------------------------

class FullHbDetector final : public Detector {
  public:
    explicit FullHbDetector(const DetectOptions& opt) : opt_(opt), log_(opt) {}

    void step(const Event& ev, int64_t index) override {
        if (done_) return;
        grow(ev);
        ++counters_.events;
        const int32_t t = ev.tid;
        vt_set(ct_[t], t, vt_at(ct_[t], t) + 1);
        idxrec_[t].push_back(index);
        counters_.peak_records = std::max(counters_.peak_records, ++records_);

        switch (ev.kind) {
            case OpKind::Read: {
                const int32_t x = ev.obj;
                if (!log_.var_settled(x) && !epoch_leq(ew_[x], ct_[t]))
                    log_.add(idxrec_[ew_[x].tid][ew_[x].time - 1], index, x, "wr", names_,
                             &done_);
                if (crd_[x].empty()) bump_clocks(+1);
                vt_set(crd_[x], t, vt_at(ct_[t], t));
                break;
            }
            case OpKind::Write: {
                const int32_t x = ev.obj;
                if (!log_.var_settled(x)) {
                    for (size_t u = 0; u < crd_[x].size() && !done_; ++u)
                        if (crd_[x][u] > vt_at(ct_[t], u))
                            log_.add(idxrec_[u][crd_[x][u] - 1], index, x, "rw", names_,
                                     &done_);
                    if (!done_ && !epoch_leq(ew_[x], ct_[t]))
                        log_.add(idxrec_[ew_[x].tid][ew_[x].time - 1], index, x, "ww",
                                 names_, &done_);
                }
                ew_[x] = Epoch{t, vt_at(ct_[t], t)};
                break;
            }
            case OpKind::Acquire: {
                if (!cl_[ev.obj].empty()) vt_join(ct_[t], cl_[ev.obj]);
                break;
            }
            case OpKind::Release: {
                if (cl_[ev.obj].empty()) bump_clocks(+1);
                cl_[ev.obj] = ct_[t];
                break;
            }
        }
    }

    const Trace& names() const override { return names_; }
    Trace& names() override { return names_; }
    bool done() const override { return done_; }

    RaceReport finish() override {
        RaceReport rep;
        rep.algo = "ft";
        rep.pairs = log_.take();
        rep.counters = counters_;
        canonicalize(rep);
        return rep;
    }

  private:
    void grow(const Event& ev) {
        if ((int32_t)ct_.size() <= ev.tid) {
            bump_clocks(ev.tid + 1 - (int64_t)ct_.size());
            ct_.resize(ev.tid + 1);
            idxrec_.resize(ev.tid + 1);
        }
        if (is_access(ev.kind) && (int32_t)crd_.size() <= ev.obj) {
            crd_.resize(ev.obj + 1);
            ew_.resize(ev.obj + 1);
        }
        if (is_sync(ev.kind) && (int32_t)cl_.size() <= ev.obj) cl_.resize(ev.obj + 1);
    }

    void bump_clocks(int64_t d) {
        clocks_ += d;
        counters_.peak_clocks = std::max(counters_.peak_clocks, clocks_);
    }

    DetectOptions opt_;
    PairLog log_;
    Trace names_;
    bool done_ = false;
    std::vector<VectorTimestamp> ct_;
    std::vector<VectorTimestamp> cl_;
    std::vector<VectorTimestamp> crd_;
    std::vector<Epoch> ew_;
    std::vector<std::vector<int64_t>> idxrec_;
    RunCounters counters_;
    int64_t clocks_ = 0;
    int64_t records_ = 0;
};

// ---------------------------------------------------------------------------
// Windowed happens-before detector. All clock components hold window slot
// indices of releases (or of accesses, for read clocks and write epochs);
// -1 means absent. Transposed slot sets track which thread/lock clocks
// reference a release slot so eviction can sever every reference in O(|set|).
// ---------------------------------------------------------------------------

// Owners in slot sets: thread t encodes as 2t, lock l as 2l+1.
inline int32_t enc_thread(int32_t t) { return t << 1; }
inline int32_t enc_lock(int32_t l) { return (l << 1) | 1; }

template <class IntT>
class ShortHbDetector final : public Detector {
  public:
    static constexpr IntT kAbsent = static_cast<IntT>(-1);

    ShortHbDetector(int64_t w, const DetectOptions& opt)
        : w_(static_cast<int32_t>(w)), opt_(opt), log_(opt) {
        if (w < 2 || w > std::numeric_limits<IntT>::max())
            throw std::invalid_argument("window out of range for clock width");
        ring_.assign(w_, Slot{});
        slot_sets_.resize(w_);
    }

    void step(const Event& ev, int64_t index) override {
        if (done_) return;
        grow(ev);
        ++counters_.events;
        h_ = (h_ + 1) % w_;
        if (ring_[h_].idx >= 0)
            collect();
        else
            counters_.peak_records = std::max(counters_.peak_records, ++occupied_);
        handle(ev, index);
        ring_[h_] = Slot{ev, index};
        if (opt_.assert_state) scan();
    }

    const Trace& names() const override { return names_; }
    Trace& names() override { return names_; }
    bool done() const override { return done_; }

    RaceReport finish() override {
        RaceReport rep;
        rep.algo = "short-ft";
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

    static IntT comp(const std::vector<IntT>& v, int32_t t) {
        return t < (int32_t)v.size() ? v[t] : kAbsent;
    }
    static void set_comp(std::vector<IntT>& v, int32_t t, IntT val) {
        if (t >= (int32_t)v.size()) v.resize(t + 1, kAbsent);
        v[t] = val;
    }

    void sset_add(IntT slot, int32_t owner) {
        auto& s = slot_sets_[slot];
        if (std::find(s.begin(), s.end(), owner) == s.end()) s.push_back(owner);
    }
    void sset_remove(IntT slot, int32_t owner) {
        auto& s = slot_sets_[slot];
        auto it = std::find(s.begin(), s.end(), owner);
        if (it != s.end()) {
            *it = s.back();
            s.pop_back();
        }
    }

    void grow(const Event& ev) {
        if ((int32_t)ct_.size() <= ev.tid) {
            bump_clocks(ev.tid + 1 - (int64_t)ct_.size());
            ct_.resize(ev.tid + 1);
        }
        if (is_access(ev.kind) && (int32_t)crd_.size() <= ev.obj) {
            crd_.resize(ev.obj + 1);
            ew_.resize(ev.obj + 1);
            rdcount_.resize(ev.obj + 1, 0);
        }
        if (is_sync(ev.kind) && (int32_t)cl_.size() <= ev.obj) cl_.resize(ev.obj + 1);
    }

    void bump_clocks(int64_t d) {
        clocks_ += d;
        counters_.peak_clocks = std::max(counters_.peak_clocks, clocks_);
    }

    // Post-handler for the event leaving slot h_.
    void collect() {
        const Event eo = ring_[h_].ev;
        const int32_t t = eo.tid;
        switch (eo.kind) {
            case OpKind::Read: {
                auto& rc = crd_[eo.obj];
                RM_CHECK(!rc.empty() && rdcount_[eo.obj] > 0, "read clock missing at eviction");
                if (comp(rc, t) == (IntT)h_) rc[t] = kAbsent;
                if (--rdcount_[eo.obj] == 0) {
                    rc.clear();
                    rc.shrink_to_fit();
                    bump_clocks(-1);
                }
                break;
            }
            case OpKind::Write: {
                WEpoch& we = ew_[eo.obj];
                if (we.tid == t && we.slot == (IntT)h_) we.tid = -1;
                break;
            }
            case OpKind::Acquire:
                break;
            case OpKind::Release: {
                // Sever every clock component referencing the evicted slot. A
                // lock clock may keep other, still-resident components; those
                // stay valid and are consumed by the next acquire as usual.
                for (int32_t owner : slot_sets_[h_]) {
                    if (owner & 1) {
                        auto& c = cl_[owner >> 1];
                        if (!c.empty()) set_comp(c, t, kAbsent);
                    } else {
                        set_comp(ct_[owner >> 1], t, kAbsent);
                    }
                }
                slot_sets_[h_].clear();
                break;
            }
        }
    }

    void handle(const Event& ev, int64_t index) {
        const int32_t t = ev.tid;
        const WindowOrderCtx ctx{h_, w_};
        switch (ev.kind) {
            case OpKind::Read: {
                // Same-thread accesses are ordered by thread order; the clock
                // component ct_[t][t] only advances at releases, so the window
                // test alone cannot rule them out.
                const int32_t x = ev.obj;
                const WEpoch we = ew_[x];
                if (!log_.var_settled(x) && we.tid >= 0 && we.tid != t &&
                    !widx_leq(we.slot, comp(ct_[t], we.tid), ctx))
                    log_.add(ring_[we.slot].idx, index, x, "wr", names_, &done_);
                if (crd_[x].empty()) bump_clocks(+1);
                ++rdcount_[x];
                set_comp(crd_[x], t, (IntT)h_);
                break;
            }
            case OpKind::Write: {
                const int32_t x = ev.obj;
                if (!log_.var_settled(x)) {
                    const auto& rc = crd_[x];
                    for (int32_t u = 0; u < (int32_t)rc.size() && !done_; ++u)
                        if (u != t && rc[u] != kAbsent &&
                            !widx_leq(rc[u], comp(ct_[t], u), ctx))
                            log_.add(ring_[rc[u]].idx, index, x, "rw", names_, &done_);
                    const WEpoch we = ew_[x];
                    if (!done_ && we.tid >= 0 && we.tid != t &&
                        !widx_leq(we.slot, comp(ct_[t], we.tid), ctx))
                        log_.add(ring_[we.slot].idx, index, x, "ww", names_, &done_);
                }
                ew_[x] = WEpoch{t, (IntT)h_};
                break;
            }
            case OpKind::Acquire: {
                const int32_t lk = ev.obj;
                auto& L = cl_[lk];
                if (L.empty()) break;  // no release of this lock in the window
                for (int32_t u = 0; u < (int32_t)L.size(); ++u) {
                    const IntT a = L[u];
                    const IntT b = comp(ct_[t], u);
                    if (widx_lt(b, a, ctx)) {
                        sset_add(a, enc_thread(t));
                        if (b != kAbsent) sset_remove(b, enc_thread(t));
                        set_comp(ct_[t], u, a);
                    }
                    if (a != kAbsent) sset_remove(a, enc_lock(lk));
                }
                L.clear();
                L.shrink_to_fit();
                bump_clocks(-1);
                break;
            }
            case OpKind::Release: {
                const int32_t lk = ev.obj;
                RM_CHECK(cl_[lk].empty(), "stale lock clock at release");
                const IntT own = comp(ct_[t], t);
                if (own != kAbsent) sset_remove(own, enc_thread(t));
                slot_sets_[h_].clear();
                sset_add((IntT)h_, enc_thread(t));
                set_comp(ct_[t], t, (IntT)h_);
                cl_[lk] = ct_[t];
                bump_clocks(+1);
                for (int32_t u = 0; u < (int32_t)cl_[lk].size(); ++u)
                    if (cl_[lk][u] != kAbsent) sset_add(cl_[lk][u], enc_lock(lk));
                break;
            }
        }
    }

    // Full consistency scan (assert mode): window-range components, component
    // slots must hold matching resident events, and slot sets must transpose
    // the clocks exactly.
    void scan() const {
        auto check_release_comp = [&](const std::vector<IntT>& v, const char* what) {
            for (int32_t u = 0; u < (int32_t)v.size(); ++u) {
                const IntT c = v[u];
                if (c == kAbsent) continue;
                RM_CHECK(c >= 0 && c < (IntT)w_, "clock component out of window range");
                const Slot& s = ring_[c];
                RM_CHECK(s.idx >= 0 && s.ev.kind == OpKind::Release && s.ev.tid == u, what);
            }
        };
        for (const auto& v : ct_) check_release_comp(v, "thread clock points at non-release");
        for (const auto& v : cl_) check_release_comp(v, "lock clock points at non-release");
        for (int32_t x = 0; x < (int32_t)crd_.size(); ++x) {
            for (int32_t u = 0; u < (int32_t)crd_[x].size(); ++u) {
                const IntT c = crd_[x][u];
                if (c == kAbsent) continue;
                const Slot& s = ring_[c];
                RM_CHECK(s.idx >= 0 && s.ev.kind == OpKind::Read && s.ev.tid == u &&
                             s.ev.obj == x,
                         "read clock points at wrong event");
            }
            const WEpoch we = ew_[x];
            if (we.tid >= 0) {
                const Slot& s = ring_[we.slot];
                RM_CHECK(s.idx >= 0 && s.ev.kind == OpKind::Write && s.ev.tid == we.tid &&
                             s.ev.obj == x,
                         "write epoch points at wrong event");
            }
        }
        for (int32_t i = 0; i < w_; ++i) {
            std::vector<int32_t> expect;
            if (ring_[i].idx >= 0 && ring_[i].ev.kind == OpKind::Release) {
                const int32_t ti = ring_[i].ev.tid;
                for (int32_t o = 0; o < (int32_t)ct_.size(); ++o)
                    if (comp(ct_[o], ti) == (IntT)i) expect.push_back(enc_thread(o));
                for (int32_t o = 0; o < (int32_t)cl_.size(); ++o)
                    if (!cl_[o].empty() && comp(cl_[o], ti) == (IntT)i)
                        expect.push_back(enc_lock(o));
            }
            std::vector<int32_t> got = slot_sets_[i];
            std::sort(expect.begin(), expect.end());
            std::sort(got.begin(), got.end());
            RM_CHECK(expect == got, "slot set does not transpose the clocks");
        }
    }

    int32_t w_;
    DetectOptions opt_;
    PairLog log_;
    Trace names_;
    bool done_ = false;
    int32_t h_ = -1;
    std::vector<Slot> ring_;
    std::vector<std::vector<IntT>> ct_;
    std::vector<std::vector<IntT>> cl_;
    std::vector<std::vector<IntT>> crd_;
    struct WEpoch {
        int32_t tid = -1;
        IntT slot = 0;
    };
    std::vector<WEpoch> ew_;
    std::vector<std::vector<int32_t>> slot_sets_;
    std::vector<int32_t> rdcount_;
    RunCounters counters_;
    int64_t clocks_ = 0;
    int64_t occupied_ = 0;
};

}  // namespace

std::unique_ptr<Detector> make_hb_detector(const DetectOptions& opt) {
    return std::make_unique<FullHbDetector>(opt);
}

std::unique_ptr<Detector> make_short_hb_detector(int64_t w, const DetectOptions& opt) {
    if (w < 2) throw std::invalid_argument("window must be >= 2");
    if (w <= std::numeric_limits<int16_t>::max())
        return std::make_unique<ShortHbDetector<int16_t>>(w, opt);
    return std::make_unique<ShortHbDetector<int32_t>>(w, opt);
}

RaceReport ft_run(const Trace& tr, const DetectOptions& opt) {
    auto det = make_hb_detector(opt);
    return run_materialized(*det, tr);
}

RaceReport sft_run(const Trace& tr, int64_t w, const DetectOptions& opt) {
    auto det = make_short_hb_detector(w, opt);
    return run_materialized(*det, tr);
}

}  // namespace racemon
