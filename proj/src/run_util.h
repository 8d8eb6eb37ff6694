// SPDX-License-Identifier: MIT
// Internal helpers shared by the detector runners.
#pragma once

#include "racemon/hb.h"
#include "racemon/report.h"
#include "racemon/trace.h"

namespace racemon {

inline void hash_trace_into(const Trace& tr, Fnv1a64& h) {
    std::string buf;
    for (const Event& ev : tr.events) {
        buf.clear();
        serialize_event(tr, ev, buf);
        h.update(buf.data(), buf.size());
    }
}

inline RaceReport run_materialized(Detector& det, const Trace& tr) {
    det.names().thread_names = tr.thread_names;
    det.names().var_names = tr.var_names;
    det.names().lock_names = tr.lock_names;
    for (int64_t i = 0; i < tr.size() && !det.done(); ++i) det.step(tr.events[i], i);
    RaceReport rep = det.finish();
    Fnv1a64 h;
    hash_trace_into(tr, h);
    rep.trace_hash = h.digest();
    return rep;
}

}  // namespace racemon
