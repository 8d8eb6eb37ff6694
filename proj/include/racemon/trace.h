// SPDX-License-Identifier: MIT
// Event model, trace grammar, and well-formedness checks.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace racemon {

enum class OpKind : uint8_t { Read = 0, Write = 1, Acquire = 2, Release = 3 };

inline bool is_access(OpKind k) { return k == OpKind::Read || k == OpKind::Write; }
inline bool is_sync(OpKind k) { return !is_access(k); }

// obj is a dense variable id for accesses, a dense lock id for acquire/release.
struct Event {
    int32_t tid = -1;
    OpKind kind = OpKind::Read;
    int32_t obj = -1;

    bool operator==(const Event&) const = default;
};

// Two accesses conflict: same variable, at least one write, different threads.
inline bool conflicting(const Event& a, const Event& b) {
    return is_access(a.kind) && is_access(b.kind) && a.obj == b.obj && a.tid != b.tid &&
           (a.kind == OpKind::Write || b.kind == OpKind::Write);
}

// Number of events in the closed range [i, j]; span(0, 1) == 2.
inline int64_t span(int64_t i, int64_t j) { return (i < j ? j - i : i - j) + 1; }

struct WfReport {
    bool ok = true;
    int64_t index = -1;  // offending event index, -1 if n/a
    int64_t line = -1;   // 1-based source line, -1 if unknown
    std::string message;
};

// A fully materialized trace with interned names and derived per-event indices.
struct Trace {
    std::vector<Event> events;
    std::vector<std::string> thread_names;  // dense tid -> name ("T1", ...)
    std::vector<std::string> var_names;
    std::vector<std::string> lock_names;
    std::vector<int32_t> src_lines;  // parallel to events when parsed from text, else empty

    // Derived by finalize():
    std::vector<int32_t> local_idx;   // per event: 0-based index within its thread
    std::vector<int64_t> match_idx;   // acquire<->release partner, -1 if none
    std::vector<int64_t> prev_idx;    // same-thread predecessor, -1 if none
    std::vector<int64_t> lw_idx;      // reads: last write on the variable, -1; others -1

    int64_t size() const { return static_cast<int64_t>(events.size()); }
    int32_t thread_count() const { return static_cast<int32_t>(thread_names.size()); }
    int32_t var_count() const { return static_cast<int32_t>(var_names.size()); }
    int32_t lock_count() const { return static_cast<int32_t>(lock_names.size()); }

    int32_t intern_thread(const std::string& name);
    int32_t intern_var(const std::string& name);
    int32_t intern_lock(const std::string& name);

    // Recomputes local_idx/match_idx/prev_idx/lw_idx. Tolerates ill-formed input
    // (unmatched sync events simply get match_idx = -1).
    void finalize();
};

// Last write before read event i on the same variable (trace order, any thread).
int64_t lw(const Trace& tr, int64_t i);
// Matching release for an acquire / matching acquire for a release, -1 if none.
int64_t match_of(const Trace& tr, int64_t i);
// Previous event of the same thread, -1 if none.
int64_t prev(const Trace& tr, int64_t i);

// Grammar, one event per line:   T<digits>|<op>(<obj>)
// where <op> is r, w, acq or rel and <obj> is an identifier. Blank lines and
// lines starting with '#' are ignored. Names are interned densely in order of
// first appearance. Returns false and fills err on the first malformed line.
bool parse_trace(const std::string& text, Trace& out, WfReport& err);

// Parses a single event line; used by the streaming front end. Returns 0 on
// success, 1 if the line is blank/comment (skip), -1 on error (err filled).
int parse_event_line(const std::string& line, int64_t lineno, Trace& names, Event& ev,
                     WfReport& err);

// Canonical form: one "T..|op(obj)\n" per event; parse(serialize(tr)) == tr.
std::string serialize(const Trace& tr);
void serialize_event(const Trace& names, const Event& ev, std::string& out);

// Lock discipline: acquiring a lock that is held (by anyone, including the
// acquiring thread) and releasing a lock the thread does not hold are rejected.
// Dangling acquires are legal.
WfReport check_well_formed(const Trace& tr);

// Incremental checker for the streaming front end; same rules.
class WfChecker {
  public:
    // Returns true if appending ev keeps the trace well-formed.
    bool step(const Event& ev, int64_t index, int64_t line, WfReport& err);

  private:
    std::vector<int32_t> holder_;  // per lock: holding tid, -1 if free
};

}  // namespace racemon
