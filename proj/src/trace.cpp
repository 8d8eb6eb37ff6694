// SPDX-License-Identifier: MIT
#include "racemon/trace.h"

#include <cctype>
#include <unordered_map>

namespace racemon {
namespace {

int32_t intern(std::vector<std::string>& names, const std::string& name) {
    for (size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return static_cast<int32_t>(k);
    names.push_back(name);
    return static_cast<int32_t>(names.size() - 1);
}

bool is_ident(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

bool is_thread_name(const std::string& s) {
    if (s.size() < 2 || s[0] != 'T') return false;
    for (size_t k = 1; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    return true;
}

std::string trimmed(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::Read: return "r";
        case OpKind::Write: return "w";
        case OpKind::Acquire: return "acq";
        case OpKind::Release: return "rel";
    }
    return "?";
}

}  // namespace

int32_t Trace::intern_thread(const std::string& name) { return intern(thread_names, name); }
int32_t Trace::intern_var(const std::string& name) { return intern(var_names, name); }
int32_t Trace::intern_lock(const std::string& name) { return intern(lock_names, name); }

void Trace::finalize() {
    const int64_t n = size();
    local_idx.assign(n, 0);
    match_idx.assign(n, -1);
    prev_idx.assign(n, -1);
    lw_idx.assign(n, -1);

    std::vector<int32_t> tcount(thread_names.size(), 0);
    std::vector<int64_t> tlast(thread_names.size(), -1);
    std::vector<int64_t> vlastw(var_names.size(), -1);
    // Per lock: index of the currently open acquire, -1 if the lock is free.
    std::vector<int64_t> open_acq(lock_names.size(), -1);

    for (int64_t i = 0; i < n; ++i) {
        const Event& ev = events[i];
        local_idx[i] = tcount[ev.tid]++;
        prev_idx[i] = tlast[ev.tid];
        tlast[ev.tid] = i;
        switch (ev.kind) {
            case OpKind::Read:
                lw_idx[i] = vlastw[ev.obj];
                break;
            case OpKind::Write:
                vlastw[ev.obj] = i;
                break;
            case OpKind::Acquire:
                open_acq[ev.obj] = i;
                break;
            case OpKind::Release:
                if (open_acq[ev.obj] >= 0 && events[open_acq[ev.obj]].tid == ev.tid) {
                    match_idx[i] = open_acq[ev.obj];
                    match_idx[open_acq[ev.obj]] = i;
                }
                open_acq[ev.obj] = -1;
                break;
        }
    }
}

int64_t lw(const Trace& tr, int64_t i) { return tr.lw_idx[i]; }
int64_t match_of(const Trace& tr, int64_t i) { return tr.match_idx[i]; }
int64_t prev(const Trace& tr, int64_t i) { return tr.prev_idx[i]; }

int parse_event_line(const std::string& raw, int64_t lineno, Trace& names, Event& ev,
                     WfReport& err) {
    std::string line = trimmed(raw);
    if (line.empty() || line[0] == '#') return 1;

    auto fail = [&](const std::string& msg) {
        err.ok = false;
        err.line = lineno;
        err.message = msg;
        return -1;
    };

    size_t bar = line.find('|');
    if (bar == std::string::npos) return fail("expected 'tid|op(obj)'");
    std::string tname = trimmed(line.substr(0, bar));
    if (!is_thread_name(tname)) return fail("bad thread name '" + tname + "' (want T<digits>)");

    std::string rest = trimmed(line.substr(bar + 1));
    size_t lp = rest.find('(');
    if (lp == std::string::npos || rest.back() != ')') return fail("expected 'op(obj)'");
    std::string op = rest.substr(0, lp);
    std::string obj = rest.substr(lp + 1, rest.size() - lp - 2);
    if (!is_ident(obj)) return fail("bad object name '" + obj + "'");

    OpKind kind;
    if (op == "r") kind = OpKind::Read;
    else if (op == "w") kind = OpKind::Write;
    else if (op == "acq") kind = OpKind::Acquire;
    else if (op == "rel") kind = OpKind::Release;
    else return fail("unknown op '" + op + "' (want r, w, acq or rel)");

    ev.tid = names.intern_thread(tname);
    ev.kind = kind;
    ev.obj = is_access(kind) ? names.intern_var(obj) : names.intern_lock(obj);
    return 0;
}

bool parse_trace(const std::string& text, Trace& out, WfReport& err) {
    out = Trace{};
    err = WfReport{};
    int64_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line =
            nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (nl == std::string::npos && line.empty()) break;
        Event ev;
        int rc = parse_event_line(line, lineno, out, ev, err);
        if (rc < 0) {
            err.index = out.size();
            return false;
        }
        if (rc == 0) {
            out.events.push_back(ev);
            out.src_lines.push_back(static_cast<int32_t>(lineno));
        }
    }
    out.finalize();
    return true;
}

void serialize_event(const Trace& names, const Event& ev, std::string& out) {
    out += names.thread_names[ev.tid];
    out += '|';
    out += op_name(ev.kind);
    out += '(';
    out += is_access(ev.kind) ? names.var_names[ev.obj] : names.lock_names[ev.obj];
    out += ")\n";
}

std::string serialize(const Trace& tr) {
    std::string out;
    out.reserve(tr.events.size() * 12);
    for (const Event& ev : tr.events) serialize_event(tr, ev, out);
    return out;
}

bool WfChecker::step(const Event& ev, int64_t index, int64_t line, WfReport& err) {
    if (!is_sync(ev.kind)) return true;
    if (static_cast<size_t>(ev.obj) >= holder_.size()) holder_.resize(ev.obj + 1, -1);
    int32_t& holder = holder_[ev.obj];
    if (ev.kind == OpKind::Acquire) {
        if (holder >= 0) {
            err = {false, index, line,
                   holder == ev.tid ? "reentrant acquire of a held lock"
                                    : "acquire of a lock held by another thread"};
            return false;
        }
        holder = ev.tid;
    } else {
        if (holder != ev.tid) {
            err = {false, index, line,
                   holder < 0 ? "release of a lock that is not held"
                              : "release of a lock held by another thread"};
            return false;
        }
        holder = -1;
    }
    return true;
}

WfReport check_well_formed(const Trace& tr) {
    WfChecker chk;
    WfReport err;
    for (int64_t i = 0; i < tr.size(); ++i) {
        int64_t line = i < static_cast<int64_t>(tr.src_lines.size()) ? tr.src_lines[i] : -1;
        if (!chk.step(tr.events[i], i, line, err)) return err;
    }
    return WfReport{};
}

}  // namespace racemon
