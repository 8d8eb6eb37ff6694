// SPDX-License-Identifier: MIT
// Vector timestamps, epochs, and the circular window index order.
#pragma once

#include <cstdint>
#include <vector>

namespace racemon {

// Plain count-valued vector timestamp (component t = number of t-events known).
// Missing components read as 0.
using VectorTimestamp = std::vector<int32_t>;

inline int32_t vt_at(const VectorTimestamp& v, size_t t) {
    return t < v.size() ? v[t] : 0;
}

inline void vt_set(VectorTimestamp& v, size_t t, int32_t val) {
    if (t >= v.size()) v.resize(t + 1, 0);
    v[t] = val;
}

// Componentwise max into v1.
inline void vt_join(VectorTimestamp& v1, const VectorTimestamp& v2) {
    if (v2.size() > v1.size()) v1.resize(v2.size(), 0);
    for (size_t t = 0; t < v2.size(); ++t)
        if (v2[t] > v1[t]) v1[t] = v2[t];
}

inline bool vt_leq(const VectorTimestamp& v1, const VectorTimestamp& v2) {
    for (size_t t = 0; t < v1.size(); ++t)
        if (v1[t] > vt_at(v2, t)) return false;
    return true;
}

struct Epoch {
    int32_t tid = -1;  // -1 = absent
    int32_t time = 0;
};

inline bool epoch_leq(const Epoch& ep, const VectorTimestamp& v) {
    return ep.tid < 0 || ep.time <= vt_at(v, static_cast<size_t>(ep.tid));
}

// Order on window slot indices. Slots age from oldest = (h+1) mod w to newest
// = h; -1 is the unique global bottom (absent). Values are release/access slot
// positions in a w-sized ring with head h.
struct WindowOrderCtx {
    int32_t h = -1;
    int32_t w = 2;
};

// a is at least as old as b (a "happened no later than" b in window age).
template <class IntT>
inline bool widx_leq(IntT a, IntT b, const WindowOrderCtx& ctx) {
    if (a < 0) return true;
    if (b < 0) return false;  // -1 is strictly below every occupied slot
    const int32_t h = ctx.h, ai = a, bi = b;
    return (ai <= bi && bi <= h) || (h < ai && ai <= bi) || (bi <= h && h < ai);
}

// Strict window order: irreflexive; -1 sits strictly below every occupied slot.
template <class IntT>
inline bool widx_lt(IntT a, IntT b, const WindowOrderCtx& ctx) {
    return a != b && !widx_leq(b, a, ctx);
}

// All components of V1 are at least as old as the matching components of V2.
template <class IntT>
inline bool vt_window_leq(const std::vector<IntT>& v1, const std::vector<IntT>& v2,
                          const WindowOrderCtx& ctx) {
    for (size_t t = 0; t < v1.size(); ++t) {
        IntT b = t < v2.size() ? v2[t] : static_cast<IntT>(-1);
        if (!widx_leq(v1[t], b, ctx)) return false;
    }
    return true;
}

}  // namespace racemon
