// SPDX-License-Identifier: MIT
// Happens-before race detectors: the classic epoch/clock detector over the
// whole trace, and the bounded-window variant that reports only pairs whose
// span fits in a w-event window.
#pragma once

#include <cstdint>
#include <memory>

#include "racemon/detect.h"
#include "racemon/report.h"
#include "racemon/trace.h"

namespace racemon {

// Streaming interface shared by all detectors (used by the CLI stdin path).
class Detector {
  public:
    virtual ~Detector() = default;
    // Feeds one event; index must increase by 1 each call.
    virtual void step(const Event& ev, int64_t index) = 0;
    virtual const Trace& names() const = 0;
    virtual Trace& names() = 0;
    // Finishes the run and hands out the canonical report.
    virtual RaceReport finish() = 0;
    virtual bool done() const = 0;  // true once first_race/decision short-circuit hit
};

// Full-trace happens-before detector (epoch write summaries, full read clocks,
// per-event local clock increments).
std::unique_ptr<Detector> make_hb_detector(const DetectOptions& opt = {});

// Windowed happens-before detector; clocks hold window slot indices of
// releases, so state is O(w) regardless of trace length. Requires w >= 2.
std::unique_ptr<Detector> make_short_hb_detector(int64_t w, const DetectOptions& opt = {});

RaceReport ft_run(const Trace& tr, const DetectOptions& opt = {});
RaceReport sft_run(const Trace& tr, int64_t w, const DetectOptions& opt = {});

}  // namespace racemon
