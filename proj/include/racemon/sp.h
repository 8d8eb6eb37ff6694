// SPDX-License-Identifier: MIT
// Sync-preserving race detectors: ideal fixed points over thread-local
// closures, full-trace and bounded-window (spill/replay) variants.
#pragma once

#include <cstdint>
#include <memory>

#include "racemon/detect.h"
#include "racemon/hb.h"
#include "racemon/report.h"
#include "racemon/trace.h"

namespace racemon {

// Windowed sync-preserving detector. Keeps access and critical-section records
// for window-resident events plus at most one spilled open section per lock;
// live records never exceed w + L. Requires w >= 2.
std::unique_ptr<Detector> make_short_sp_detector(int64_t w, const DetectOptions& opt = {});

RaceReport ssp_run(const Trace& tr, int64_t w, const DetectOptions& opt = {});

// Full-trace baseline: the windowed detector with w = max(N, 2), which never
// evicts and therefore degenerates to the unwindowed analysis.
RaceReport syncp_run(const Trace& tr, const DetectOptions& opt = {});

}  // namespace racemon
