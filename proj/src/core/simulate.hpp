//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
// Frame-level execution models for a staged deployment. Sequential mode
// swaps one stage at a time onto a single device and pays a weight load
// per stage per frame; pipelined mode gives every stage its own device
// and moves intermediate tensors over point-to-point links.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/memory.hpp"

namespace edgeplan {

struct StageCost {
    std::string name;
    double compute_ms = 0.0; // time for one pass
    uint32_t passes = 1;
    uint64_t weight_bytes = 0;
    uint64_t transfer_out_bytes = 0;
};

struct SimResult {
    std::string mode;
    uint32_t frames = 0;
    std::vector<std::string> stage_names;
    std::vector<double> stage_total_ms; // compute_ms * passes
    std::vector<double> stage_load_ms;  // weight_bytes / load bandwidth
    std::vector<double> link_ms;        // transfer after each non-final stage
    std::vector<double> stage_share;    // fraction of the per-frame latency
    std::vector<double> frame_done_ms;  // completion time of each frame
    double frame_latency_ms = 0.0;      // first frame, start to finish
    double steady_period_ms = 0.0;      // declared bound
    double measured_period_ms = 0.0;    // tail gap between completions
    double makespan_ms = 0.0;
    int bottleneck = -1;
};

double cycles_to_ms(double cycles, double clock_hz);
int64_t ms_to_cycles(double ms, double clock_hz);

// Per-stage compute time for one frame.
double stage_total_ms(const StageCost& c);

// Time on the wire for one stage's output, in ms. Zero bytes cost nothing,
// not even the link latency.
double transfer_ms(uint64_t bytes, const DeviceSpec& dev);

SimResult simulate_sequential(const std::vector<StageCost>& stages, const DeviceSpec& dev,
                              uint32_t frames);

// Event recurrence over stages and frames. A stage starts a frame once it
// has finished the previous frame and the data has arrived; each link is a
// dedicated resource that carries one tensor at a time, overlapping with
// compute on both sides. The final stage's output stays on its device, so
// its transfer_out_bytes never enters the timeline.
SimResult simulate_pipelined(const std::vector<StageCost>& stages, const DeviceSpec& dev,
                             uint32_t frames);

// Per-run totals under per-stage Gaussian jitter: each run sums
// max(0, total_i + sigma_i * N(0,1)) over stages. Deterministic per seed;
// run j draws from its own substream.
std::vector<double> jitter_model(const std::vector<StageCost>& stages,
                                 const std::vector<double>& sigma_ms, uint64_t seed,
                                 uint32_t runs);

} // namespace edgeplan
