//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/plan.hpp"

namespace edgeplan {

struct DeviceSpec {
    std::string name;
    uint64_t flash_bytes = 0;
    uint64_t l2_bytes = 0;
    uint64_t ram_bytes = 0;
    uint64_t l1_bytes = 0;
    double clock_hz = 0.0;
    double load_bandwidth_bytes_per_s = 0.0;
    double link_bandwidth_bytes_per_s = 0.0;
    double link_latency_s = 0.0;
};

enum class Placement : uint8_t { L2, RAM };

inline const char* placement_name(Placement p) { return p == Placement::L2 ? "L2" : "RAM"; }

// Liveness interval of one tensor over the topo schedule: production step
// (graph inputs: 0) through last consumer step (graph outputs: the final
// step; tensors nobody reads: their production step).
struct TensorLife {
    int prod = 0;
    int last = 0;
    uint64_t bytes = 0;
};

std::map<std::string, TensorLife> tensor_lifetimes(const Graph& g);

// Live activation bytes at every schedule step. A tensor is live from its
// production step through its last consumer's step; graph inputs count from
// step 0 and graph outputs stay live through the final step. No in-place
// reuse is assumed, which keeps the model a declared upper bound.
std::vector<uint64_t> live_bytes_per_step(const Graph& g);

// Peak of live_bytes_per_step.
uint64_t peak_activation(const Graph& g);

// L2 if the working set fits, RAM otherwise; exceeding RAM is an
// infeasibility error.
Placement place(uint64_t working_bytes, const DeviceSpec& dev);

// Row-band tiling of one conv layer, double-buffered activations with
// resident (un-tiled) weights. tile_rows counts output rows per tile; the
// matching input band is (tile_rows-1)*stride + k_h rows, i.e. a halo of
// k_h-1 rows beyond the stride-covered span.
struct TilePlan {
    uint32_t tile_rows = 0;
    uint32_t n_tiles = 0;
    uint32_t halo_rows = 0;
    uint64_t buffer_bytes = 0;
    uint64_t transfer_bytes_total = 0;
};

TilePlan tile_plan(const LayerNode& conv, const TensorSpec& in, const TensorSpec& out,
                   uint64_t budget);

struct StageTile {
    int node_id = 0;
    bool feasible = false;
    std::string note;
    TilePlan plan;
};

struct StageMemory {
    std::string name;
    uint64_t weight_bytes = 0;
    uint64_t working_bytes = 0;
    Placement placement = Placement::L2;
    bool exceeds_flash = false;
    uint64_t transfer_in_bytes = 0;
    uint64_t transfer_out_bytes = 0;
    std::vector<std::string> transfer_out_names;
    std::vector<StageTile> tiles;
};

struct MemoryReport {
    std::vector<StageMemory> stages;
    uint64_t total_weight_bytes = 0;
    uint64_t max_working_bytes = 0;
};

// Per-stage weight footprint, liveness peak, placement, tile feasibility
// (against the device's L1 budget) and boundary transfer sizes, for the
// graph as currently inferred/quantised.
MemoryReport memory_report(const Graph& g, const PartitionPlan& p, const DeviceSpec& dev);

} // namespace edgeplan
