//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/memory.hpp"
#include "core/plan.hpp"

namespace edgeplan {

// Stage sub-graphs plus the tensors crossing each boundary. Stage i's
// sub-graph declares as inputs every tensor it needs from earlier stages
// (pass-through tensors included: they are declared as both input and
// output, so they stay resident for the whole stage) and as outputs every
// tensor later stages or the caller still need.
struct StagedGraphs {
    std::vector<Graph> stages;
    std::vector<std::vector<std::string>> boundary_tensors; // size = stages-1
};

StagedGraphs build_stages(const Graph& g, const PartitionPlan& p);

// Cut the canonical topological order after the given positions (a cut at
// position p separates topo[0..p) from topo[p..n)). Positions are strictly
// increasing, each in [1, n-1]. Stages get generated names.
PartitionPlan split_at(const Graph& g, const std::vector<uint32_t>& cut_positions);

// Build a plan from explicit named node sets. The sets must partition the
// graph's nodes and respect dataflow: a node's producers may never sit in a
// later stage (invalid frontier otherwise).
PartitionPlan split_nodes(const Graph& g, const std::vector<PlanStage>& stages);

// Exhaustive search over all C(n-1, k-1) cut combinations of the canonical
// topological order. Objective, lexicographic: (1) minimise the maximum
// over stages of working+weight bytes, (2) minimise total boundary transfer
// bytes, (3) earliest cut positions. Stages must fit the device (working
// set within RAM). Fails if no combination is feasible, or if the
// combination count exceeds an internal guard (5e6).
PartitionPlan auto_cuts(const Graph& g, const DeviceSpec& dev, uint32_t k);

struct VerifyTrial {
    uint64_t seed = 0;
    bool bitwise_equal = false;
    double max_abs = 0.0;
};

struct VerifyReport {
    std::vector<VerifyTrial> trials;
    bool all_equal = true;
    int corrupted_node_id = -1; // fault-injection target, -1 when unused
};

// Run the monolithic float pass and the staged composition over `trials`
// seeded random inputs and compare outputs bitwise. corrupt_stage >= 0
// perturbs the first weight of that stage's first weighted node (on a
// copy), for exercising the failure path.
VerifyReport verify_plan(const Graph& g, const PartitionPlan& p, uint32_t trials, uint64_t seed,
                         int corrupt_stage = -1);

} // namespace edgeplan
