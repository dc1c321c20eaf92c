//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

namespace edgeplan {

// A partition is stored as named node-id sets, in pipeline order. Stage
// sub-graphs and boundary tensor sets are derived from the parent graph on
// demand, so one plan can be applied to the same topology at different
// resolutions or dtypes.
struct PlanStage {
    std::string name;
    std::vector<int> node_ids;
};

struct PartitionPlan {
    std::vector<PlanStage> stages;
};

} // namespace edgeplan
