//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
// JSON readers and writers for the document formats: model graphs, device
// descriptions, partition plans, stage-cost tables, and the reference
// memory table.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/memory.hpp"
#include "core/plan.hpp"
#include "core/simulate.hpp"

namespace edgeplan {

// Parses and structurally validates a model document. Shapes and weights
// are not resolved here; call infer_shapes and materialize_weights next.
Graph load_model_text(const std::string& text, const std::string& doc_name);
Graph load_model_file(const std::string& path);

DeviceSpec load_device_text(const std::string& text, const std::string& doc_name);
DeviceSpec load_device_file(const std::string& path);

// Plan documents carry stage names and node-id sets. The result is not yet
// validated against any graph; pass it through split_nodes for that.
PartitionPlan load_plan_text(const std::string& text, const std::string& doc_name);
PartitionPlan load_plan_file(const std::string& path);
std::string plan_to_json(const PartitionPlan& p);
void save_plan_file(const std::string& path, const PartitionPlan& p);

// Stage-cost tables: either a bare JSON list of stage objects or an object
// with a "stages" list.
std::vector<StageCost> load_stage_costs_text(const std::string& text,
                                             const std::string& doc_name);
std::vector<StageCost> load_stage_costs_file(const std::string& path);

// Reference memory table: per model, reported byte counts for flash, L2,
// and RAM, each as an original/optimised pair; absent measurements are null.
struct ReferenceMemoryEntry {
    std::string name;
    std::optional<uint64_t> flash_original, flash_optimised;
    std::optional<uint64_t> l2_original, l2_optimised;
    std::optional<uint64_t> ram_original, ram_optimised;
};
std::vector<ReferenceMemoryEntry> load_reference_memory_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Directory part of a path ("." when there is none).
std::string dir_of(const std::string& path);

} // namespace edgeplan
