//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
// Text renderers for command output. Everything here is deterministic:
// fixed column orders, fixed float formatting, no timestamps.
#pragma once

#include <string>
#include <vector>

#include "core/memory.hpp"
#include "core/model_io.hpp"
#include "core/partition.hpp"
#include "core/quantize.hpp"
#include "core/simulate.hpp"
#include "core/stats.hpp"

namespace edgeplan {

// Side-by-side memory tables. "original" and "optimised" must cover the
// same stages in the same order. Byte counts are printed unseparated so
// the text can be matched against fixture values directly.
std::string render_memory_csv(const MemoryReport& original, const MemoryReport& optimised);
std::string render_memory_markdown(const MemoryReport& original, const MemoryReport& optimised,
                                   const DeviceSpec& dev);

std::string render_frames_csv(const SimResult& r);
std::string render_sim_summary_json(const SimResult& r);
std::string render_bootstrap_json(const BootstrapResult& b, const ShapiroWilk* sw);

std::string render_verify_json(const VerifyReport& r, const QuantErrorSummary* quant);

// The comparison document: reference byte counts and stage latencies on
// one side, locally computed plans on the other. Either local report may
// be omitted.
std::string render_fixture_report_markdown(const std::vector<ReferenceMemoryEntry>& ref,
                                           const std::vector<StageCost>& costs,
                                           const MemoryReport* local_original,
                                           const MemoryReport* local_optimised);

} // namespace edgeplan
