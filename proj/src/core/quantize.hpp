//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <vector>

#include "core/executor.hpp"
#include "core/graph.hpp"

namespace edgeplan {

// Symmetric per-tensor quantisation: codes in [-127, 127], zero point 0.
struct QuantParams {
    double scale = 1.0;
};

struct QuantizedTensor {
    TensorSpec spec;
    std::vector<int8_t> data;
    QuantParams params;
};

// scale = max|t| / 127; an all-zero tensor gets the degenerate scale 1.
QuantParams calibrate_scale(const std::vector<float>& t);

// q = saturate(round_half_away_from_zero(x / scale), -127, 127)
QuantizedTensor quantize(const std::vector<float>& t, const TensorSpec& spec, QuantParams p);

std::vector<float> dequantize(const QuantizedTensor& q);

// Quantise every weighted layer (weights to int8 at max-abs/127, bias to
// int32 at s_in * s_w) and attach a scale to every tensor. Kinds that only
// rearrange or clip codes (relu, maxpool, avgpool, upsample_nearest,
// identity) inherit their input's scale; value-producing kinds (conv2d,
// dense, add, concat) and graph inputs are calibrated from a float32
// execution over the supplied sample activations. Returns a new graph; the
// input graph is untouched.
Graph quantize_graph(const Graph& g, const ActivationMap& calibration);

// Quantise float inputs with the graph's calibrated input scales.
ActivationMap quantize_inputs(const Graph& gq, const ActivationMap& float_inputs);

// Dequantised-int8 vs float32 output comparison over seeded inputs.
struct QuantErrorSummary {
    double max_abs = 0.0;
    double max_rel = 0.0;
    uint32_t trials = 0;
};
QuantErrorSummary quant_error_summary(const Graph& g_float, const Graph& g_int8, uint32_t trials,
                                      uint64_t seed);

} // namespace edgeplan
