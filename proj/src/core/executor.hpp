//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <map>
#include <string>

#include "core/graph.hpp"
#include "core/tensor.hpp"

namespace edgeplan {

using ActivationMap = std::map<std::string, Activation>;

// Float32 forward pass. Accumulation is float32 with a fixed summation
// order (kernel rows, then kernel columns, then channels; bias added after
// the window sum), which makes staged execution bitwise-reproducible:
// float addition is not associative, so the order is part of the contract.
// Returns the graph outputs only.
ActivationMap exec_float(const Graph& g, const ActivationMap& inputs);

// Same pass, returning every produced tensor (used for calibration and for
// feeding partition stages).
ActivationMap exec_float_all(const Graph& g, const ActivationMap& inputs);

// Int8 forward pass over a quantised graph. conv/dense accumulate in int32,
// bias is added in int32, and the accumulator is requantised by
// (s_in * s_w / s_out) computed in float64, rounded half-away-from-zero and
// saturated to [-127, 127]. Scale-preserving kinds (relu, maxpool, avgpool,
// upsample_nearest, identity) operate on codes directly.
ActivationMap exec_int8(const Graph& g, const ActivationMap& inputs);
ActivationMap exec_int8_all(const Graph& g, const ActivationMap& inputs);

struct CompareReport {
    bool bitwise_equal = false;
    double max_abs = 0.0;
    double max_rel = 0.0;
    uint64_t mismatches = 0;
};

// Elementwise comparison after layout normalisation. Fails on shape
// mismatch; dtype must agree.
CompareReport compare_outputs(const Activation& a, const Activation& b);

// Deterministic float32 inputs, uniform in [-1, 1), one substream per graph
// input so adding inputs never shifts existing streams.
ActivationMap make_seeded_inputs(const Graph& g, uint64_t seed);

// Requantisation helper shared with the quantizer and the test oracles.
int8_t saturate_i8(long long v);
int8_t requant_value(double v);

} // namespace edgeplan
