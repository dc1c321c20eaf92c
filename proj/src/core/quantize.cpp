//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/quantize.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace edgeplan {

QuantParams calibrate_scale(const std::vector<float>& t) {
    if (t.empty()) fail(ErrorCode::InvalidArgument, "calibrate_scale: empty tensor");
    double maxabs = 0.0;
    for (float v : t) maxabs = std::max(maxabs, double(std::fabs(v)));
    QuantParams p;
    p.scale = maxabs == 0.0 ? 1.0 : maxabs / 127.0;
    return p;
}

QuantizedTensor quantize(const std::vector<float>& t, const TensorSpec& spec, QuantParams p) {
    if (p.scale <= 0.0) fail(ErrorCode::InvalidArgument, "quantize: scale must be positive");
    QuantizedTensor q;
    q.spec = spec;
    q.spec.dtype = DType::Int8;
    q.params = p;
    q.data.resize(t.size());
    for (size_t i = 0; i < t.size(); ++i) q.data[i] = requant_value(double(t[i]) / p.scale);
    return q;
}

std::vector<float> dequantize(const QuantizedTensor& q) {
    std::vector<float> out(q.data.size());
    for (size_t i = 0; i < q.data.size(); ++i) out[i] = float(double(q.data[i]) * q.params.scale);
    return out;
}

namespace {

bool preserves_scale(LayerKind k) {
    switch (k) {
        case LayerKind::Relu:
        case LayerKind::Maxpool:
        case LayerKind::Avgpool:
        case LayerKind::UpsampleNearest:
        case LayerKind::Identity:
            return true;
        default:
            return false;
    }
}

} // namespace

Graph quantize_graph(const Graph& g, const ActivationMap& calibration) {
    if (!g.shapes_inferred || !g.weights_ready)
        fail(ErrorCode::InvalidArgument, "quantize_graph needs inferred shapes and weights");
    if (g.is_int8) fail(ErrorCode::InvalidArgument, "graph is already quantised");
    if (calibration.empty()) fail(ErrorCode::InvalidArgument, "missing calibration data");
    for (const auto& in : g.inputs)
        if (!calibration.count(in.name))
            fail(ErrorCode::InvalidArgument, "missing calibration data for input '" + in.name + "'");

    // One float pass provides the observed value range of every tensor.
    ActivationMap observed = exec_float_all(g, calibration);

    Graph q = g;
    q.is_int8 = true;
    q.act_scales.clear();

    auto calibrated = [&](const std::string& name) {
        return calibrate_scale(observed.at(name).f32).scale;
    };
    for (const auto& in : q.inputs) q.act_scales[in.name] = calibrated(in.name);
    for (int id : q.topo) {
        const LayerNode& n = *q.find_node(id);
        q.act_scales[n.output] = preserves_scale(n.kind) ? q.act_scales.at(n.inputs[0])
                                                         : calibrated(n.output);
    }

    for (auto& n : q.nodes) {
        if (!n.has_weights()) continue;
        QuantParams wp = calibrate_scale(n.weights);
        n.w_scale = wp.scale;
        n.weights_q.resize(n.weights.size());
        for (size_t i = 0; i < n.weights.size(); ++i)
            n.weights_q[i] = requant_value(double(n.weights[i]) / wp.scale);
        if (!n.bias.empty()) {
            double bias_scale = q.act_scales.at(n.inputs[0]) * wp.scale;
            n.bias_q.resize(n.bias.size());
            for (size_t i = 0; i < n.bias.size(); ++i) {
                double v = double(n.bias[i]) / bias_scale;
                long long r = std::llround(v);
                n.bias_q[i] = int32_t(r);
            }
        }
        // The float payload is dropped; the int8 graph owns only int8
        // weights and int32 bias, which is what the footprint math counts.
        n.weights.clear();
        n.bias.clear();
    }

    // Activation specs flip to int8 (1 byte per element).
    for (auto& [name, spec] : q.tensors) spec.dtype = DType::Int8;
    return q;
}

ActivationMap quantize_inputs(const Graph& gq, const ActivationMap& float_inputs) {
    if (!gq.is_int8) fail(ErrorCode::InvalidArgument, "quantize_inputs needs a quantised graph");
    ActivationMap out;
    for (const auto& in : gq.inputs) {
        auto it = float_inputs.find(in.name);
        if (it == float_inputs.end())
            fail(ErrorCode::InvalidArgument, "missing input '" + in.name + "'");
        const Activation& f = it->second;
        Activation a;
        a.spec = f.spec;
        a.spec.dtype = DType::Int8;
        a.scale = gq.act_scales.at(in.name);
        a.i8.resize(f.f32.size());
        for (size_t i = 0; i < f.f32.size(); ++i)
            a.i8[i] = requant_value(double(f.f32[i]) / a.scale);
        out[in.name] = std::move(a);
    }
    return out;
}

QuantErrorSummary quant_error_summary(const Graph& g_float, const Graph& g_int8, uint32_t trials,
                                      uint64_t seed) {
    QuantErrorSummary s;
    s.trials = trials;
    for (uint32_t t = 0; t < trials; ++t) {
        ActivationMap inputs = make_seeded_inputs(g_float, mix_seed(seed, t));
        ActivationMap ref = exec_float(g_float, inputs);
        ActivationMap got = exec_int8(g_int8, quantize_inputs(g_int8, inputs));
        for (const auto& name : g_float.outputs) {
            const Activation& a = ref.at(name);
            const Activation& b = got.at(name);
            for (size_t i = 0; i < a.f32.size(); ++i) {
                double x = double(a.f32[i]);
                double y = double(b.i8[i]) * b.scale;
                double d = std::fabs(x - y);
                s.max_abs = std::max(s.max_abs, d);
                double den = std::max(std::fabs(x), std::fabs(y));
                if (den > 0.0) s.max_rel = std::max(s.max_rel, d / den);
            }
        }
    }
    return s;
}

} // namespace edgeplan
