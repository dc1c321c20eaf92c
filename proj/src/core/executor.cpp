//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/executor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <span>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace edgeplan {

int8_t saturate_i8(long long v) {
    if (v > 127) return 127;
    if (v < -127) return -127;
    return int8_t(v);
}

int8_t requant_value(double v) {
    // llround rounds half away from zero, the declared requant rounding.
    return saturate_i8(std::llround(v));
}

namespace {

struct Hwc {
    uint32_t h, w, c;
};

Hwc hwc_of(const TensorSpec& s) {
    return {s.dims[0], s.dims[1], s.dims[2]};
}

void check_inputs(const Graph& g, const ActivationMap& inputs, DType want) {
    if (!g.shapes_inferred) fail(ErrorCode::InvalidArgument, "graph has no inferred shapes");
    if (want == DType::Float32 && !g.weights_ready)
        fail(ErrorCode::InvalidArgument, "graph weights are not materialised");
    for (const auto& in : g.inputs) {
        auto it = inputs.find(in.name);
        if (it == inputs.end())
            fail(ErrorCode::InvalidArgument, "missing input activation '" + in.name + "'");
        const TensorSpec& spec = g.tensors.at(in.name);
        const Activation& a = it->second;
        if (a.spec.dtype != want)
            fail(ErrorCode::InvalidArgument, "input '" + in.name + "' has dtype " +
                                                 dtype_name(a.spec.dtype) + ", graph runs " +
                                                 dtype_name(want));
        if (a.spec.dims != spec.dims)
            fail(ErrorCode::InvalidArgument, "input '" + in.name + "' shape mismatch");
        if (a.size() != spec.elem_count())
            fail(ErrorCode::InvalidArgument, "input '" + in.name + "' payload length mismatch");
    }
}

// ---- float32 kernels ----

Activation conv_float(const LayerNode& n, const Activation& in, const TensorSpec& out_spec) {
    auto [H, W, C] = hwc_of(in.spec);
    auto [OH, OW, OC] = hwc_of(out_spec);
    Activation out;
    out.spec = out_spec;
    out.f32.resize(out_spec.elem_count());
    const float* x = in.f32.data();
    const float* wgt = n.weights.data();
    const bool biased = !n.bias.empty();
    const size_t ksz = size_t(n.k_h) * n.k_w * C;
    for (uint32_t oh = 0; oh < OH; ++oh)
        for (uint32_t ow = 0; ow < OW; ++ow)
            for (uint32_t oc = 0; oc < OC; ++oc) {
                float acc = 0.0f;
                const float* wk = wgt + size_t(oc) * ksz;
                for (int kh = 0; kh < n.k_h; ++kh) {
                    int ih = int(oh) * n.stride + kh - n.pad;
                    if (ih < 0 || ih >= int(H)) continue;
                    for (int kw = 0; kw < n.k_w; ++kw) {
                        int iw = int(ow) * n.stride + kw - n.pad;
                        if (iw < 0 || iw >= int(W)) continue;
                        const float* xp = x + (size_t(ih) * W + iw) * C;
                        const float* wp = wk + (size_t(kh) * n.k_w + kw) * C;
                        for (uint32_t c = 0; c < C; ++c) acc += xp[c] * wp[c];
                    }
                }
                if (biased) acc += n.bias[oc];
                out.f32[(size_t(oh) * OW + ow) * OC + oc] = acc;
            }
    return out;
}

Activation dense_float(const LayerNode& n, const Activation& in, const TensorSpec& out_spec) {
    Activation out;
    out.spec = out_spec;
    out.f32.resize(out_spec.elem_count());
    const size_t F = size_t(n.in_features);
    const bool biased = !n.bias.empty();
    for (int of = 0; of < n.out_features; ++of) {
        float acc = 0.0f;
        const float* wp = n.weights.data() + size_t(of) * F;
        for (size_t i = 0; i < F; ++i) acc += in.f32[i] * wp[i];
        if (biased) acc += n.bias[size_t(of)];
        out.f32[size_t(of)] = acc;
    }
    return out;
}

template <typename T>
void pool_walk(const TensorSpec& in_spec, const TensorSpec& out_spec, int k, int stride,
               const std::vector<T>& x, std::vector<T>& y, bool take_max, double inv_area,
               bool int_mean) {
    auto [H, W, C] = Hwc{in_spec.dims[0], in_spec.dims[1], in_spec.dims[2]};
    auto [OH, OW, OC] = Hwc{out_spec.dims[0], out_spec.dims[1], out_spec.dims[2]};
    (void)OC;
    y.resize(out_spec.elem_count());
    for (uint32_t oh = 0; oh < OH; ++oh)
        for (uint32_t ow = 0; ow < OW; ++ow)
            for (uint32_t c = 0; c < C; ++c) {
                if (take_max) {
                    T best = x[(size_t(oh) * stride * W + ow * stride) * C + c];
                    for (int kh = 0; kh < k; ++kh)
                        for (int kw = 0; kw < k; ++kw) {
                            T v = x[((size_t(oh) * stride + kh) * W + ow * stride + kw) * C + c];
                            if (v > best) best = v;
                        }
                    y[(size_t(oh) * OW + ow) * C + c] = best;
                } else if (int_mean) {
                    // int8 average: exact int32 window sum, then one rounded
                    // division; the scale passes through unchanged.
                    int32_t sum = 0;
                    for (int kh = 0; kh < k; ++kh)
                        for (int kw = 0; kw < k; ++kw)
                            sum += int32_t(
                                x[((size_t(oh) * stride + kh) * W + ow * stride + kw) * C + c]);
                    y[(size_t(oh) * OW + ow) * C + c] =
                        T(requant_value(double(sum) * inv_area));
                } else {
                    float sum = 0.0f;
                    for (int kh = 0; kh < k; ++kh)
                        for (int kw = 0; kw < k; ++kw)
                            sum += float(
                                x[((size_t(oh) * stride + kh) * W + ow * stride + kw) * C + c]);
                    y[(size_t(oh) * OW + ow) * C + c] = T(sum / float(k * k));
                }
            }
}

template <typename T>
Activation upsample_copy(const LayerNode& n, const Activation& in, const TensorSpec& out_spec,
                         const std::vector<T>& x, std::vector<T> Activation::*field) {
    auto [H, W, C] = hwc_of(in.spec);
    (void)H;
    auto [OH, OW, OC] = hwc_of(out_spec);
    (void)OC;
    Activation out;
    out.spec = out_spec;
    out.scale = in.scale;
    auto& y = out.*field;
    y.resize(out_spec.elem_count());
    for (uint32_t oh = 0; oh < OH; ++oh)
        for (uint32_t ow = 0; ow < OW; ++ow) {
            const T* src = &x[(size_t(oh / n.factor) * W + ow / n.factor) * C];
            T* dst = &y[(size_t(oh) * OW + ow) * C];
            for (uint32_t c = 0; c < C; ++c) dst[c] = src[c];
        }
    return out;
}

// Slice-copy concatenation along `axis`. Treating dims as [outer][axis][inner]
// works for any rank.
template <typename T>
void concat_copy(const std::vector<const Activation*>& ins, int axis, const TensorSpec& out_spec,
                 std::vector<T>& y, const std::vector<T> Activation::*field) {
    y.resize(out_spec.elem_count());
    size_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= out_spec.dims[size_t(d)];
    for (size_t d = size_t(axis) + 1; d < out_spec.dims.size(); ++d) inner *= out_spec.dims[d];
    size_t out_axis = out_spec.dims[size_t(axis)];
    size_t offset = 0;
    for (const Activation* a : ins) {
        size_t a_axis = a->spec.dims[size_t(axis)];
        const auto& x = a->*field;
        for (size_t o = 0; o < outer; ++o)
            std::memcpy(&y[(o * out_axis + offset) * inner], &x[o * a_axis * inner],
                        a_axis * inner * sizeof(T));
        offset += a_axis;
    }
}

// ---- int8 kernels ----

Activation conv_int8(const Graph& g, const LayerNode& n, const Activation& in,
                     const TensorSpec& out_spec) {
    auto [H, W, C] = hwc_of(in.spec);
    auto [OH, OW, OC] = hwc_of(out_spec);
    Activation out;
    out.spec = out_spec;
    out.scale = g.act_scales.at(n.output);
    out.i8.resize(out_spec.elem_count());
    const double m = (in.scale * n.w_scale) / out.scale;
    const int8_t* x = in.i8.data();
    const int8_t* wgt = n.weights_q.data();
    const bool biased = !n.bias_q.empty();
    const size_t ksz = size_t(n.k_h) * n.k_w * C;
    for (uint32_t oh = 0; oh < OH; ++oh)
        for (uint32_t ow = 0; ow < OW; ++ow)
            for (uint32_t oc = 0; oc < OC; ++oc) {
                int32_t acc = 0;
                const int8_t* wk = wgt + size_t(oc) * ksz;
                for (int kh = 0; kh < n.k_h; ++kh) {
                    int ih = int(oh) * n.stride + kh - n.pad;
                    if (ih < 0 || ih >= int(H)) continue;
                    for (int kw = 0; kw < n.k_w; ++kw) {
                        int iw = int(ow) * n.stride + kw - n.pad;
                        if (iw < 0 || iw >= int(W)) continue;
                        const int8_t* xp = x + (size_t(ih) * W + iw) * C;
                        const int8_t* wp = wk + (size_t(kh) * n.k_w + kw) * C;
                        for (uint32_t c = 0; c < C; ++c)
                            acc += int32_t(xp[c]) * int32_t(wp[c]);
                    }
                }
                if (biased) acc += n.bias_q[oc];
                out.i8[(size_t(oh) * OW + ow) * OC + oc] = requant_value(double(acc) * m);
            }
    return out;
}

Activation dense_int8(const Graph& g, const LayerNode& n, const Activation& in,
                      const TensorSpec& out_spec) {
    Activation out;
    out.spec = out_spec;
    out.scale = g.act_scales.at(n.output);
    out.i8.resize(out_spec.elem_count());
    const double m = (in.scale * n.w_scale) / out.scale;
    const size_t F = size_t(n.in_features);
    const bool biased = !n.bias_q.empty();
    for (int of = 0; of < n.out_features; ++of) {
        int32_t acc = 0;
        const int8_t* wp = n.weights_q.data() + size_t(of) * F;
        for (size_t i = 0; i < F; ++i) acc += int32_t(in.i8[i]) * int32_t(wp[i]);
        if (biased) acc += n.bias_q[size_t(of)];
        out.i8[size_t(of)] = requant_value(double(acc) * m);
    }
    return out;
}

ActivationMap exec_impl(const Graph& g, const ActivationMap& inputs, bool int8, bool keep_all) {
    check_inputs(g, inputs, int8 ? DType::Int8 : DType::Float32);
    if (int8 && !g.is_int8)
        fail(ErrorCode::InvalidArgument, "exec_int8 requires a quantised graph");
    if (int8)
        for (const auto& n : g.nodes)
            if (n.has_weights() && n.weights_q.empty())
                fail(ErrorCode::InvalidArgument, "node " + std::to_string(n.id) +
                                                     " has no quantised weights");

    ActivationMap env;
    for (const auto& in : g.inputs) {
        Activation a = inputs.at(in.name);
        if (int8) a.scale = g.act_scales.at(in.name);
        env[in.name] = std::move(a);
    }

    for (int id : g.topo) {
        const LayerNode& n = *g.find_node(id);
        const Activation& a = env.at(n.inputs[0]);
        const TensorSpec& out_spec = g.tensors.at(n.output);
        Activation out;
        switch (n.kind) {
            case LayerKind::Conv2d:
                out = int8 ? conv_int8(g, n, a, out_spec) : conv_float(n, a, out_spec);
                break;
            case LayerKind::Dense:
                out = int8 ? dense_int8(g, n, a, out_spec) : dense_float(n, a, out_spec);
                break;
            case LayerKind::Relu: {
                out.spec = out_spec;
                out.scale = a.scale;
                if (int8) {
                    out.i8.resize(a.i8.size());
                    for (size_t i = 0; i < a.i8.size(); ++i)
                        out.i8[i] = a.i8[i] > 0 ? a.i8[i] : int8_t(0);
                } else {
                    out.f32.resize(a.f32.size());
                    for (size_t i = 0; i < a.f32.size(); ++i)
                        out.f32[i] = std::max(0.0f, a.f32[i]);
                }
                break;
            }
            case LayerKind::Maxpool: {
                out.spec = out_spec;
                out.scale = a.scale;
                if (int8)
                    pool_walk(a.spec, out_spec, n.pool_k, n.pool_stride, a.i8, out.i8, true, 0.0,
                              false);
                else
                    pool_walk(a.spec, out_spec, n.pool_k, n.pool_stride, a.f32, out.f32, true, 0.0,
                              false);
                break;
            }
            case LayerKind::Avgpool: {
                out.spec = out_spec;
                out.scale = a.scale;
                double inv = 1.0 / (double(n.pool_k) * n.pool_k);
                if (int8)
                    pool_walk(a.spec, out_spec, n.pool_k, n.pool_stride, a.i8, out.i8, false, inv,
                              true);
                else
                    pool_walk(a.spec, out_spec, n.pool_k, n.pool_stride, a.f32, out.f32, false, inv,
                              false);
                break;
            }
            case LayerKind::UpsampleNearest:
                out = int8 ? upsample_copy(n, a, out_spec, a.i8, &Activation::i8)
                           : upsample_copy(n, a, out_spec, a.f32, &Activation::f32);
                break;
            case LayerKind::Add: {
                out.spec = out_spec;
                if (int8) {
                    // Each operand carries its own scale; the sum is formed in
                    // float64 and requantised once to the output scale.
                    out.scale = g.act_scales.at(n.output);
                    size_t len = a.i8.size();
                    out.i8.resize(len);
                    for (size_t i = 0; i < len; ++i) {
                        double v = 0.0;
                        for (const auto& name : n.inputs) {
                            const Activation& t = env.at(name);
                            v += double(t.i8[i]) * t.scale;
                        }
                        out.i8[i] = requant_value(v / out.scale);
                    }
                } else {
                    size_t len = a.f32.size();
                    out.f32 = a.f32;
                    for (size_t j = 1; j < n.inputs.size(); ++j) {
                        const Activation& t = env.at(n.inputs[j]);
                        for (size_t i = 0; i < len; ++i) out.f32[i] += t.f32[i];
                    }
                }
                break;
            }
            case LayerKind::Concat: {
                out.spec = out_spec;
                std::vector<const Activation*> ins;
                ins.reserve(n.inputs.size());
                for (const auto& name : n.inputs) ins.push_back(&env.at(name));
                if (int8) {
                    // Inputs are requantised to the common output scale first,
                    // then concatenated as plain code copies.
                    out.scale = g.act_scales.at(n.output);
                    std::vector<Activation> requantised(ins.size());
                    for (size_t j = 0; j < ins.size(); ++j) {
                        requantised[j].spec = ins[j]->spec;
                        requantised[j].scale = out.scale;
                        requantised[j].i8.resize(ins[j]->i8.size());
                        double f = ins[j]->scale / out.scale;
                        for (size_t i = 0; i < ins[j]->i8.size(); ++i)
                            requantised[j].i8[i] = requant_value(double(ins[j]->i8[i]) * f);
                    }
                    std::vector<const Activation*> rq;
                    for (auto& r : requantised) rq.push_back(&r);
                    concat_copy(rq, n.axis, out_spec, out.i8, &Activation::i8);
                } else {
                    concat_copy(ins, n.axis, out_spec, out.f32, &Activation::f32);
                }
                break;
            }
            case LayerKind::Identity: {
                out = a;
                out.spec = out_spec;
                break;
            }
        }
        env[n.output] = std::move(out);
    }

    if (keep_all) return env;
    ActivationMap result;
    for (const auto& name : g.outputs) result[name] = env.at(name);
    return result;
}

} // namespace

ActivationMap exec_float(const Graph& g, const ActivationMap& inputs) {
    return exec_impl(g, inputs, false, false);
}

ActivationMap exec_float_all(const Graph& g, const ActivationMap& inputs) {
    return exec_impl(g, inputs, false, true);
}

ActivationMap exec_int8(const Graph& g, const ActivationMap& inputs) {
    return exec_impl(g, inputs, true, false);
}

ActivationMap exec_int8_all(const Graph& g, const ActivationMap& inputs) {
    return exec_impl(g, inputs, true, true);
}

CompareReport compare_outputs(const Activation& a, const Activation& b) {
    if (a.spec.dtype != b.spec.dtype)
        fail(ErrorCode::InvalidArgument, "compare_outputs: dtype mismatch");
    Activation bn = b;
    if (a.spec.layout != b.spec.layout) bn = convert_layout(b, a.spec.layout);
    if (a.spec.dims != bn.spec.dims)
        fail(ErrorCode::InvalidArgument, "compare_outputs: shape mismatch on '" + a.spec.name +
                                             "' vs '" + b.spec.name + "'");

    CompareReport r;
    r.bitwise_equal = true;
    auto scan = [&](auto va, auto vb) {
        for (size_t i = 0; i < va.size(); ++i) {
            double x = double(va[i]), y = double(vb[i]);
            if (std::memcmp(&va[i], &vb[i], sizeof va[i]) != 0) {
                r.bitwise_equal = false;
                ++r.mismatches;
            }
            double d = std::fabs(x - y);
            r.max_abs = std::max(r.max_abs, d);
            double den = std::max(std::fabs(x), std::fabs(y));
            if (den > 0.0) r.max_rel = std::max(r.max_rel, d / den);
        }
    };
    if (a.spec.dtype == DType::Int8)
        scan(std::span(a.i8), std::span(bn.i8));
    else
        scan(std::span(a.f32), std::span(bn.f32));
    return r;
}

ActivationMap make_seeded_inputs(const Graph& g, uint64_t seed) {
    if (!g.shapes_inferred) fail(ErrorCode::InvalidArgument, "graph has no inferred shapes");
    constexpr uint64_t kInputTag = 0x7E570001;
    ActivationMap m;
    uint64_t idx = 0;
    for (const auto& in : g.inputs) {
        const TensorSpec& spec = g.tensors.at(in.name);
        Activation a;
        a.spec = spec;
        a.spec.dtype = DType::Float32;
        Rng rng(mix_seed(mix_seed(seed, kInputTag), idx++));
        a.f32.resize(spec.elem_count());
        for (auto& v : a.f32) v = float(rng.uniform(-1.0, 1.0));
        m[in.name] = std::move(a);
    }
    return m;
}

} // namespace edgeplan
