//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edgeplan {

enum class DType : uint8_t {
    Float32 = 0,
    Int8 = 1,
    Int32 = 2,
};

enum class Layout : uint8_t {
    HWC,
    CHW,
    Flat,
};

inline size_t dtype_size(DType t) {
    switch (t) {
        case DType::Int8: return 1;
        default: return 4;
    }
}

const char* dtype_name(DType t);
const char* layout_name(Layout l);
DType dtype_from_name(const std::string& s);
Layout layout_from_name(const std::string& s);

struct TensorSpec {
    std::string name;
    std::vector<uint32_t> dims;
    Layout layout = Layout::HWC;
    DType dtype = DType::Float32;

    uint64_t elem_count() const {
        uint64_t n = 1;
        for (uint32_t d : dims) n *= d;
        return n;
    }
    uint64_t byte_size() const { return elem_count() * dtype_size(dtype); }
};

// One tensor payload plus its spec. Exactly one of the data vectors is
// populated, matching spec.dtype. Int8 activations carry a quantisation
// scale (float units per integer step, zero point always 0).
struct Activation {
    TensorSpec spec;
    std::vector<float> f32;
    std::vector<int8_t> i8;
    double scale = 1.0;

    size_t size() const { return spec.dtype == DType::Int8 ? i8.size() : f32.size(); }
};

// Generic tensor-file payload (weights, biases, dumped activations).
struct Tensor {
    DType dtype = DType::Float32;
    std::vector<uint32_t> dims;
    std::vector<float> f32;
    std::vector<int8_t> i8;
    std::vector<int32_t> i32;
};

// Reorder a rank-3 activation between HWC and CHW. The dims vector is
// always stored in layout order (HWC: h,w,c; CHW: c,h,w). Element mapping:
// hwc[(h*W + w)*C + c] = chw[(c*H + h)*W + w].
Activation convert_layout(const Activation& a, Layout target);

// Binary tensor file: magic "ETNS", 1-byte dtype code, 1-byte rank, then
// rank little-endian uint32 extents, then the raw payload row-major in the
// declared layout order.
Tensor read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const Tensor& t);

} // namespace edgeplan
