//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/tensor.hpp"

#include <cstring>
#include <fstream>

#include "core/error.hpp"

namespace edgeplan {

const char* dtype_name(DType t) {
    switch (t) {
        case DType::Float32: return "float32";
        case DType::Int8: return "int8";
        case DType::Int32: return "int32";
    }
    return "?";
}

const char* layout_name(Layout l) {
    switch (l) {
        case Layout::HWC: return "hwc";
        case Layout::CHW: return "chw";
        case Layout::Flat: return "flat";
    }
    return "?";
}

DType dtype_from_name(const std::string& s) {
    if (s == "float32") return DType::Float32;
    if (s == "int8") return DType::Int8;
    if (s == "int32") return DType::Int32;
    fail(ErrorCode::Parse, "unknown dtype '" + s + "'");
}

Layout layout_from_name(const std::string& s) {
    if (s == "hwc") return Layout::HWC;
    if (s == "chw") return Layout::CHW;
    if (s == "flat") return Layout::Flat;
    fail(ErrorCode::Parse, "unknown layout '" + s + "'");
}

Activation convert_layout(const Activation& a, Layout target) {
    if (a.spec.layout == target) return a;
    if (a.spec.dims.size() != 3 || a.spec.layout == Layout::Flat || target == Layout::Flat)
        fail(ErrorCode::InvalidArgument,
             "layout conversion requires a rank-3 spatial tensor, got rank " +
                 std::to_string(a.spec.dims.size()) + " " + layout_name(a.spec.layout));

    uint32_t h, w, c;
    if (a.spec.layout == Layout::HWC) {
        h = a.spec.dims[0]; w = a.spec.dims[1]; c = a.spec.dims[2];
    } else {
        c = a.spec.dims[0]; h = a.spec.dims[1]; w = a.spec.dims[2];
    }

    Activation out;
    out.spec = a.spec;
    out.spec.layout = target;
    out.spec.dims = target == Layout::HWC ? std::vector<uint32_t>{h, w, c}
                                          : std::vector<uint32_t>{c, h, w};
    out.scale = a.scale;

    auto permute = [&](auto& src, auto& dst) {
        dst.resize(src.size());
        for (uint32_t ci = 0; ci < c; ++ci)
            for (uint32_t hi = 0; hi < h; ++hi)
                for (uint32_t wi = 0; wi < w; ++wi) {
                    size_t hwc = (size_t(hi) * w + wi) * c + ci;
                    size_t chw = (size_t(ci) * h + hi) * w + wi;
                    if (target == Layout::HWC)
                        dst[hwc] = src[chw];
                    else
                        dst[chw] = src[hwc];
                }
    };
    if (a.spec.dtype == DType::Int8)
        permute(a.i8, out.i8);
    else
        permute(a.f32, out.f32);
    return out;
}

namespace {

constexpr char kMagic[4] = {'E', 'T', 'N', 'S'};

void put_u32le(std::string& s, uint32_t v) {
    s.push_back(char(v & 0xff));
    s.push_back(char((v >> 8) & 0xff));
    s.push_back(char((v >> 16) & 0xff));
    s.push_back(char((v >> 24) & 0xff));
}

uint32_t get_u32le(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

} // namespace

Tensor read_tensor_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot open tensor file '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 6 || std::memcmp(buf.data(), kMagic, 4) != 0)
        fail(ErrorCode::Parse, "'" + path + "' is not a tensor file (bad magic)");

    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    uint8_t code = p[4];
    uint8_t rank = p[5];
    if (code > 2) fail(ErrorCode::Parse, "'" + path + "': unknown dtype code " + std::to_string(code));
    if (rank > 4) fail(ErrorCode::Parse, "'" + path + "': rank " + std::to_string(rank) + " exceeds 4");
    size_t need = 6 + size_t(rank) * 4;
    if (buf.size() < need) fail(ErrorCode::Parse, "'" + path + "': truncated header");

    Tensor t;
    t.dtype = static_cast<DType>(code);
    uint64_t count = 1;
    for (uint8_t i = 0; i < rank; ++i) {
        uint32_t d = get_u32le(p + 6 + i * 4);
        if (d == 0) fail(ErrorCode::Parse, "'" + path + "': zero extent");
        t.dims.push_back(d);
        count *= d;
    }
    size_t payload = count * dtype_size(t.dtype);
    if (buf.size() != need + payload)
        fail(ErrorCode::Parse, "'" + path + "': payload is " + std::to_string(buf.size() - need) +
                                   " bytes, expected " + std::to_string(payload));
    const char* data = buf.data() + need;
    switch (t.dtype) {
        case DType::Float32:
            t.f32.resize(count);
            std::memcpy(t.f32.data(), data, payload);
            break;
        case DType::Int8:
            t.i8.resize(count);
            std::memcpy(t.i8.data(), data, payload);
            break;
        case DType::Int32:
            t.i32.resize(count);
            std::memcpy(t.i32.data(), data, payload);
            break;
    }
    return t;
}

void write_tensor_file(const std::string& path, const Tensor& t) {
    uint64_t count = 1;
    for (uint32_t d : t.dims) count *= d;
    size_t have = t.dtype == DType::Float32 ? t.f32.size()
                : t.dtype == DType::Int8   ? t.i8.size()
                                           : t.i32.size();
    if (have != count)
        fail(ErrorCode::InvalidArgument, "tensor payload size does not match extents");
    if (t.dims.size() > 4) fail(ErrorCode::InvalidArgument, "tensor rank exceeds 4");

    std::string out;
    out.append(kMagic, 4);
    out.push_back(char(static_cast<uint8_t>(t.dtype)));
    out.push_back(char(uint8_t(t.dims.size())));
    for (uint32_t d : t.dims) put_u32le(out, d);
    size_t payload = count * dtype_size(t.dtype);
    size_t head = out.size();
    out.resize(head + payload);
    const void* src = t.dtype == DType::Float32 ? static_cast<const void*>(t.f32.data())
                    : t.dtype == DType::Int8   ? static_cast<const void*>(t.i8.data())
                                               : static_cast<const void*>(t.i32.data());
    if (payload) std::memcpy(out.data() + head, src, payload);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::Io, "cannot write tensor file '" + path + "'");
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) fail(ErrorCode::Io, "short write to '" + path + "'");
}

} // namespace edgeplan
