#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "motionfield/grid.hpp"

namespace motionfield::io {

// Middlebury .flo: float32 magic 202021.25, int32 width, int32 height, then
// height*width interleaved (u, v) float32 values, row-major, all little-endian.
inline constexpr float flo_magic = 202021.25f;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    std::uint32_t bits;
    static_assert(sizeof(T) == 4);
    std::memcpy(&bits, &value, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    T value;
    std::memcpy(&value, &bits, 4);
    return value;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_flo(const FlowFrame& flow) {
    std::vector<std::uint8_t> out;
    out.reserve(12 + flow.size() * 8);
    detail::put_le(out, flo_magic);
    detail::put_le(out, static_cast<std::int32_t>(flow.width()));
    detail::put_le(out, static_cast<std::int32_t>(flow.height()));
    for (const auto& v : flow.values()) {
        const float u = static_cast<float>(v.x);
        const float w = static_cast<float>(v.y);
        if (!std::isfinite(u) || !std::isfinite(w)) {
            throw Error(module_name::pipeline, ErrorKind::format, "cannot write non-finite flow to .flo");
        }
        detail::put_le(out, u);
        detail::put_le(out, w);
    }
    return out;
}

inline FlowFrame decode_flo(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) throw Error(module_name::pipeline, ErrorKind::format, ".flo header truncated");
    if (detail::get_le<float>(bytes.data()) != flo_magic) {
        throw Error(module_name::pipeline, ErrorKind::format, ".flo magic number mismatch");
    }
    const auto width = detail::get_le<std::int32_t>(bytes.data() + 4);
    const auto height = detail::get_le<std::int32_t>(bytes.data() + 8);
    if (width < 1 || height < 1 || width > (1 << 20) || height > (1 << 20)) {
        throw Error(module_name::pipeline, ErrorKind::format, ".flo has invalid dimensions");
    }
    const std::size_t needed = 12 + static_cast<std::size_t>(width) * height * 8;
    if (bytes.size() < needed) throw Error(module_name::pipeline, ErrorKind::format, ".flo data truncated");
    if (bytes.size() > needed) throw Error(module_name::pipeline, ErrorKind::format, ".flo has trailing bytes");
    FlowFrame flow(height, width);
    const std::uint8_t* p = bytes.data() + 12;
    for (auto& v : flow.values()) {
        const float u = detail::get_le<float>(p);
        const float w = detail::get_le<float>(p + 4);
        p += 8;
        if (!std::isfinite(u) || !std::isfinite(w)) {
            throw Error(module_name::pipeline, ErrorKind::format, ".flo contains non-finite values");
        }
        v = {u, w};
    }
    return flow;
}

inline void write_flo(const std::filesystem::path& path, const FlowFrame& flow) {
    const auto bytes = encode_flo(flow);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(module_name::pipeline, ErrorKind::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(module_name::pipeline, ErrorKind::io, "failed writing " + path.string());
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(module_name::pipeline, ErrorKind::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline FlowFrame read_flo(const std::filesystem::path& path) { return decode_flo(read_file_bytes(path)); }

}  // namespace motionfield::io
