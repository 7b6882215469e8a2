#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "motionfield/grid.hpp"
#include "motionfield/io/png.hpp"

namespace motionfield::io {

using Rgb = std::array<std::uint8_t, 3>;

namespace detail {

inline Rgb pixel_rgb(const ImageFrame& im, int y, int x) {
    if (im.channels() == 1) {
        const auto g = to_byte(im(y, x, 0));
        return {g, g, g};
    }
    return {to_byte(im(y, x, 0)), to_byte(im(y, x, 1)), to_byte(im(y, x, 2))};
}

struct ColorBox {
    std::vector<Rgb> colors;

    int widest_channel(int& range) const {
        std::array<int, 3> lo{255, 255, 255}, hi{0, 0, 0};
        for (const auto& c : colors) {
            for (int k = 0; k < 3; ++k) {
                lo[k] = std::min<int>(lo[k], c[k]);
                hi[k] = std::max<int>(hi[k], c[k]);
            }
        }
        int best = 0;
        range = -1;
        for (int k = 0; k < 3; ++k) {
            if (hi[k] - lo[k] > range) { range = hi[k] - lo[k]; best = k; }
        }
        return best;
    }

    Rgb mean() const {
        std::array<std::uint64_t, 3> s{};
        for (const auto& c : colors) {
            for (int k = 0; k < 3; ++k) s[k] += c[k];
        }
        const auto n = static_cast<std::uint64_t>(colors.size());
        return {static_cast<std::uint8_t>((s[0] + n / 2) / n), static_cast<std::uint8_t>((s[1] + n / 2) / n),
                static_cast<std::uint8_t>((s[2] + n / 2) / n)};
    }
};

}  // namespace detail

/// Median-cut palette of at most `max_colors` entries.
inline std::vector<Rgb> median_cut_palette(std::vector<Rgb> colors, std::size_t max_colors = 256) {
    std::vector<Rgb> palette;
    if (colors.empty()) return palette;
    std::vector<detail::ColorBox> boxes;
    boxes.push_back({std::move(colors)});
    while (boxes.size() < max_colors) {
        std::size_t pick = boxes.size();
        int best_range = 0;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            int range = 0;
            boxes[i].widest_channel(range);
            if (boxes[i].colors.size() > 1 && range > best_range) { best_range = range; pick = i; }
        }
        if (pick == boxes.size()) break;
        int range = 0;
        const int ch = boxes[pick].widest_channel(range);
        auto& cs = boxes[pick].colors;
        const auto mid = cs.begin() + static_cast<std::ptrdiff_t>(cs.size() / 2);
        std::nth_element(cs.begin(), mid, cs.end(), [ch](const Rgb& a, const Rgb& b) { return a[ch] < b[ch]; });
        detail::ColorBox upper{std::vector<Rgb>(mid, cs.end())};
        cs.erase(mid, cs.end());
        boxes.push_back(std::move(upper));
    }
    for (const auto& b : boxes) palette.push_back(b.mean());
    return palette;
}

namespace detail {

class BitWriter {
public:
    void write(unsigned code, int bits) {
        acc_ |= static_cast<std::uint32_t>(code) << nbits_;
        nbits_ += bits;
        while (nbits_ >= 8) {
            bytes_.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
            acc_ >>= 8;
            nbits_ -= 8;
        }
    }
    std::vector<std::uint8_t> finish() {
        if (nbits_ > 0) bytes_.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
        acc_ = 0;
        nbits_ = 0;
        return std::move(bytes_);
    }

private:
    std::uint32_t acc_ = 0;
    int nbits_ = 0;
    std::vector<std::uint8_t> bytes_;
};

inline std::vector<std::uint8_t> lzw_encode(std::span<const std::uint8_t> indices, int min_code_size) {
    const unsigned clear = 1u << min_code_size;
    const unsigned eoi = clear + 1;
    BitWriter out;
    std::unordered_map<std::uint32_t, unsigned> dict;
    unsigned next = eoi + 1;
    int width = min_code_size + 1;
    out.write(clear, width);
    if (indices.empty()) {
        out.write(eoi, width);
        return out.finish();
    }
    unsigned prefix = indices[0];
    for (std::size_t i = 1; i < indices.size(); ++i) {
        const std::uint8_t k = indices[i];
        const std::uint32_t key = (prefix << 8) | k;
        auto it = dict.find(key);
        if (it != dict.end()) {
            prefix = it->second;
            continue;
        }
        out.write(prefix, width);
        if (next < 4096) {
            dict.emplace(key, next);
            if (next == (1u << width) && width < 12) ++width;
            ++next;
        } else {
            out.write(clear, width);
            dict.clear();
            next = eoi + 1;
            width = min_code_size + 1;
        }
        prefix = k;
    }
    out.write(prefix, width);
    out.write(eoi, width);
    return out.finish();
}

inline void put_u16(std::vector<std::uint8_t>& b, unsigned v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xff));
    b.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

}  // namespace detail

/// Animated GIF (looping) with one shared 256-colour palette: exact when the
/// frames use at most 256 colours, median cut otherwise.
inline std::vector<std::uint8_t> encode_gif(std::span<const ImageFrame> frames, int delay_centiseconds = 10) {
    if (frames.empty()) throw Error(module_name::pipeline, ErrorKind::parameter, "GIF needs at least one frame");
    const int h = frames.front().height();
    const int w = frames.front().width();
    std::vector<Rgb> all;
    for (const auto& f : frames) {
        if (f.height() != h || f.width() != w) {
            throw Error(module_name::pipeline, ErrorKind::shape, "GIF frames differ in size");
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) all.push_back(detail::pixel_rgb(f, y, x));
        }
    }
    std::vector<Rgb> distinct = all;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto palette = distinct.size() <= 256 ? distinct : median_cut_palette(all, 256);
    palette.resize(256, Rgb{0, 0, 0});

    std::unordered_map<std::uint32_t, std::uint8_t> nearest;
    auto lookup = [&](const Rgb& c) {
        const std::uint32_t key = (c[0] << 16) | (c[1] << 8) | c[2];
        if (auto it = nearest.find(key); it != nearest.end()) return it->second;
        int best = 0;
        long best_d = -1;
        for (int i = 0; i < 256; ++i) {
            long d = 0;
            for (int k = 0; k < 3; ++k) {
                const long e = static_cast<long>(c[k]) - palette[static_cast<std::size_t>(i)][k];
                d += e * e;
            }
            if (best_d < 0 || d < best_d) { best_d = d; best = i; }
        }
        nearest.emplace(key, static_cast<std::uint8_t>(best));
        return static_cast<std::uint8_t>(best);
    };

    std::vector<std::uint8_t> b = {'G', 'I', 'F', '8', '9', 'a'};
    detail::put_u16(b, static_cast<unsigned>(w));
    detail::put_u16(b, static_cast<unsigned>(h));
    b.push_back(0xF7);  // global colour table, 8 bits per primary, 256 entries
    b.push_back(0);
    b.push_back(0);
    for (const auto& c : palette) b.insert(b.end(), c.begin(), c.end());
    // Netscape looping extension, loop forever.
    const std::uint8_t loop[] = {0x21, 0xFF, 0x0B, 'N', 'E', 'T', 'S', 'C', 'A', 'P', 'E', '2', '.', '0',
                                 0x03, 0x01, 0x00, 0x00, 0x00};
    b.insert(b.end(), std::begin(loop), std::end(loop));

    std::vector<std::uint8_t> indices(static_cast<std::size_t>(h) * w);
    std::size_t offset = 0;
    for (const auto& f : frames) {
        (void)f;
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = lookup(all[offset + i]);
        offset += indices.size();

        b.insert(b.end(), {0x21, 0xF9, 0x04, 0x04});
        detail::put_u16(b, static_cast<unsigned>(delay_centiseconds));
        b.insert(b.end(), {0x00, 0x00});
        b.push_back(0x2C);
        detail::put_u16(b, 0);
        detail::put_u16(b, 0);
        detail::put_u16(b, static_cast<unsigned>(w));
        detail::put_u16(b, static_cast<unsigned>(h));
        b.push_back(0);
        b.push_back(8);
        const auto data = detail::lzw_encode(indices, 8);
        for (std::size_t i = 0; i < data.size(); i += 255) {
            const std::size_t n = std::min<std::size_t>(255, data.size() - i);
            b.push_back(static_cast<std::uint8_t>(n));
            b.insert(b.end(), data.begin() + static_cast<std::ptrdiff_t>(i),
                     data.begin() + static_cast<std::ptrdiff_t>(i + n));
        }
        b.push_back(0);
    }
    b.push_back(0x3B);
    return b;
}

inline void write_gif(const std::filesystem::path& path, std::span<const ImageFrame> frames, int delay_centiseconds = 10) {
    write_bytes(path, encode_gif(frames, delay_centiseconds));
}

}  // namespace motionfield::io
