#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "motionfield/grid.hpp"

namespace motionfield {

enum class WarpMode { average, softmax };

struct WarpOptions {
    WarpMode mode = WarpMode::average;
    double temperature = 10.0;       ///< softmax mode: weights scale by exp(-|flow| / temperature)
    double coverage_epsilon = 1e-4;  ///< below this accumulated weight a target counts as a hole
};

struct WarpResult {
    FeatureGrid warped;
    Grid<double> coverage;

    int hole_count(double epsilon = WarpOptions{}.coverage_epsilon) const {
        int n = 0;
        for (double c : coverage.values()) n += c < epsilon;
        return n;
    }
};

/// Forward warp (splatting). Every source pixel pushes its feature vector to
/// the four integer neighbours of source + flow with bilinear weights; each
/// target is the weight-normalized sum of what it received. Targets whose
/// accumulated bilinear weight stays below the coverage epsilon keep the
/// unwarped source value.
inline WarpResult forward_warp(const FeatureGrid& grid, const FlowFrame& flow, const WarpOptions& options = {}) {
    const int h = grid.height();
    const int w = grid.width();
    const int ch = grid.channels();
    if (flow.height() != h || flow.width() != w) {
        throw Error(module_name::warp, ErrorKind::shape, "flow and grid sizes differ");
    }
    // Softmax weights are taken relative to the smallest motion in the frame;
    // the common factor cancels in the normalization.
    double min_norm = std::numeric_limits<double>::infinity();
    for (const auto& f : flow.values()) {
        if (!f.finite()) throw Error(module_name::warp, ErrorKind::input, "non-finite value in flow");
        min_norm = std::min(min_norm, f.norm());
    }

    FeatureGrid numer(h, w, ch, 0.0);
    Grid<double> weight_sum(h, w, 0.0);
    Grid<double> coverage(h, w, 0.0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2 f = flow(y, x);
            const double tx = x + f.x;
            const double ty = y + f.y;
            const double fx0 = std::floor(tx);
            const double fy0 = std::floor(ty);
            const double ax = tx - fx0;
            const double ay = ty - fy0;
            const double scale = options.mode == WarpMode::softmax ? std::exp(-(f.norm() - min_norm) / options.temperature) : 1.0;
            const auto src = grid.pixel(y, x);
            const double corner_w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
            for (int k = 0; k < 4; ++k) {
                const double bw = corner_w[k];
                if (bw <= 0.0) continue;
                const double cx = fx0 + (k & 1);
                const double cy = fy0 + (k >> 1);
                if (cx < 0 || cy < 0 || cx >= w || cy >= h) continue;
                const int ix = static_cast<int>(cx);
                const int iy = static_cast<int>(cy);
                const double sw = bw * scale;
                coverage(iy, ix) += bw;
                weight_sum(iy, ix) += sw;
                auto dst = numer.pixel(iy, ix);
                for (int c = 0; c < ch; ++c) dst[static_cast<std::size_t>(c)] += sw * src[static_cast<std::size_t>(c)];
            }
        }
    }

    WarpResult out{FeatureGrid(h, w, ch), std::move(coverage)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto dst = out.warped.pixel(y, x);
            const double ws = weight_sum(y, x);
            if (out.coverage(y, x) >= options.coverage_epsilon && ws > 0.0) {
                const auto num = numer.pixel(y, x);
                for (int c = 0; c < ch; ++c) dst[static_cast<std::size_t>(c)] = num[static_cast<std::size_t>(c)] / ws;
            } else {
                const auto src = grid.pixel(y, x);
                std::copy(src.begin(), src.end(), dst.begin());
            }
        }
    }
    return out;
}

/// Multi-scale feature stack; level s is 2^s times smaller than level 0.
struct FeaturePyramid {
    std::vector<FeatureGrid> levels;

    int level_count() const noexcept { return static_cast<int>(levels.size()); }
    const FeatureGrid& level(int s) const { return levels.at(static_cast<std::size_t>(s)); }
    friend bool operator==(const FeaturePyramid&, const FeaturePyramid&) = default;
};

/// 2x area-averaging downsample. Dimensions must be even.
inline FeatureGrid downsample_area(const FeatureGrid& g) {
    if (g.height() % 2 != 0 || g.width() % 2 != 0) {
        throw Error(module_name::warp, ErrorKind::shape, "area downsampling needs even dimensions");
    }
    FeatureGrid out(g.height() / 2, g.width() / 2, g.channels());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < g.channels(); ++c) {
                out(y, x, c) = 0.25 * (g(2 * y, 2 * x, c) + g(2 * y, 2 * x + 1, c) +
                                       g(2 * y + 1, 2 * x, c) + g(2 * y + 1, 2 * x + 1, c));
            }
        }
    }
    return out;
}

/// Training-free stand-in for a learned reference encoder: level 0 is the
/// input, each further level halves it by area averaging. The input must be a
/// multiple of 2^(levels-1) in both dimensions; see reflect_pad.
inline FeaturePyramid build_pyramid(const FeatureGrid& image, int levels) {
    if (levels < 1) throw Error(module_name::warp, ErrorKind::parameter, "pyramid needs >= 1 level");
    const long long factor = 1LL << (levels - 1);
    if (levels > 30 || image.height() < factor || image.width() < factor) {
        throw Error(module_name::warp, ErrorKind::parameter, "image too small for the requested pyramid levels");
    }
    if (image.height() % factor != 0 || image.width() % factor != 0) {
        throw Error(module_name::warp, ErrorKind::parameter,
                    "image size must be a multiple of 2^(levels-1); reflect-pad it first");
    }
    FeaturePyramid pyr;
    pyr.levels.push_back(image);
    for (int s = 1; s < levels; ++s) pyr.levels.push_back(downsample_area(pyr.levels.back()));
    return pyr;
}

/// Reflect-pads bottom and right so both dimensions become multiples of `multiple`.
inline FeatureGrid reflect_pad(const FeatureGrid& g, int multiple) {
    if (multiple < 1) throw Error(module_name::warp, ErrorKind::parameter, "pad multiple must be >= 1");
    const int h = (g.height() + multiple - 1) / multiple * multiple;
    const int w = (g.width() + multiple - 1) / multiple * multiple;
    if (h == g.height() && w == g.width()) return g;
    auto reflect = [](int i, int n) {
        if (n == 1) return 0;
        const int period = 2 * (n - 1);
        i %= period;
        return i < n ? i : period - i;
    };
    FeatureGrid out(h, w, g.channels());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto src = g.pixel(reflect(y, g.height()), reflect(x, g.width()));
            std::copy(src.begin(), src.end(), out.pixel(y, x).begin());
        }
    }
    return out;
}

inline FeatureGrid crop(const FeatureGrid& g, int height, int width) {
    if (height > g.height() || width > g.width()) {
        throw Error(module_name::warp, ErrorKind::shape, "crop larger than grid");
    }
    FeatureGrid out(height, width, g.channels());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto src = g.pixel(y, x);
            std::copy(src.begin(), src.end(), out.pixel(y, x).begin());
        }
    }
    return out;
}

/// Flow at pyramid level `level`: area-downsampled by 2^level with vectors
/// divided by 2^level.
inline FlowFrame scale_flow(const FlowFrame& flow, int level) {
    if (level < 0) throw Error(module_name::warp, ErrorKind::parameter, "level must be >= 0");
    if (level == 0) return flow;
    const int factor = 1 << level;
    if (flow.height() % factor != 0 || flow.width() % factor != 0) {
        throw Error(module_name::warp, ErrorKind::shape, "flow size is not a multiple of 2^level");
    }
    FlowFrame out(flow.height() / factor, flow.width() / factor);
    const double norm = 1.0 / (static_cast<double>(factor) * factor * factor);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            Vec2 acc;
            for (int dy = 0; dy < factor; ++dy) {
                for (int dx = 0; dx < factor; ++dx) acc += flow(y * factor + dy, x * factor + dx);
            }
            out(y, x) = norm * acc;
        }
    }
    return out;
}

inline FlowField scale_flow(const FlowField& flow, int level) {
    std::vector<FlowFrame> frames;
    frames.reserve(flow.frames().size());
    for (const auto& f : flow.frames()) frames.push_back(scale_flow(f, level));
    return FlowField(std::move(frames));
}

/// Warps every level by the level-0 flow scaled to that level.
inline FeaturePyramid warp_pyramid(const FeaturePyramid& pyr, const FlowFrame& flow, const WarpOptions& options = {}) {
    if (pyr.levels.empty()) throw Error(module_name::warp, ErrorKind::parameter, "empty pyramid");
    if (flow.height() != pyr.levels.front().height() || flow.width() != pyr.levels.front().width()) {
        throw Error(module_name::warp, ErrorKind::shape, "flow must be at level-0 resolution");
    }
    FeaturePyramid out;
    for (int s = 0; s < pyr.level_count(); ++s) {
        out.levels.push_back(forward_warp(pyr.level(s), scale_flow(flow, s), options).warped);
    }
    return out;
}

}  // namespace motionfield
