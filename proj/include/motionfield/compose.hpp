#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "motionfield/grid.hpp"
#include "motionfield/hints.hpp"
#include "motionfield/warp.hpp"

namespace motionfield {

struct BrushGroup {
    std::vector<Trajectory> inside;
    std::vector<Trajectory> outside;
};

/// True when the rounded pixel of `p` lies inside the mask and is on.
inline bool covers(const RegionMask& mask, Vec2 p) {
    const double x = std::round(p.x);
    const double y = std::round(p.y);
    if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height()) return false;
    return mask(static_cast<int>(y), static_cast<int>(x));
}

inline bool starts_in(const Trajectory& t, const RegionMask& mask) {
    return !t.points.empty() && covers(mask, t.points.front());
}

inline BrushGroup split_trajectories(std::span<const Trajectory> trajectories, const RegionMask& mask) {
    BrushGroup g;
    for (const auto& t : trajectories) (starts_in(t, mask) ? g.inside : g.outside).push_back(t);
    return g;
}

/// flow_in where the mask is on, flow_out elsewhere, in every frame.
inline FlowField brush_compose(const FlowField& flow_in, const FlowField& flow_out, const RegionMask& mask) {
    if (!flow_in.same_shape(flow_out) || mask.height() != flow_in.height() || mask.width() != flow_in.width()) {
        throw Error(module_name::compose, ErrorKind::shape, "brush_compose inputs differ in shape");
    }
    FlowField out = flow_out;
    for (int f = 0; f < out.frame_count(); ++f) {
        for (int y = 0; y < out.height(); ++y) {
            for (int x = 0; x < out.width(); ++x) {
                if (mask(y, x)) out.frame(f)(y, x) = flow_in.frame(f)(y, x);
            }
        }
    }
    return out;
}

/// Mask at pyramid level `level`: mean over each 2^level block, on when the
/// mean is >= 0.5.
inline RegionMask downsample_mask(const RegionMask& mask, int level) {
    if (level < 0) throw Error(module_name::compose, ErrorKind::parameter, "level must be >= 0");
    if (level == 0) return mask;
    const int factor = 1 << level;
    if (mask.height() % factor != 0 || mask.width() % factor != 0) {
        throw Error(module_name::compose, ErrorKind::shape, "mask size is not a multiple of 2^level");
    }
    RegionMask out(mask.height() / factor, mask.width() / factor);
    const int area = factor * factor;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            int on = 0;
            for (int dy = 0; dy < factor; ++dy) {
                for (int dx = 0; dx < factor; ++dx) on += mask(y * factor + dy, x * factor + dx);
            }
            // on / area >= 0.5 without rounding
            out.set(y, x, 2 * on >= area);
        }
    }
    return out;
}

struct AdapterInput {
    FeaturePyramid pyramid;
    RegionMask mask;  ///< level-0 control area
};

/// Mask-aware fusion of several adapters' feature pyramids. `adapters` is in
/// priority order: a pixel takes the features of the first adapter whose
/// (downsampled) mask covers it; uncovered pixels take the last adapter,
/// which acts as the background.
inline FeaturePyramid fuse_adapters(std::span<const AdapterInput> adapters) {
    if (adapters.empty()) throw Error(module_name::compose, ErrorKind::parameter, "no adapters to fuse");
    const FeaturePyramid& first = adapters.front().pyramid;
    for (const auto& a : adapters) {
        if (a.pyramid.level_count() != first.level_count()) {
            throw Error(module_name::compose, ErrorKind::shape, "adapter pyramids differ in level count");
        }
        for (int s = 0; s < first.level_count(); ++s) {
            if (!a.pyramid.level(s).same_shape(first.level(s))) {
                throw Error(module_name::compose, ErrorKind::shape, "adapter pyramids differ in shape");
            }
        }
        if (first.level_count() > 0 &&
            (a.mask.height() != first.level(0).height() || a.mask.width() != first.level(0).width())) {
            throw Error(module_name::compose, ErrorKind::shape, "adapter mask is not at level-0 resolution");
        }
    }

    FeaturePyramid out;
    const std::size_t background = adapters.size() - 1;
    for (int s = 0; s < first.level_count(); ++s) {
        std::vector<RegionMask> masks;
        masks.reserve(adapters.size());
        for (const auto& a : adapters) masks.push_back(downsample_mask(a.mask, s));
        FeatureGrid fused(first.level(s).height(), first.level(s).width(), first.level(s).channels());
        for (int y = 0; y < fused.height(); ++y) {
            for (int x = 0; x < fused.width(); ++x) {
                std::size_t pick = background;
                for (std::size_t k = 0; k < adapters.size(); ++k) {
                    if (masks[k](y, x)) { pick = k; break; }
                }
                const auto src = adapters[pick].pyramid.level(s).pixel(y, x);
                std::copy(src.begin(), src.end(), fused.pixel(y, x).begin());
            }
        }
        out.levels.push_back(std::move(fused));
    }
    return out;
}

}  // namespace motionfield
