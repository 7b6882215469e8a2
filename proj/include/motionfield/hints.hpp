#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "motionfield/grid.hpp"
#include "motionfield/spline.hpp"

namespace motionfield {

/// Sparse motion vectors plus the binary hint mask. Vectors are zero off-mask.
struct SparseHints {
    FlowField vectors;
    BinaryMask mask;
    int collisions = 0;  ///< hint pixels overwritten by a later trajectory or landmark
    int clamped = 0;     ///< start pixels moved inside the image bounds

    int hint_count() const { return mask.count(); }
    int frame_count() const { return vectors.frame_count(); }
    int height() const { return vectors.height(); }
    int width() const { return vectors.width(); }
};

struct Trajectory {
    std::vector<Vec2> points;
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// L frames of K landmarks each; frame 0 is the reference set.
class LandmarkSequence {
public:
    LandmarkSequence() = default;
    explicit LandmarkSequence(std::vector<std::vector<Vec2>> frames) : frames_(std::move(frames)) {
        for (const auto& f : frames_) {
            if (f.size() != frames_.front().size()) {
                throw Error(module_name::hints, ErrorKind::input, "landmark frames must all have the same point count");
            }
        }
    }

    int frame_count() const noexcept { return static_cast<int>(frames_.size()); }
    int points_per_frame() const noexcept { return frames_.empty() ? 0 : static_cast<int>(frames_.front().size()); }
    const std::vector<Vec2>& frame(int l) const { return frames_.at(static_cast<std::size_t>(l)); }
    const std::vector<std::vector<Vec2>>& frames() const noexcept { return frames_; }

    friend bool operator==(const LandmarkSequence&, const LandmarkSequence&) = default;

private:
    std::vector<std::vector<Vec2>> frames_;
};

namespace detail {

inline Pixel hint_pixel(Vec2 p, int height, int width, int& clamped) {
    const double rx = std::round(p.x);
    const double ry = std::round(p.y);
    const int x = static_cast<int>(std::clamp(rx, 0.0, static_cast<double>(width - 1)));
    const int y = static_cast<int>(std::clamp(ry, 0.0, static_cast<double>(height - 1)));
    if (x != rx || y != ry) ++clamped;
    return {x, y};
}

// Writes one anchored track (positions per frame, index 0 = anchor) into hints.
inline void write_track(SparseHints& hints, Pixel at, std::span<const Vec2> track) {
    if (hints.mask(at.y, at.x)) ++hints.collisions;
    hints.mask.set(at.y, at.x, true);
    for (std::size_t l = 1; l < track.size(); ++l) {
        hints.vectors.frame(static_cast<int>(l) - 1)(at.y, at.x) = track[l] - track[0];
    }
}

}  // namespace detail

/// Keeps the flow where the mask is on and zeroes it elsewhere, same mask for every frame.
inline SparseHints sparse_from_flow(const FlowField& flow, const BinaryMask& mask) {
    if (flow.height() != mask.height() || flow.width() != mask.width()) {
        throw Error(module_name::hints, ErrorKind::shape, "mask dimensions do not match the flow grid");
    }
    SparseHints out{FlowField(flow.frame_count(), flow.height(), flow.width()), mask};
    for (int f = 0; f < flow.frame_count(); ++f) {
        for (int y = 0; y < flow.height(); ++y) {
            for (int x = 0; x < flow.width(); ++x) {
                if (mask(y, x)) out.vectors.frame(f)(y, x) = flow.frame(f)(y, x);
            }
        }
    }
    return out;
}

/// Minimum spacing used by the greedy hint sampler.
inline double watershed_radius(int height, int width, int n) {
    return std::floor(std::sqrt(static_cast<double>(height) * width / n)) / 2.0;
}

/// Picks exactly n hint locations spread over the moving regions of the last
/// flow frame: greedy non-maximum suppression in descending magnitude order
/// (ties broken row-major) with a minimum separation radius. If the radius
/// admits fewer than n points it is halved until n are found.
inline BinaryMask sample_watershed(const FlowField& flow, int n) {
    const int h = flow.height();
    const int w = flow.width();
    if (n < 1 || n > h * w) {
        throw Error(module_name::hints, ErrorKind::parameter,
                    "hint count must be in [1, H*W], got " + std::to_string(n));
    }
    const FlowFrame& last = flow.frame(flow.frame_count() - 1);
    std::vector<int> order(static_cast<std::size_t>(h * w));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return last[static_cast<std::size_t>(a)].norm() > last[static_cast<std::size_t>(b)].norm();
    });

    double radius = watershed_radius(h, w, n);
    std::vector<Pixel> picked;
    for (;;) {
        picked.clear();
        const double r2 = radius * radius;
        for (int idx : order) {
            const Pixel p{idx % w, idx / w};
            bool ok = std::all_of(picked.begin(), picked.end(), [&](Pixel q) {
                const double dx = p.x - q.x;
                const double dy = p.y - q.y;
                return dx * dx + dy * dy >= r2;
            });
            if (ok) {
                picked.push_back(p);
                if (static_cast<int>(picked.size()) == n) break;
            }
        }
        if (static_cast<int>(picked.size()) == n) break;
        radius = radius < 0.5 ? 0.0 : radius / 2.0;
    }

    BinaryMask mask(h, w);
    for (Pixel p : picked) mask.set(p.y, p.x, true);
    return mask;
}

/// Hints from drawn trajectories. Each trajectory is resampled to `frames`
/// points; the displacement from its start is written at the rounded start
/// pixel for every later frame. Later trajectories overwrite earlier ones.
inline SparseHints sparse_from_trajectories(std::span<const Trajectory> trajectories, int frames, int height, int width) {
    if (trajectories.empty()) {
        throw Error(module_name::hints, ErrorKind::parameter, "no trajectories given");
    }
    if (frames < 2) {
        throw Error(module_name::hints, ErrorKind::parameter, "need L >= 2 frames");
    }
    SparseHints out{FlowField(frames - 1, height, width), BinaryMask(height, width)};
    for (const auto& traj : trajectories) {
        if (traj.points.size() < 2) {
            throw Error(module_name::hints, ErrorKind::parameter, "trajectory needs at least 2 points");
        }
        for (const auto& p : traj.points) {
            if (!p.finite()) throw Error(module_name::hints, ErrorKind::input, "non-finite trajectory point");
        }
        const auto track = resample_trajectory(traj.points, frames);
        const Pixel at = detail::hint_pixel(track.front(), height, width, out.clamped);
        detail::write_track(out, at, track);
    }
    return out;
}

/// Point-wise hints from a landmark sequence: P[l, k] - P[0, k] at the
/// rounded reference position of landmark k, for l = 1..L-1.
inline SparseHints sparse_from_landmarks(const LandmarkSequence& seq, int height, int width) {
    const int frames = seq.frame_count();
    const int k_count = seq.points_per_frame();
    if (frames < 2 || k_count < 1) {
        throw Error(module_name::hints, ErrorKind::parameter, "landmarks need L >= 2 frames and K >= 1 points");
    }
    SparseHints out{FlowField(frames - 1, height, width), BinaryMask(height, width)};
    std::vector<Vec2> track(static_cast<std::size_t>(frames));
    for (int k = 0; k < k_count; ++k) {
        for (int l = 0; l < frames; ++l) {
            track[static_cast<std::size_t>(l)] = seq.frame(l)[static_cast<std::size_t>(k)];
            if (!track[static_cast<std::size_t>(l)].finite()) {
                throw Error(module_name::hints, ErrorKind::input, "non-finite landmark coordinate");
            }
        }
        const Pixel at = detail::hint_pixel(track.front(), height, width, out.clamped);
        detail::write_track(out, at, track);
    }
    return out;
}

/// Copies every hint of `top` into `base`; hints of `top` win on shared pixels.
inline void overlay_hints(SparseHints& base, const SparseHints& top) {
    if (!base.vectors.same_shape(top.vectors)) {
        throw Error(module_name::hints, ErrorKind::shape, "cannot overlay hints of different shape");
    }
    for (int y = 0; y < base.height(); ++y) {
        for (int x = 0; x < base.width(); ++x) {
            if (!top.mask(y, x)) continue;
            if (base.mask(y, x)) ++base.collisions;
            base.mask.set(y, x, true);
            for (int f = 0; f < base.frame_count(); ++f) base.vectors.frame(f)(y, x) = top.vectors.frame(f)(y, x);
        }
    }
    base.collisions += top.collisions;
    base.clamped += top.clamped;
}

enum class CameraKind { pan, zoom, rotate };

inline std::string_view to_string(CameraKind k) {
    switch (k) {
        case CameraKind::pan: return "pan";
        case CameraKind::zoom: return "zoom";
        case CameraKind::rotate: return "rotate";
    }
    return "?";
}

inline CameraKind parse_camera_kind(std::string_view s) {
    if (s == "pan") return CameraKind::pan;
    if (s == "zoom") return CameraKind::zoom;
    if (s == "rotate") return CameraKind::rotate;
    throw Error(module_name::hints, ErrorKind::parameter, "unknown camera pattern '" + std::string(s) + "'");
}

/// Parameters of a fixed camera flow pattern. `dx`/`dy` are the total pan,
/// `scale` the final zoom factor, `degrees` the total rotation (positive turns
/// clockwise on screen because y points down). The centre defaults to the
/// image centre ((W-1)/2, (H-1)/2).
struct CameraParams {
    CameraKind kind = CameraKind::pan;
    double dx = 0.0;
    double dy = 0.0;
    double scale = 1.0;
    double degrees = 0.0;
    std::optional<Vec2> center;

    friend bool operator==(const CameraParams&, const CameraParams&) = default;
};

/// Dense camera flow for L frames (L - 1 flow frames). Progress through the
/// sequence is (l + 1) / (L - 1): linear for pan and rotation angle,
/// geometric for the zoom factor.
inline FlowField camera_pattern(const CameraParams& params, int frames, int height, int width) {
    if (frames < 2) throw Error(module_name::hints, ErrorKind::parameter, "need L >= 2 frames");
    if (params.kind == CameraKind::zoom && !(params.scale > 0.0 && std::isfinite(params.scale))) {
        throw Error(module_name::hints, ErrorKind::parameter, "zoom scale must be > 0");
    }
    if (!std::isfinite(params.degrees) || !std::isfinite(params.dx) || !std::isfinite(params.dy)) {
        throw Error(module_name::hints, ErrorKind::parameter, "camera parameters must be finite");
    }
    const Vec2 c = params.center.value_or(Vec2{(width - 1) / 2.0, (height - 1) / 2.0});
    FlowField flow(frames - 1, height, width);
    for (int l = 0; l < frames - 1; ++l) {
        const double progress = static_cast<double>(l + 1) / (frames - 1);
        FlowFrame& f = flow.frame(l);
        switch (params.kind) {
            case CameraKind::pan: {
                const Vec2 d{progress * params.dx, progress * params.dy};
                for (auto& v : f.values()) v = d;
                break;
            }
            case CameraKind::zoom: {
                const double s = std::pow(params.scale, progress) - 1.0;
                for (int y = 0; y < height; ++y) {
                    for (int x = 0; x < width; ++x) f(y, x) = s * (Vec2{double(x), double(y)} - c);
                }
                break;
            }
            case CameraKind::rotate: {
                const double theta = progress * params.degrees * std::numbers::pi / 180.0;
                const double cs = std::cos(theta);
                const double sn = std::sin(theta);
                for (int y = 0; y < height; ++y) {
                    for (int x = 0; x < width; ++x) {
                        const Vec2 r = Vec2{double(x), double(y)} - c;
                        f(y, x) = Vec2{cs * r.x - sn * r.y, sn * r.x + cs * r.y} - r;
                    }
                }
                break;
            }
        }
    }
    return flow;
}

}  // namespace motionfield
