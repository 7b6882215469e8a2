#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "motionfield/error.hpp"

namespace motionfield {

struct FrameWindow {
    int start = 0;
    int length = 0;

    int end() const noexcept { return start + length; }  // exclusive
    bool contains(int f) const noexcept { return f >= start && f < end(); }
    friend bool operator==(FrameWindow, FrameWindow) = default;
};

/// Overlapping fixed-length frame windows covering a long sequence.
struct GroupSchedule {
    int total_frames = 0;
    int window = 14;
    int stride = 7;
    std::vector<FrameWindow> groups;

    /// Number of groups that contain frame f.
    int multiplicity(int f) const {
        int n = 0;
        for (const auto& g : groups) n += g.contains(f);
        return n;
    }
};

/// Windows start at 0, stride, 2*stride, ...; a window that would run past
/// the end is replaced by one anchored at the last frame.
inline GroupSchedule build_schedule(int total_frames, int window = 14, int stride = 7) {
    if (window < 1 || stride < 1 || stride > window) {
        throw Error(module_name::scheduler, ErrorKind::parameter, "need window >= 1 and 1 <= stride <= window");
    }
    if (total_frames < window) {
        throw Error(module_name::scheduler, ErrorKind::parameter,
                    "sequence of " + std::to_string(total_frames) + " frames is shorter than the window " +
                        std::to_string(window));
    }
    GroupSchedule s{total_frames, window, stride, {}};
    for (int start = 0;; start += stride) {
        if (start + window >= total_frames) {
            s.groups.push_back({total_frames - window, window});
            break;
        }
        s.groups.push_back({start, window});
    }
    return s;
}

/// weights[f][g] = 1 / multiplicity(f) if group g contains frame f, else 0.
inline std::vector<std::vector<double>> frame_weights(const GroupSchedule& schedule) {
    std::vector<std::vector<double>> w(static_cast<std::size_t>(schedule.total_frames),
                                       std::vector<double>(schedule.groups.size(), 0.0));
    for (int f = 0; f < schedule.total_frames; ++f) {
        const int m = schedule.multiplicity(f);
        for (std::size_t g = 0; g < schedule.groups.size(); ++g) {
            if (schedule.groups[g].contains(f)) w[static_cast<std::size_t>(f)][g] = 1.0 / m;
        }
    }
    return w;
}

/// One latent vector per frame.
using Latents = std::vector<std::vector<double>>;

/// (latent window, step, condition) -> predicted noise for that window.
using Denoiser = std::function<Latents(const Latents& window, int step, const std::vector<double>& condition)>;

/// (latents, blended prediction, step) -> latents after one diffusion update.
using UpdateRule = std::function<Latents(const Latents& latents, const Latents& prediction, int step)>;

/// Runs the denoiser on every group and averages, per frame, the predictions
/// of all groups containing that frame. `order` permutes group evaluation
/// (identity when empty).
inline Latents blend_predictions(const GroupSchedule& schedule, const Latents& latents, int step,
                                 const Denoiser& denoiser, const std::vector<double>& condition,
                                 std::span<const std::size_t> order = {}) {
    if (static_cast<int>(latents.size()) != schedule.total_frames) {
        throw Error(module_name::scheduler, ErrorKind::shape,
                    "latents have " + std::to_string(latents.size()) + " frames, schedule expects " +
                        std::to_string(schedule.total_frames));
    }
    std::vector<std::size_t> sequence(schedule.groups.size());
    if (order.empty()) {
        std::iota(sequence.begin(), sequence.end(), std::size_t{0});
    } else {
        if (order.size() != sequence.size()) {
            throw Error(module_name::scheduler, ErrorKind::parameter, "group order has the wrong length");
        }
        sequence.assign(order.begin(), order.end());
    }

    Latents sum(latents.size());
    std::vector<int> hits(latents.size(), 0);
    for (std::size_t g : sequence) {
        const FrameWindow win = schedule.groups.at(g);
        const Latents slice(latents.begin() + win.start, latents.begin() + win.end());
        const Latents pred = denoiser(slice, step, condition);
        if (pred.size() != slice.size()) {
            throw Error(module_name::scheduler, ErrorKind::contract, "denoiser changed the window length");
        }
        for (int k = 0; k < win.length; ++k) {
            const auto f = static_cast<std::size_t>(win.start + k);
            const auto& p = pred[static_cast<std::size_t>(k)];
            if (p.size() != latents[f].size()) {
                throw Error(module_name::scheduler, ErrorKind::contract, "denoiser changed the latent size");
            }
            if (hits[f]++ == 0) {
                sum[f] = p;
            } else {
                for (std::size_t i = 0; i < p.size(); ++i) sum[f][i] += p[i];
            }
        }
    }
    for (std::size_t f = 0; f < sum.size(); ++f) {
        if (hits[f] > 1) {
            for (double& v : sum[f]) v /= hits[f];
        }
    }
    return sum;
}

/// One periodic-sampling diffusion step: blended prediction, then `update`.
inline Latents blend_step(const GroupSchedule& schedule, const Latents& latents, int step, const Denoiser& denoiser,
                          const std::vector<double>& condition, const UpdateRule& update) {
    return update(latents, blend_predictions(schedule, latents, step, denoiser, condition), step);
}

/// Deterministic DDPM-style sampler (posterior mean, no injected noise) with
/// a linear beta schedule. Meant for exercising the scheduler, not for
/// image quality.
class ToyDdpm {
public:
    explicit ToyDdpm(int steps, double beta_start = 1e-4, double beta_end = 0.02) {
        if (steps < 1) throw Error(module_name::scheduler, ErrorKind::parameter, "need >= 1 diffusion step");
        double cumulative = 1.0;
        for (int t = 0; t < steps; ++t) {
            const double beta = steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * t / (steps - 1);
            cumulative *= 1.0 - beta;
            betas_.push_back(beta);
            alpha_bars_.push_back(cumulative);
        }
    }

    int steps() const noexcept { return static_cast<int>(betas_.size()); }

    Latents update(const Latents& x, const Latents& eps, int t) const {
        const double beta = betas_.at(static_cast<std::size_t>(t));
        const double a = 1.0 / std::sqrt(1.0 - beta);
        const double c = beta / std::sqrt(1.0 - alpha_bars_[static_cast<std::size_t>(t)]);
        Latents out = x;
        for (std::size_t f = 0; f < x.size(); ++f) {
            for (std::size_t i = 0; i < x[f].size(); ++i) out[f][i] = a * (x[f][i] - c * eps[f][i]);
        }
        return out;
    }

    UpdateRule rule() const {
        return [this](const Latents& x, const Latents& eps, int t) { return update(x, eps, t); };
    }

    /// Full reverse process from `initial` (t = steps-1 down to 0). The
    /// condition handed to every group is the clean frame-0 latent.
    Latents sample(const GroupSchedule& schedule, Latents initial, const Denoiser& denoiser,
                   const std::vector<double>& condition) const {
        for (int t = steps() - 1; t >= 0; --t) {
            initial = blend_step(schedule, initial, t, denoiser, condition, rule());
        }
        return initial;
    }

private:
    std::vector<double> betas_;
    std::vector<double> alpha_bars_;
};

}  // namespace motionfield
