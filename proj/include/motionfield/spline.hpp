#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "motionfield/grid.hpp"

namespace motionfield {

/// Natural cubic spline through 2-D control points, parameterized by
/// cumulative chord length. Consecutive duplicate points are dropped.
class CubicSpline2D {
public:
    explicit CubicSpline2D(std::span<const Vec2> points) {
        for (const auto& p : points) {
            if (knots_.empty() || (p - points_.back()).norm() > 0.0) {
                knots_.push_back(knots_.empty() ? 0.0 : knots_.back() + (p - points_.back()).norm());
                points_.push_back(p);
            }
        }
        second_x_ = second_derivatives(&Vec2::x);
        second_y_ = second_derivatives(&Vec2::y);
    }

    std::size_t segments() const noexcept { return points_.empty() ? 0 : points_.size() - 1; }
    double parameter_end() const noexcept { return knots_.empty() ? 0.0 : knots_.back(); }
    double knot(std::size_t i) const { return knots_[i]; }

    Vec2 eval(double t) const {
        if (points_.size() == 1) return points_.front();
        const std::size_t i = segment_of(t);
        const double h = knots_[i + 1] - knots_[i];
        const double a = (knots_[i + 1] - t) / h;
        const double b = (t - knots_[i]) / h;
        auto coord = [&](double Vec2::*c, const std::vector<double>& m) {
            return a * points_[i].*c + b * points_[i + 1].*c +
                   ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
        };
        return {coord(&Vec2::x, second_x_), coord(&Vec2::y, second_y_)};
    }

    Vec2 derivative(double t) const {
        if (points_.size() == 1) return {};
        const std::size_t i = segment_of(t);
        const double h = knots_[i + 1] - knots_[i];
        const double a = (knots_[i + 1] - t) / h;
        const double b = (t - knots_[i]) / h;
        auto coord = [&](double Vec2::*c, const std::vector<double>& m) {
            return (points_[i + 1].*c - points_[i].*c) / h +
                   (-(3.0 * a * a - 1.0) * m[i] + (3.0 * b * b - 1.0) * m[i + 1]) * h / 6.0;
        };
        return {coord(&Vec2::x, second_x_), coord(&Vec2::y, second_y_)};
    }

    /// Arc length of the curve between parameters t0 <= t1 inside one segment.
    /// Adaptive Gauss-Legendre: near-cusps make the speed sharply kinked.
    double arc_length(double t0, double t1) const { return adaptive_length(t0, t1, gauss_length(t0, t1), 0); }

private:
    double gauss_length(double t0, double t1) const {
        // 8-point Gauss-Legendre.
        static constexpr std::array<double, 4> nodes = {0.1834346424956498, 0.5255324099163290,
                                                        0.7966664774136267, 0.9602898564975363};
        static constexpr std::array<double, 4> weights = {0.3626837833783620, 0.3137066458778873,
                                                          0.2223810344533745, 0.1012285362903763};
        const double mid = 0.5 * (t0 + t1);
        const double half = 0.5 * (t1 - t0);
        double sum = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            sum += weights[k] * (derivative(mid - half * nodes[k]).norm() + derivative(mid + half * nodes[k]).norm());
        }
        return sum * half;
    }

    double adaptive_length(double t0, double t1, double whole, int depth) const {
        const double mid = 0.5 * (t0 + t1);
        const double left = gauss_length(t0, mid);
        const double right = gauss_length(mid, t1);
        if (depth >= 40 || std::abs(left + right - whole) <= 1e-14 * std::max(1.0, std::abs(whole))) return left + right;
        return adaptive_length(t0, mid, left, depth + 1) + adaptive_length(mid, t1, right, depth + 1);
    }

    std::size_t segment_of(double t) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
        return std::min(i, knots_.size() - 2);
    }

    std::vector<double> second_derivatives(double Vec2::*c) const {
        const std::size_t n = points_.size();
        std::vector<double> m(n, 0.0);
        if (n < 3) return m;
        // Tridiagonal system for interior second derivatives, natural ends (m0 = m_{n-1} = 0).
        std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = knots_[i] - knots_[i - 1];
            const double h1 = knots_[i + 1] - knots_[i];
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (points_[i + 1].*c - points_[i].*c) / h1 - (points_[i].*c - points_[i - 1].*c) / h0;
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double lower = (knots_[i] - knots_[i - 1]) / 6.0;
            const double w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
        }
        return m;
    }

    std::vector<Vec2> points_;
    std::vector<double> knots_;
    std::vector<double> second_x_;
    std::vector<double> second_y_;
};

/// Resamples a polyline of control points to `count` points equally spaced in
/// arc length along its natural cubic spline. Two control points resample
/// exactly along the segment.
inline std::vector<Vec2> resample_trajectory(std::span<const Vec2> control, int count) {
    if (control.size() < 2) {
        throw Error(module_name::hints, ErrorKind::parameter, "trajectory needs at least 2 points");
    }
    if (count < 2) {
        throw Error(module_name::hints, ErrorKind::parameter, "resampling needs at least 2 output points");
    }
    std::vector<Vec2> out(static_cast<std::size_t>(count));
    const double last = static_cast<double>(count - 1);

    if (control.size() == 2) {
        const Vec2 a = control[0];
        const Vec2 d = control[1] - control[0];
        for (int l = 0; l < count; ++l) out[static_cast<std::size_t>(l)] = a + (l / last) * d;
        out.back() = control[1];
        return out;
    }

    const CubicSpline2D spline(control);
    if (spline.segments() == 0) {
        std::fill(out.begin(), out.end(), control.front());
        return out;
    }

    // Cumulative arc length over a fine sub-partition of every segment.
    constexpr int kSub = 64;
    std::vector<double> params;
    std::vector<double> lengths;
    params.push_back(0.0);
    lengths.push_back(0.0);
    for (std::size_t s = 0; s < spline.segments(); ++s) {
        const double t0 = spline.knot(s);
        const double t1 = spline.knot(s + 1);
        for (int k = 1; k <= kSub; ++k) {
            const double a = params.back();
            const double b = k == kSub ? t1 : t0 + (t1 - t0) * k / kSub;
            lengths.push_back(lengths.back() + spline.arc_length(a, b));
            params.push_back(b);
        }
    }
    const double total = lengths.back();

    out.front() = spline.eval(0.0);
    for (int l = 1; l < count; ++l) {
        const double target = total * l / last;
        auto it = std::lower_bound(lengths.begin(), lengths.end(), target);
        std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - lengths.begin()));
        j = std::min(j, lengths.size() - 1);
        const double a = params[j - 1];
        const double b = params[j];
        const double need = target - lengths[j - 1];
        // Safeguarded Newton on the arc length from a.
        double lo = a, hi = b;
        double t = a + (b - a) * need / std::max(lengths[j] - lengths[j - 1], 1e-300);
        for (int it2 = 0; it2 < 50; ++it2) {
            const double f = spline.arc_length(a, t) - need;
            if (std::abs(f) < 1e-13 * std::max(1.0, total)) break;
            if (f > 0) hi = t; else lo = t;
            const double speed = spline.derivative(t).norm();
            double next = speed > 0 ? t - f / speed : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            t = next;
        }
        out[static_cast<std::size_t>(l)] = spline.eval(t);
    }
    out.back() = spline.eval(spline.parameter_end());
    return out;
}

}  // namespace motionfield
