#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "motionfield/grid.hpp"
#include "motionfield/hints.hpp"

namespace motionfield {

enum class DensifySolver { conjugate_gradient, direct };

struct DensifyConfig {
    DensifySolver solver = DensifySolver::conjugate_gradient;
    int max_iterations = 0;            ///< 0 selects 10 * H * W
    double residual_tolerance = 1e-8;  ///< relative to the right-hand side norm
    double lambda = 0.0;               ///< 0 = hard hint constraints, > 0 = screened fit
    bool strict = false;               ///< reject frames without any hint

    void validate() const {
        if (!(residual_tolerance > 0.0)) {
            throw Error(module_name::densify, ErrorKind::parameter, "residual_tolerance must be > 0");
        }
        if (max_iterations < 0) {
            throw Error(module_name::densify, ErrorKind::parameter, "max_iterations must be >= 1 (or 0 for the default)");
        }
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw Error(module_name::densify, ErrorKind::parameter, "lambda must be finite and >= 0");
        }
    }

    friend bool operator==(const DensifyConfig&, const DensifyConfig&) = default;
};

struct DensifyReport {
    double max_residual = 0.0;  ///< worst relative residual over frames and channels
    int max_iterations = 0;     ///< worst CG iteration count
};

namespace detail {

// Quadratic form of one channel: minimize sum over 4-neighbour edges of
// (u_p - u_q)^2 + lambda * sum over hints (u_p - h_p)^2. With lambda = 0 the
// hint pixels are fixed and only the remaining pixels are unknown.
class DirichletSystem {
public:
    DirichletSystem(const BinaryMask& mask, double lambda) : h_(mask.height()), w_(mask.width()), lambda_(lambda) {
        const int n = h_ * w_;
        fixed_.assign(static_cast<std::size_t>(n), false);
        diag_.assign(static_cast<std::size_t>(n), 0.0);
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                const auto i = static_cast<std::size_t>(y * w_ + x);
                const double degree = (x > 0) + (x + 1 < w_) + (y > 0) + (y + 1 < h_);
                const bool hint = mask(y, x);
                fixed_[i] = hint && lambda == 0.0;
                diag_[i] = degree + (hint ? lambda : 0.0);
            }
        }
    }

    bool fixed(std::size_t i) const { return fixed_[i]; }
    double diag(std::size_t i) const { return diag_[i]; }
    int height() const { return h_; }
    int width() const { return w_; }

    // y = A x over the free pixels (fixed entries of x are ignored and y is 0 there).
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        for (int r = 0; r < h_; ++r) {
            for (int c = 0; c < w_; ++c) {
                const auto i = static_cast<std::size_t>(r * w_ + c);
                if (fixed_[i]) { y[i] = 0.0; continue; }
                double acc = diag_[i] * x[i];
                auto nb = [&](int rr, int cc) {
                    const auto j = static_cast<std::size_t>(rr * w_ + cc);
                    if (!fixed_[j]) acc -= x[j];
                };
                if (c > 0) nb(r, c - 1);
                if (c + 1 < w_) nb(r, c + 1);
                if (r > 0) nb(r - 1, c);
                if (r + 1 < h_) nb(r + 1, c);
                y[i] = acc;
            }
        }
    }

    // Right-hand side from hint values (zero off-hint).
    std::vector<double> rhs(const std::vector<double>& hint_values, const BinaryMask& mask) const {
        std::vector<double> b(hint_values.size(), 0.0);
        for (int r = 0; r < h_; ++r) {
            for (int c = 0; c < w_; ++c) {
                const auto i = static_cast<std::size_t>(r * w_ + c);
                if (fixed_[i]) continue;
                if (lambda_ > 0.0 && mask(r, c)) b[i] += lambda_ * hint_values[i];
                auto nb = [&](int rr, int cc) {
                    const auto j = static_cast<std::size_t>(rr * w_ + cc);
                    if (fixed_[j]) b[i] += hint_values[j];
                };
                if (c > 0) nb(r, c - 1);
                if (c + 1 < w_) nb(r, c + 1);
                if (r > 0) nb(r - 1, c);
                if (r + 1 < h_) nb(r + 1, c);
            }
        }
        return b;
    }

private:
    int h_, w_;
    double lambda_;
    std::vector<bool> fixed_;
    std::vector<double> diag_;
};

struct ChannelSolve {
    std::vector<double> values;
    double residual = 0.0;
    int iterations = 0;
};

inline double dot_free(const DirichletSystem& sys, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!sys.fixed(i)) s += a[i] * b[i];
    }
    return s;
}

// Jacobi-preconditioned conjugate gradient.
inline ChannelSolve solve_cg(const DirichletSystem& sys, const BinaryMask& mask,
                             const std::vector<double>& hint_values, double tolerance, int max_iterations) {
    const std::size_t n = hint_values.size();
    ChannelSolve out;
    out.values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (sys.fixed(i)) out.values[i] = hint_values[i];
    }
    const std::vector<double> b = sys.rhs(hint_values, mask);
    const double b_norm = std::sqrt(dot_free(sys, b, b));
    if (b_norm == 0.0) return out;

    std::vector<double> x(n, 0.0), r = b, z(n, 0.0), p(n, 0.0), ap(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!sys.fixed(i)) z[i] = r[i] / sys.diag(i);
    }
    p = z;
    double rz = dot_free(sys, r, z);
    double rel = 1.0;
    int it = 0;
    while (it < max_iterations) {
        sys.apply(p, ap);
        const double pap = dot_free(sys, p, ap);
        if (pap <= 0.0) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            if (sys.fixed(i)) continue;
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ++it;
        rel = std::sqrt(dot_free(sys, r, r)) / b_norm;
        if (rel <= tolerance) break;
        for (std::size_t i = 0; i < n; ++i) {
            if (!sys.fixed(i)) z[i] = r[i] / sys.diag(i);
        }
        const double rz_next = dot_free(sys, r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) {
            if (!sys.fixed(i)) p[i] = z[i] + beta * p[i];
        }
    }
    if (rel > tolerance) {
        throw ConvergenceError(module_name::densify,
                               "conjugate gradient did not reach tolerance after " + std::to_string(it) +
                                   " iterations (relative residual " + std::to_string(rel) + ")",
                               rel, it);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!sys.fixed(i)) out.values[i] = x[i];
    }
    out.residual = rel;
    out.iterations = it;
    return out;
}

// Sparse Cholesky (LDLT) on the same reduced system.
inline ChannelSolve solve_direct(const DirichletSystem& sys, const BinaryMask& mask,
                                 const std::vector<double>& hint_values) {
    const int h = sys.height();
    const int w = sys.width();
    const std::size_t n = hint_values.size();
    std::vector<int> unknown(n, -1);
    int m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!sys.fixed(i)) unknown[i] = m++;
    }
    ChannelSolve out;
    out.values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (sys.fixed(i)) out.values[i] = hint_values[i];
    }
    if (m == 0) return out;

    const std::vector<double> b_full = sys.rhs(hint_values, mask);
    Eigen::VectorXd b(m);
    std::vector<Eigen::Triplet<double>> triplets;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto i = static_cast<std::size_t>(r * w + c);
            if (unknown[i] < 0) continue;
            b[unknown[i]] = b_full[i];
            triplets.emplace_back(unknown[i], unknown[i], sys.diag(i));
            auto nb = [&](int rr, int cc) {
                const auto j = static_cast<std::size_t>(rr * w + cc);
                if (unknown[j] >= 0) triplets.emplace_back(unknown[i], unknown[j], -1.0);
            };
            if (c > 0) nb(r, c - 1);
            if (c + 1 < w) nb(r, c + 1);
            if (r > 0) nb(r - 1, c);
            if (r + 1 < h) nb(r + 1, c);
        }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success) {
        throw ConvergenceError(module_name::densify, "direct factorization failed", 1.0, 0);
    }
    const Eigen::VectorXd x = ldlt.solve(b);
    const double b_norm = b.norm();
    out.residual = b_norm > 0 ? (a * x - b).norm() / b_norm : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (unknown[i] >= 0) out.values[i] = x[unknown[i]];
    }
    return out;
}

}  // namespace detail

/// Dense flow from sparse hints: per frame and per channel, the minimizer of
/// the discrete Dirichlet energy with hard (lambda = 0) or penalized
/// (lambda > 0) agreement at the hint pixels, zero-gradient at the border.
/// Frames without hints come out as zero unless `config.strict` is set.
inline FlowField densify(const SparseHints& hints, const DensifyConfig& config, DensifyReport* report = nullptr) {
    config.validate();
    const int h = hints.height();
    const int w = hints.width();
    if (hints.mask.height() != h || hints.mask.width() != w) {
        throw Error(module_name::densify, ErrorKind::shape, "hint mask does not match hint vectors");
    }
    FlowField out(hints.frame_count(), h, w);
    if (hints.hint_count() == 0) {
        if (config.strict) throw Error(module_name::densify, ErrorKind::parameter, "no hints to densify");
        return out;
    }
    const int max_it = config.max_iterations > 0 ? config.max_iterations : 10 * h * w;
    const detail::DirichletSystem sys(hints.mask, config.lambda);
    const std::size_t n = static_cast<std::size_t>(h) * w;
    std::vector<double> channel(n);
    DensifyReport local;
    for (int f = 0; f < hints.frame_count(); ++f) {
        const FlowFrame& src = hints.vectors.frame(f);
        FlowFrame& dst = out.frame(f);
        for (double Vec2::*c : {&Vec2::x, &Vec2::y}) {
            for (std::size_t i = 0; i < n; ++i) channel[i] = hints.mask.grid()[i] ? src[i].*c : 0.0;
            const auto solved = config.solver == DensifySolver::direct
                                    ? detail::solve_direct(sys, hints.mask, channel)
                                    : detail::solve_cg(sys, hints.mask, channel, config.residual_tolerance, max_it);
            for (std::size_t i = 0; i < n; ++i) dst[i].*c = solved.values[i];
            local.max_residual = std::max(local.max_residual, solved.residual);
            local.max_iterations = std::max(local.max_iterations, solved.iterations);
        }
    }
    if (report) *report = local;
    return out;
}

/// A sparse-to-dense model. The reference image may be null; backends that do
/// not use image guidance ignore it.
using DensifierBackend = std::function<FlowField(const SparseHints&, const ImageFrame* reference)>;

/// Named densifier backends. Holds the numerical solver as "harmonic" (the
/// default) plus two trivial backends useful for wiring tests.
class DensifierRegistry {
public:
    static constexpr const char* default_backend = "harmonic";

    DensifierRegistry() : DensifierRegistry(DensifyConfig{}) {}
    explicit DensifierRegistry(DensifyConfig config) {
        add(default_backend, [config](const SparseHints& hints, const ImageFrame*) { return densify(hints, config); });
        add("identity", [](const SparseHints& hints, const ImageFrame*) { return hints.vectors; });
        add("constant", [](const SparseHints& hints, const ImageFrame*) {
            FlowField out(hints.frame_count(), hints.height(), hints.width());
            const auto& m = hints.mask.grid().values();
            const auto first = std::find(m.begin(), m.end(), std::uint8_t{1});
            if (first == m.end()) return out;
            const auto at = static_cast<std::size_t>(first - m.begin());
            for (int f = 0; f < out.frame_count(); ++f) {
                const Vec2 v = hints.vectors.frame(f)[at];
                for (auto& d : out.frame(f).values()) d = v;
            }
            return out;
        });
    }

    void add(const std::string& name, DensifierBackend backend) { backends_[name] = std::move(backend); }
    bool contains(const std::string& name) const { return backends_.count(name) != 0; }

    const DensifierBackend& get(const std::string& name) const {
        auto it = backends_.find(name);
        if (it == backends_.end()) {
            throw Error(module_name::densify, ErrorKind::parameter, "unknown densifier backend '" + name + "'");
        }
        return it->second;
    }

private:
    std::map<std::string, DensifierBackend> backends_;
};

inline FlowField densify_interface(const SparseHints& hints, const std::string& backend,
                                   const DensifierRegistry& registry = DensifierRegistry{},
                                   const ImageFrame* reference = nullptr) {
    FlowField out = registry.get(backend)(hints, reference);
    if (!out.same_shape(hints.vectors)) {
        throw Error(module_name::densify, ErrorKind::contract, "backend '" + backend + "' changed the flow shape");
    }
    return out;
}

}  // namespace motionfield
