// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "motionfield/motionfield.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace motionfield;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && first_failure_.empty()) first_failure_ = what;
        pass_ = pass_ && ok;
    }
    void note(const std::string& s) { notes_ << s << ' '; }
    Outcome done() const { return {pass_, pass_ ? notes_.str() : first_failure_ + " | " + notes_.str()}; }

private:
    bool pass_ = true;
    std::string first_failure_;
    std::ostringstream notes_;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Outcome densifier_oracle() {
    Check c;
    std::mt19937 rng(101);
    std::uniform_int_distribution<int> count(2, 10);
    double worst = 0, worst_hint = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 50; ++trial) {
        const auto hints = oracle::random_hints(rng, 1, 8, 8, count(rng));
        const auto out = densify(hints, {});
        for (bool v : {false, true}) {
            const auto got = oracle::channel(out.frame(0), v);
            const auto want = oracle::laplace_direct(hints.mask, oracle::channel(hints.vectors.frame(0), v), 0.0);
            worst = std::max(worst, max_abs(got, want));
            const auto src = oracle::channel(hints.vectors.frame(0), v);
            for (std::size_t i = 0; i < got.size(); ++i) {
                if (hints.mask.grid()[i]) worst_hint = std::max(worst_hint, std::abs(got[i] - src[i]));
            }
        }
    }
    const double secs = seconds_since(t0);
    c.expect(worst <= 1e-6, "solution deviates from direct solve by " + fmt("%.3g", worst));
    c.expect(worst_hint <= 1e-9, "hint pixel error " + fmt("%.3g", worst_hint));
    c.expect(secs < 5.0, "took " + fmt("%.2f", secs) + " s");
    c.note("instances=50 max_err=" + fmt("%.2e", worst) + " hint_err=" + fmt("%.2e", worst_hint) + " time=" + fmt("%.3f", secs) + "s");
    return c.done();
}

Outcome densifier_properties() {
    Check c;
    std::mt19937 rng(202);
    std::uniform_int_distribution<int> count(2, 10), side(4, 12);
    std::uniform_real_distribution<double> coef(-3, 3), val(-10, 10);
    double lin_err = 0, const_err = 0, range_excess = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int h = side(rng), w = side(rng);
        const DensifyConfig cfg;
        // Maximum principle.
        const auto hints = oracle::random_hints(rng, 1, h, w, std::min(count(rng), h * w));
        const auto out = densify(hints, cfg);
        for (bool v : {false, true}) {
            const auto src = oracle::channel(hints.vectors.frame(0), v);
            double lo = 1e300, hi = -1e300;
            for (std::size_t i = 0; i < src.size(); ++i) {
                if (hints.mask.grid()[i]) { lo = std::min(lo, src[i]); hi = std::max(hi, src[i]); }
            }
            for (double u : oracle::channel(out.frame(0), v)) range_excess = std::max({range_excess, lo - u, u - hi});
        }
        // Linearity on a shared mask.
        auto second = hints;
        for (std::size_t i = 0; i < second.vectors.frame(0).size(); ++i) {
            if (second.mask.grid()[i]) second.vectors.frame(0)[i] = {val(rng), val(rng)};
        }
        const double a = coef(rng), b = coef(rng);
        auto mix = hints;
        for (std::size_t i = 0; i < mix.vectors.frame(0).size(); ++i) {
            mix.vectors.frame(0)[i] = a * hints.vectors.frame(0)[i] + b * second.vectors.frame(0)[i];
        }
        const auto o2 = densify(second, cfg), om = densify(mix, cfg);
        for (std::size_t i = 0; i < om.frame(0).size(); ++i) {
            const Vec2 want = a * out.frame(0)[i] + b * o2.frame(0)[i];
            lin_err = std::max({lin_err, std::abs(om.frame(0)[i].x - want.x), std::abs(om.frame(0)[i].y - want.y)});
        }
        // Single-hint constancy.
        SparseHints one{FlowField(1, h, w), BinaryMask(h, w)};
        const int y = std::uniform_int_distribution<int>(0, h - 1)(rng), x = std::uniform_int_distribution<int>(0, w - 1)(rng);
        const Vec2 hv{val(rng), val(rng)};
        one.mask.set(y, x, true);
        one.vectors.frame(0)(y, x) = hv;
        const auto flat = densify(one, cfg);
        for (const auto& v : flat.frame(0).values()) {
            const_err = std::max({const_err, std::abs(v.x - hv.x), std::abs(v.y - hv.y)});
        }
    }
    c.expect(range_excess <= DensifyConfig{}.residual_tolerance, "maximum principle violated by " + fmt("%.3g", range_excess));
    c.expect(lin_err <= 1e-6, "linearity error " + fmt("%.3g", lin_err));
    c.expect(const_err <= 1e-6, "single-hint field not constant, error " + fmt("%.3g", const_err));
    c.note("instances=100 range_excess=" + fmt("%.2e", std::max(0.0, range_excess)) + " linearity=" + fmt("%.2e", lin_err) +
           " constancy=" + fmt("%.2e", const_err));
    return c.done();
}

Outcome warp_exactness() {
    Check c;
    std::mt19937 rng(303);
    std::uniform_real_distribution<double> d(0, 1);
    std::uniform_int_distribution<int> shift(-6, 6);
    auto random_grid = [&](int h, int w, int ch) {
        FeatureGrid g(h, w, ch);
        for (double& v : g.values()) v = d(rng);
        return g;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_grid(9, 11, 3);
        for (auto mode : {WarpMode::average, WarpMode::softmax}) {
            c.expect(forward_warp(g, FlowFrame(9, 11), {mode}).warped == g, "zero flow is not the identity");
        }
        const int sx = shift(rng), sy = shift(rng);
        FlowFrame f(9, 11, Vec2{double(sx), double(sy)});
        for (auto mode : {WarpMode::average, WarpMode::softmax}) {
            const auto r = forward_warp(g, f, {mode});
            for (int y = 0; y < 9; ++y) {
                for (int x = 0; x < 11; ++x) {
                    if (!g.contains(y - sy, x - sx)) continue;
                    for (int k = 0; k < 3; ++k) c.expect(r.warped(y, x, k) == g(y - sy, x - sx, k), "integer shift not exact");
                }
            }
        }
    }
    double mass_err = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_grid(8, 8, 1);
        std::vector<int> perm(64);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        FlowFrame f(8, 8);
        for (int i = 0; i < 64; ++i) f(i / 8, i % 8) = {double(perm[static_cast<std::size_t>(i)] % 8 - i % 8), double(perm[static_cast<std::size_t>(i)] / 8 - i / 8)};
        const auto r = forward_warp(g, f);
        double a = 0, b = 0;
        for (double v : g.values()) a += v;
        for (double v : r.warped.values()) b += v;
        mass_err = std::max(mass_err, std::abs(a - b));
    }
    c.expect(mass_err <= 1e-9, "permutation mass error " + fmt("%.3g", mass_err));
    c.note("identity=bit-exact shifts=exact mass_err=" + fmt("%.2e", mass_err));
    return c.done();
}

Outcome hint_construction() {
    Check c;
    std::mt19937 rng(404);
    // Masked flow against an elementwise loop.
    for (int trial = 0; trial < 20; ++trial) {
        const auto flow = oracle::random_flow(rng, 3, 8, 8);
        const auto mask = oracle::random_mask(rng, 8, 8, 0.3);
        const auto h = sparse_from_flow(flow, mask);
        for (int f = 0; f < 3; ++f) {
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    const Vec2 want = mask(y, x) ? flow.frame(f)(y, x) : Vec2{};
                    c.expect(h.vectors.frame(f)(y, x) == want, "masked flow differs from loop oracle");
                }
            }
        }
    }
    // Landmark hints against a loop over frames and points.
    std::uniform_real_distribution<double> pos(2, 60), step(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        const int frames = 5, k = 12;
        std::vector<std::vector<Vec2>> pts(frames, std::vector<Vec2>(k));
        for (int j = 0; j < k; ++j) {
            pts[0][static_cast<std::size_t>(j)] = {std::round(pos(rng)), std::round(pos(rng))};
            for (int l = 1; l < frames; ++l) pts[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] = pts[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)] + Vec2{step(rng), step(rng)};
        }
        const auto h = sparse_from_landmarks(LandmarkSequence(pts), 64, 64);
        FlowField want(frames - 1, 64, 64);
        BinaryMask mask(64, 64);
        for (int j = 0; j < k; ++j) {
            const Vec2 p0 = pts[0][static_cast<std::size_t>(j)];
            const int x = static_cast<int>(p0.x), y = static_cast<int>(p0.y);
            mask.set(y, x, true);
            for (int l = 1; l < frames; ++l) want.frame(l - 1)(y, x) = pts[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] - p0;
        }
        c.expect(h.vectors == want && h.mask == mask, "landmark hints differ from loop oracle");
    }
    // Spline resampling against the dense-parameterization oracle.
    std::uniform_real_distribution<double> coord(0, 60);
    std::uniform_int_distribution<int> npts(3, 6), frames(3, 16);
    double spline_err = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec2> pts(static_cast<std::size_t>(npts(rng)));
        for (auto& p : pts) p = {coord(rng), coord(rng)};
        const int l = frames(rng);
        const auto got = resample_trajectory(pts, l);
        const auto want = oracle::spline_resample(pts, l, 200000);
        for (std::size_t i = 0; i < got.size(); ++i) spline_err = std::max(spline_err, (got[i] - want[i]).norm());
    }
    c.expect(spline_err <= 1e-6, "spline resampling error " + fmt("%.3g", spline_err));
    // Two-point linear case is exact.
    for (int l : {2, 3, 5, 9}) {
        const std::vector<Vec2> seg = {{3, 7}, {19, -1}};
        const auto got = resample_trajectory(seg, l);
        for (int i = 0; i < l; ++i) {
            const double t = static_cast<double>(i) / (l - 1);
            c.expect(got[static_cast<std::size_t>(i)] == Vec2{3 + t * 16, 7 + t * -8}, "two-point resampling not exact");
        }
    }
    c.note("masked-flow=exact landmarks=exact spline_err=" + fmt("%.2e", spline_err) + " two-point=exact");
    return c.done();
}

Outcome scheduler() {
    Check c;
    for (int total : {14, 21, 25, 100}) {
        const auto s = build_schedule(total, 14, 7);
        const auto w = frame_weights(s);
        for (const auto& row : w) {
            double sum = 0;
            for (double v : row) sum += v;
            c.expect(sum == 1.0, "weights for L=" + std::to_string(total) + " do not sum to 1");
        }
    }
    std::mt19937 rng(505);
    std::normal_distribution<double> nd;
    Latents x(14, std::vector<double>(4));
    for (auto& f : x) {
        for (double& v : f) v = nd(rng);
    }
    const Denoiser den = [](const Latents& win, int t, const std::vector<double>& cond) {
        Latents out = win;
        for (auto& f : out) {
            for (double& v : f) v = std::sin(v) * (t + 1) + cond[0];
        }
        return out;
    };
    c.expect(blend_predictions(build_schedule(14), x, 2, den, {0.25}) == den(x, 2, {0.25}), "single window not bit-exact");
    int calls = 0;
    const Denoiser constants = [&](const Latents& win, int, const std::vector<double>&) {
        return Latents(win.size(), std::vector<double>(1, calls++ == 0 ? 0.0 : 2.0));
    };
    const auto blended = blend_predictions(build_schedule(21), Latents(21, std::vector<double>(1)), 0, constants, {});
    for (int f = 7; f < 14; ++f) c.expect(blended[static_cast<std::size_t>(f)][0] == 1.0, "overlap value is not 1");
    c.expect(blended[0][0] == 0.0 && blended[20][0] == 2.0, "non-overlap frames changed");
    c.note("L={14,21,25,100} weights=exact single-window=bit-exact overlap=1");
    return c.done();
}

FeaturePyramid random_pyramid(std::mt19937& rng, int levels) {
    std::uniform_real_distribution<double> d(-1, 1);
    FeatureGrid g(8, 8, 2);
    for (double& v : g.values()) v = d(rng);
    return build_pyramid(g, levels);
}

Outcome composition() {
    Check c;
    std::mt19937 rng(606);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = oracle::random_flow(rng, 2, 8, 8);
        const auto b = oracle::random_flow(rng, 2, 8, 8);
        const auto m = oracle::random_mask(rng, 8, 8, 0.5);
        const auto out = brush_compose(a, b, m);
        for (int f = 0; f < 2; ++f) {
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    c.expect(out.frame(f)(y, x) == (m(y, x) ? a : b).frame(f)(y, x), "brush_compose differs from select oracle");
                }
            }
        }

        std::vector<AdapterInput> in;
        for (int k = 0; k < 3; ++k) in.push_back({random_pyramid(rng, 2), oracle::random_mask(rng, 8, 8, 0.4)});
        const auto fused = fuse_adapters(in);
        for (int s = 0; s < 2; ++s) {
            const int step = 1 << s;
            for (int y = 0; y < 8 / step; ++y) {
                for (int x = 0; x < 8 / step; ++x) {
                    std::size_t pick = in.size() - 1;
                    for (std::size_t k = 0; k < in.size(); ++k) {
                        int on = 0;
                        for (int dy = 0; dy < step; ++dy) {
                            for (int dx = 0; dx < step; ++dx) on += in[k].mask(y * step + dy, x * step + dx);
                        }
                        if (2 * on >= step * step) { pick = k; break; }
                    }
                    for (int ch = 0; ch < 2; ++ch) {
                        c.expect(fused.level(s)(y, x, ch) == in[pick].pyramid.level(s)(y, x, ch), "fuse_adapters differs from select oracle");
                    }
                }
            }
        }
    }
    c.note("instances=30 grid=8x8 levels=2 brush=exact fuse=exact");
    return c.done();
}

Outcome end_to_end() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_pipeline(scene::patch_project());
    const Vec2 d = scene::centroid(r.frames.back()) - scene::centroid(r.frames.front());
    c.expect(r.frames.size() == 5, "expected 5 frames");
    c.expect(std::abs(d.x - 10) <= 1 && std::abs(d.y) <= 1, "patch centroid moved by (" + fmt("%.3f", d.x) + ", " + fmt("%.3f", d.y) + ")");

    Project pan;
    pan.reference = scene::gradient_image(64, 64);
    pan.frames = 5;
    pan.camera = CameraParams{CameraKind::pan, 5, 0, 1, 0, {}};
    const auto rp = run_pipeline(pan);
    bool exact = true;
    for (int y = 0; y < 64; ++y) {
        for (int x = 5; x < 64; ++x) {
            for (int k = 0; k < 3; ++k) exact = exact && rp.frames.back()(y, x, k) == pan.reference(y, x - 5, k);
        }
    }
    c.expect(exact, "pan preset is not an exact 5 px shift");
    const double secs = seconds_since(t0);
    c.expect(secs < 10.0, "took " + fmt("%.2f", secs) + " s");
    c.note("centroid_shift=(" + fmt("%.3f", d.x) + "," + fmt("%.3f", d.y) + ") pan=exact time=" + fmt("%.3f", secs) + "s");
    return c.done();
}

Outcome formats() {
    Check c;
    std::mt19937 rng(707);
    std::uniform_real_distribution<float> d(-100, 100);
    for (int trial = 0; trial < 10; ++trial) {
        FlowFrame f(5 + trial, 7);
        for (auto& v : f.values()) v = {d(rng), d(rng)};
        const auto bytes = io::encode_flo(f);
        c.expect(io::decode_flo(bytes) == f && io::encode_flo(io::decode_flo(bytes)) == bytes, ".flo round trip not exact");
    }
    const std::vector<std::uint8_t> fixture = {'P', 'I', 'E', 'H', 2, 0, 0, 0, 1, 0, 0, 0,
                                               0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0xC0,
                                               0x00, 0x00, 0x00, 0x3F, 0x00, 0x00, 0x00, 0x00};
    const auto fx = io::decode_flo(fixture);
    c.expect(fx.width() == 2 && fx.height() == 1 && fx(0, 0) == Vec2{1, -2} && fx(0, 1) == Vec2{0.5, 0},
             ".flo fixture parsed to unexpected values");

    std::uniform_real_distribution<double> coord(0, 100);
    for (int trial = 0; trial < 10; ++trial) {
        io::ProjectFile p;
        p.image = "img" + std::to_string(trial) + ".png";
        p.frames = 2 + trial;
        for (int t = 0; t < 3; ++t) p.trajectories.push_back({{{coord(rng), coord(rng)}, {coord(rng), coord(rng)}}});
        p.masks = {"m.png"};
        if (trial % 2) p.landmarks = "lm.json";
        if (trial % 3 == 0) p.camera = CameraParams{CameraKind::zoom, 0, 0, 1 + coord(rng) / 100, 0, Vec2{coord(rng), coord(rng)}};
        p.lambda = coord(rng) / 10;
        p.tolerance = 1e-9;
        const auto back = io::project_from_json(nlohmann::json::parse(io::to_json(p).dump()));
        c.expect(back == p, "project JSON round trip not exact");
    }
    c.note("flo=bit-exact fixture=ok project-json=exact");
    return c.done();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"densifier oracle equivalence", densifier_oracle},
        {"densifier properties", densifier_properties},
        {"warp exactness", warp_exactness},
        {"hint construction", hint_construction},
        {"scheduler", scheduler},
        {"composition", composition},
        {"end-to-end preview", end_to_end},
        {"formats", formats},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s  %-30s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
