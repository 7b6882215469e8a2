#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "motionfield/densify.hpp"
#include "motionfield/io/project_json.hpp"

namespace motionfield::io {

/// Standalone sparse-hint document used by `engine densify`:
///
///     {"width": W, "height": H, "frames": F,
///      "points": [{"x": 3, "y": 4, "vectors": [[u, v], ...F entries]}],
///      "lambda": 0.0, "tol": 1e-8, "backend": "harmonic"}
///
/// lambda, tol and backend are optional.
struct HintsDocument {
    SparseHints hints;
    DensifyConfig config;
    std::string backend = DensifierRegistry::default_backend;
};

inline HintsDocument hints_from_json(const json& j) {
    using namespace detail;
    reject_unknown(j, "", {"width", "height", "frames", "points", "lambda", "tol", "backend"});
    const int w = integer_at(require(j, "width", ""), "width");
    const int h = integer_at(require(j, "height", ""), "height");
    const int frames = integer_at(require(j, "frames", ""), "frames");
    if (w < 1 || h < 1 || frames < 1) schema_error("width/height/frames", "must all be >= 1");
    HintsDocument doc{SparseHints{FlowField(frames, h, w), BinaryMask(h, w)}, {}, DensifierRegistry::default_backend};
    const json& points = require(j, "points", "");
    if (!points.is_array()) schema_error("points", "expected an array");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string pp = "points[" + std::to_string(i) + "]";
        reject_unknown(points[i], pp, {"x", "y", "vectors"});
        const int x = integer_at(require(points[i], "x", pp), pp + ".x");
        const int y = integer_at(require(points[i], "y", pp), pp + ".y");
        if (x < 0 || y < 0 || x >= w || y >= h) schema_error(pp, "point outside the grid");
        const json& vecs = require(points[i], "vectors", pp);
        if (!vecs.is_array() || static_cast<int>(vecs.size()) != frames) {
            schema_error(pp + ".vectors", "expected one [u, v] per frame");
        }
        if (doc.hints.mask(y, x)) ++doc.hints.collisions;
        doc.hints.mask.set(y, x, true);
        for (int f = 0; f < frames; ++f) {
            doc.hints.vectors.frame(f)(y, x) =
                point_at(vecs[static_cast<std::size_t>(f)], pp + ".vectors[" + std::to_string(f) + "]");
        }
    }
    if (j.contains("lambda")) doc.config.lambda = number_at(j["lambda"], "lambda");
    if (j.contains("tol")) doc.config.residual_tolerance = number_at(j["tol"], "tol");
    if (j.contains("backend")) doc.backend = string_at(j["backend"], "backend");
    return doc;
}

inline json hints_to_json(const SparseHints& hints, const DensifyConfig& config = {},
                          const std::string& backend = DensifierRegistry::default_backend) {
    json points = json::array();
    for (int y = 0; y < hints.height(); ++y) {
        for (int x = 0; x < hints.width(); ++x) {
            if (!hints.mask(y, x)) continue;
            json vecs = json::array();
            for (int f = 0; f < hints.frame_count(); ++f) vecs.push_back(detail::point_json(hints.vectors.frame(f)(y, x)));
            points.push_back({{"x", x}, {"y", y}, {"vectors", vecs}});
        }
    }
    return {{"width", hints.width()},   {"height", hints.height()},         {"frames", hints.frame_count()},
            {"points", points},         {"lambda", config.lambda},          {"tol", config.residual_tolerance},
            {"backend", backend}};
}

}  // namespace motionfield::io
