#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "motionfield/grid.hpp"

namespace motionfield {

/// HSV colour wheel: hue is the flow direction (0 deg = +x, increasing
/// towards +y), saturation is magnitude / max_magnitude, value is 1. Zero
/// flow is white. Without `max_magnitude` the frame's own maximum is used.
inline ImageFrame flow_to_color(const FlowFrame& flow, std::optional<double> max_magnitude = std::nullopt) {
    double max_mag = 0.0;
    if (max_magnitude) {
        max_mag = *max_magnitude;
    } else {
        for (const auto& v : flow.values()) max_mag = std::max(max_mag, v.norm());
    }
    ImageFrame out(flow.height(), flow.width(), 3, 1.0);
    if (!(max_mag > 0.0)) return out;
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            const Vec2 v = flow(y, x);
            const double sat = std::min(1.0, v.norm() / max_mag);
            double hue = std::atan2(v.y, v.x) * 180.0 / std::numbers::pi;
            if (hue < 0) hue += 360.0;
            const double h6 = hue / 60.0;
            const int sector = static_cast<int>(std::floor(h6)) % 6;
            const double frac = h6 - std::floor(h6);
            const double p = 1.0 - sat;
            const double q = 1.0 - sat * frac;
            const double t = 1.0 - sat * (1.0 - frac);
            double r = 1, g = 1, b = 1;
            switch (sector) {
                case 0: r = 1; g = t; b = p; break;
                case 1: r = q; g = 1; b = p; break;
                case 2: r = p; g = 1; b = t; break;
                case 3: r = p; g = q; b = 1; break;
                case 4: r = t; g = p; b = 1; break;
                default: r = 1; g = p; b = q; break;
            }
            out(y, x, 0) = r;
            out(y, x, 1) = g;
            out(y, x, 2) = b;
        }
    }
    return out;
}

}  // namespace motionfield
