#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motionfield/error.hpp"

namespace motionfield {

// Coordinates: x = column, y = row, origin top-left, y grows downwards.

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    Vec2& operator+=(Vec2 b) { x += b.x; y += b.y; return *this; }
    friend bool operator==(Vec2 a, Vec2 b) = default;

    double norm() const { return std::hypot(x, y); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

/// Integer pixel index.
struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(Pixel, Pixel) = default;
};

/// Row-major dense 2-D grid.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, T fill = T{})
        : height_(height), width_(width),
          data_(static_cast<std::size_t>(checked_area(height, width)), fill) {}

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int y, int x) const noexcept {
        return y >= 0 && y < height_ && x >= 0 && x < width_;
    }

    T& operator()(int y, int x) { return data_[index(y, x)]; }
    const T& operator()(int y, int x) const { return data_[index(y, x)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> values() & noexcept { return data_; }
    std::span<const T> values() const& noexcept { return data_; }
    std::vector<T> values() && { return std::move(data_); }

    bool same_shape(const auto& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static int checked_area(int h, int w) {
        if (h < 0 || w < 0) {
            throw Error("grid", ErrorKind::shape, "negative grid dimension");
        }
        return h * w;
    }
    std::size_t index(int y, int x) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using FlowFrame = Grid<Vec2>;

/// Dense motion anchored at frame 0: frames()[i] maps frame 0 to frame i + 1.
class FlowField {
public:
    FlowField() = default;
    FlowField(int frames, int height, int width) {
        if (frames < 1 || height < 1 || width < 1) {
            throw Error("flow", ErrorKind::shape, "flow field needs >= 1 frame and a non-empty grid");
        }
        frames_.assign(static_cast<std::size_t>(frames), FlowFrame(height, width));
    }
    explicit FlowField(std::vector<FlowFrame> frames) : frames_(std::move(frames)) {
        if (frames_.empty() || frames_.front().empty()) {
            throw Error("flow", ErrorKind::shape, "flow field needs >= 1 frame and a non-empty grid");
        }
        for (const auto& f : frames_) {
            if (!f.same_shape(frames_.front())) {
                throw Error("flow", ErrorKind::shape, "flow frames differ in size");
            }
        }
    }

    int frame_count() const noexcept { return static_cast<int>(frames_.size()); }
    int height() const noexcept { return frames_.empty() ? 0 : frames_.front().height(); }
    int width() const noexcept { return frames_.empty() ? 0 : frames_.front().width(); }

    FlowFrame& frame(int i) & { return frames_.at(static_cast<std::size_t>(i)); }
    const FlowFrame& frame(int i) const& { return frames_.at(static_cast<std::size_t>(i)); }
    FlowFrame frame(int i) && { return std::move(frames_.at(static_cast<std::size_t>(i))); }
    std::vector<FlowFrame>& frames() & noexcept { return frames_; }
    const std::vector<FlowFrame>& frames() const& noexcept { return frames_; }
    std::vector<FlowFrame> frames() && { return std::move(frames_); }

    bool same_shape(const FlowField& o) const noexcept {
        return frame_count() == o.frame_count() && height() == o.height() && width() == o.width();
    }

    bool all_finite() const {
        for (const auto& f : frames_) {
            for (const auto& v : f.values()) {
                if (!v.finite()) return false;
            }
        }
        return true;
    }

    friend bool operator==(const FlowField&, const FlowField&) = default;

private:
    std::vector<FlowFrame> frames_;
};

inline FlowField operator+(const FlowField& a, const FlowField& b) {
    if (!a.same_shape(b)) throw Error("flow", ErrorKind::shape, "flow fields differ in shape");
    FlowField out = a;
    for (int f = 0; f < a.frame_count(); ++f) {
        auto dst = out.frame(f).values();
        auto src = b.frame(f).values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return out;
}

/// Binary H×W mask. Values are 0 or 1.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width) : grid_(height, width, 0) {}
    explicit BinaryMask(Grid<std::uint8_t> grid) : grid_(std::move(grid)) {
        for (auto v : grid_.values()) {
            if (v > 1) throw Error("mask", ErrorKind::input, "mask values must be 0 or 1");
        }
    }

    int height() const noexcept { return grid_.height(); }
    int width() const noexcept { return grid_.width(); }
    bool contains(int y, int x) const noexcept { return grid_.contains(y, x); }

    bool operator()(int y, int x) const { return grid_(y, x) != 0; }
    void set(int y, int x, bool on) { grid_(y, x) = on ? 1 : 0; }

    int count() const {
        return static_cast<int>(std::count(grid_.values().begin(), grid_.values().end(), std::uint8_t{1}));
    }

    const Grid<std::uint8_t>& grid() const noexcept { return grid_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    Grid<std::uint8_t> grid_;
};

using RegionMask = BinaryMask;

/// Multi-channel H×W grid, channel-interleaved. Stands in for a feature map.
class FeatureGrid {
public:
    FeatureGrid() = default;
    FeatureGrid(int height, int width, int channels, double fill = 0.0)
        : height_(height), width_(width), channels_(channels) {
        if (height < 0 || width < 0 || channels < 1) {
            throw Error("grid", ErrorKind::shape, "invalid feature grid shape");
        }
        data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }
    bool contains(int y, int x) const noexcept {
        return y >= 0 && y < height_ && x >= 0 && x < width_;
    }

    double& operator()(int y, int x, int c) { return data_[index(y, x, c)]; }
    double operator()(int y, int x, int c) const { return data_[index(y, x, c)]; }

    std::span<double> pixel(int y, int x) {
        return std::span<double>(data_).subspan(index(y, x, 0), static_cast<std::size_t>(channels_));
    }
    std::span<const double> pixel(int y, int x) const {
        return std::span<const double>(data_).subspan(index(y, x, 0), static_cast<std::size_t>(channels_));
    }

    std::span<double> values() & noexcept { return data_; }
    std::span<const double> values() const& noexcept { return data_; }
    std::vector<double> values() && { return std::move(data_); }

    bool same_shape(const FeatureGrid& o) const noexcept {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

    friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;

private:
    std::size_t index(int y, int x, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 1;
    std::vector<double> data_;
};

/// Image with 1, 3 or 4 channels and values in [0, 1].
class ImageFrame : public FeatureGrid {
public:
    ImageFrame() = default;
    ImageFrame(int height, int width, int channels, double fill = 0.0)
        : FeatureGrid(height, width, channels, fill) {
        validate();
    }
    explicit ImageFrame(FeatureGrid grid) : FeatureGrid(std::move(grid)) { validate(); }

    void validate() const {
        if (channels() != 1 && channels() != 3 && channels() != 4) {
            throw Error("image", ErrorKind::input, "image must have 1, 3 or 4 channels");
        }
        for (double v : values()) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw Error("image", ErrorKind::input, "image values must be finite and in [0, 1]");
            }
        }
    }
};

}  // namespace motionfield
