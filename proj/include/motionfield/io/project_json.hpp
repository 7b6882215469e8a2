#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "motionfield/densify.hpp"
#include "motionfield/hints.hpp"
#include "motionfield/io/png.hpp"

namespace motionfield::io {

using nlohmann::json;

inline constexpr int project_version = 1;

/// On-disk project document (version 1). Asset fields are paths relative to
/// the project file.
struct ProjectFile {
    std::string image;
    int frames = 0;  ///< "L"
    std::vector<Trajectory> trajectories;
    std::vector<std::string> masks;
    std::optional<std::string> landmarks;
    std::optional<CameraParams> camera;
    double lambda = 0.0;
    double tolerance = 1e-8;
    int window = 14;
    int stride = 7;

    friend bool operator==(const ProjectFile&, const ProjectFile&) = default;
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
    throw Error(module_name::pipeline, ErrorKind::schema, path + ": " + what);
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) schema_error(path.empty() ? "<root>" : path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) schema_error(path.empty() ? key : path + "." + key, "unknown field");
    }
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

inline double number_at(const json& v, const std::string& path) {
    if (!v.is_number()) schema_error(path, "expected a number");
    return v.get<double>();
}

inline int integer_at(const json& v, const std::string& path) {
    if (!v.is_number_integer()) schema_error(path, "expected an integer");
    return v.get<int>();
}

inline std::string string_at(const json& v, const std::string& path) {
    if (!v.is_string()) schema_error(path, "expected a string");
    return v.get<std::string>();
}

inline Vec2 point_at(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) schema_error(path, "expected [x, y]");
    return {number_at(v[0], path + "[0]"), number_at(v[1], path + "[1]")};
}

inline json point_json(Vec2 p) { return json::array({p.x, p.y}); }

}  // namespace detail

inline json camera_to_json(const CameraParams& c) {
    json j{{"kind", std::string(to_string(c.kind))}};
    switch (c.kind) {
        case CameraKind::pan: j["dx"] = c.dx; j["dy"] = c.dy; break;
        case CameraKind::zoom: j["scale"] = c.scale; break;
        case CameraKind::rotate: j["degrees"] = c.degrees; break;
    }
    if (c.center) {
        j["cx"] = c.center->x;
        j["cy"] = c.center->y;
    }
    return j;
}

inline CameraParams camera_from_json(const json& j, const std::string& path = "camera") {
    using namespace detail;
    if (!j.is_object()) schema_error(path, "expected an object or null");
    CameraParams c;
    try {
        c.kind = parse_camera_kind(string_at(require(j, "kind", path), path + ".kind"));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::schema) throw;
        schema_error(path + ".kind", e.what());
    }
    switch (c.kind) {
        case CameraKind::pan:
            reject_unknown(j, path, {"kind", "dx", "dy", "cx", "cy"});
            c.dx = number_at(require(j, "dx", path), path + ".dx");
            c.dy = number_at(require(j, "dy", path), path + ".dy");
            break;
        case CameraKind::zoom:
            reject_unknown(j, path, {"kind", "scale", "cx", "cy"});
            c.scale = number_at(require(j, "scale", path), path + ".scale");
            break;
        case CameraKind::rotate:
            reject_unknown(j, path, {"kind", "degrees", "cx", "cy"});
            c.degrees = number_at(require(j, "degrees", path), path + ".degrees");
            break;
    }
    const bool has_cx = j.contains("cx");
    if (has_cx != j.contains("cy")) schema_error(path, "cx and cy must be given together");
    if (has_cx) c.center = Vec2{number_at(j["cx"], path + ".cx"), number_at(j["cy"], path + ".cy")};
    return c;
}

inline json to_json(const ProjectFile& p) {
    json trajs = json::array();
    for (const auto& t : p.trajectories) {
        json pts = json::array();
        for (const auto& q : t.points) pts.push_back(detail::point_json(q));
        trajs.push_back(std::move(pts));
    }
    return json{
        {"version", project_version},
        {"image", p.image},
        {"L", p.frames},
        {"trajectories", std::move(trajs)},
        {"masks", p.masks},
        {"landmarks", p.landmarks ? json(*p.landmarks) : json(nullptr)},
        {"camera", p.camera ? camera_to_json(*p.camera) : json(nullptr)},
        {"densify", {{"lambda", p.lambda}, {"tol", p.tolerance}}},
        {"schedule", {{"window", p.window}, {"stride", p.stride}}},
    };
}

/// Parses and validates a version-1 project document. Unknown fields are
/// rejected; error messages start with the offending field path.
inline ProjectFile project_from_json(const json& j) {
    using namespace detail;
    reject_unknown(j, "", {"version", "image", "L", "trajectories", "masks", "landmarks", "camera", "densify", "schedule"});

    const json& version = require(j, "version", "");
    int v = 0;
    if (version.is_number_integer()) {
        v = version.get<int>();
    } else if (version.is_string()) {
        try {
            std::size_t used = 0;
            v = std::stoi(version.get<std::string>(), &used);
            if (used != version.get<std::string>().size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            schema_error("version", "expected an integer");
        }
    } else {
        schema_error("version", "expected an integer");
    }
    if (v != project_version) {
        throw Error(module_name::pipeline, ErrorKind::schema,
                    "version: unsupported project version " + std::to_string(v) + " (this reader supports version " +
                        std::to_string(project_version) + ")");
    }

    ProjectFile p;
    p.image = string_at(require(j, "image", ""), "image");
    p.frames = integer_at(require(j, "L", ""), "L");
    if (p.frames < 2) schema_error("L", "must be >= 2");

    if (auto it = j.find("trajectories"); it != j.end()) {
        if (!it->is_array()) schema_error("trajectories", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string tp = "trajectories[" + std::to_string(i) + "]";
            const json& t = (*it)[i];
            if (!t.is_array() || t.size() < 2) schema_error(tp, "expected at least 2 [x, y] points");
            Trajectory traj;
            for (std::size_t k = 0; k < t.size(); ++k) traj.points.push_back(point_at(t[k], tp + "[" + std::to_string(k) + "]"));
            p.trajectories.push_back(std::move(traj));
        }
    }
    if (auto it = j.find("masks"); it != j.end()) {
        if (!it->is_array()) schema_error("masks", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) p.masks.push_back(string_at((*it)[i], "masks[" + std::to_string(i) + "]"));
    }
    if (auto it = j.find("landmarks"); it != j.end() && !it->is_null()) p.landmarks = string_at(*it, "landmarks");
    if (auto it = j.find("camera"); it != j.end() && !it->is_null()) p.camera = camera_from_json(*it);
    if (auto it = j.find("densify"); it != j.end()) {
        reject_unknown(*it, "densify", {"lambda", "tol"});
        if (it->contains("lambda")) p.lambda = number_at((*it)["lambda"], "densify.lambda");
        if (it->contains("tol")) p.tolerance = number_at((*it)["tol"], "densify.tol");
        if (p.lambda < 0) schema_error("densify.lambda", "must be >= 0");
        if (!(p.tolerance > 0)) schema_error("densify.tol", "must be > 0");
    }
    if (auto it = j.find("schedule"); it != j.end()) {
        reject_unknown(*it, "schedule", {"window", "stride"});
        if (it->contains("window")) p.window = integer_at((*it)["window"], "schedule.window");
        if (it->contains("stride")) p.stride = integer_at((*it)["stride"], "schedule.stride");
        if (p.window < 1) schema_error("schedule.window", "must be >= 1");
        if (p.stride < 1 || p.stride > p.window) schema_error("schedule.stride", "must be in [1, window]");
    }
    return p;
}

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(module_name::pipeline, ErrorKind::schema, what + ": invalid JSON (" + e.what() + ")");
    }
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(module_name::pipeline, ErrorKind::io, "cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_json_text(text, path.string());
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(module_name::pipeline, ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error(module_name::pipeline, ErrorKind::io, "failed writing " + path.string());
}

inline void save_project(const std::filesystem::path& path, const ProjectFile& project) {
    write_json_file(path, to_json(project));
}

inline ProjectFile load_project(const std::filesystem::path& path) { return project_from_json(read_json_file(path)); }

/// Landmark file: {"frames": [[[x, y], ...], ...]}, one inner list per frame.
inline LandmarkSequence landmarks_from_json(const json& j) {
    using namespace detail;
    reject_unknown(j, "landmarks", {"frames"});
    const json& frames = require(j, "frames", "landmarks");
    if (!frames.is_array()) schema_error("landmarks.frames", "expected an array");
    std::vector<std::vector<Vec2>> out;
    for (std::size_t l = 0; l < frames.size(); ++l) {
        const std::string fp = "landmarks.frames[" + std::to_string(l) + "]";
        if (!frames[l].is_array()) schema_error(fp, "expected an array of points");
        std::vector<Vec2> pts;
        for (std::size_t k = 0; k < frames[l].size(); ++k) pts.push_back(point_at(frames[l][k], fp + "[" + std::to_string(k) + "]"));
        if (!out.empty() && pts.size() != out.front().size()) schema_error(fp, "point count differs from frame 0");
        out.push_back(std::move(pts));
    }
    return LandmarkSequence(std::move(out));
}

inline json landmarks_to_json(const LandmarkSequence& seq) {
    json frames = json::array();
    for (const auto& f : seq.frames()) {
        json pts = json::array();
        for (const auto& p : f) pts.push_back(detail::point_json(p));
        frames.push_back(std::move(pts));
    }
    return json{{"frames", std::move(frames)}};
}

}  // namespace motionfield::io
