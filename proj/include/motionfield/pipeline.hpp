#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "motionfield/compose.hpp"
#include "motionfield/densify.hpp"
#include "motionfield/hints.hpp"
#include "motionfield/io/project_json.hpp"
#include "motionfield/io/png.hpp"
#include "motionfield/scheduler.hpp"
#include "motionfield/warp.hpp"

namespace motionfield {

/// Fully loaded project: every spatial input shares the reference image size.
struct Project {
    ImageFrame reference;
    std::vector<Trajectory> trajectories;
    std::vector<RegionMask> brush_masks;
    std::optional<LandmarkSequence> landmarks;
    std::optional<CameraParams> camera;
    int frames = 2;  ///< L, including the reference frame
    DensifyConfig densify;
    int window = 14;
    int stride = 7;

    void validate() const {
        const auto fail = [](const std::string& m) { throw Error(module_name::pipeline, ErrorKind::parameter, m); };
        reference.validate();
        if (reference.height() < 1 || reference.width() < 1) fail("reference image is empty");
        if (frames < 2) fail("L must be >= 2");
        for (const auto& m : brush_masks) {
            if (m.height() != reference.height() || m.width() != reference.width()) {
                fail("brush mask size differs from the reference image");
            }
        }
        for (const auto& t : trajectories) {
            if (t.points.size() < 2) fail("trajectory needs at least 2 points");
        }
        if (landmarks && landmarks->frame_count() != frames) {
            fail("landmark sequence has " + std::to_string(landmarks->frame_count()) + " frames, project L is " +
                 std::to_string(frames));
        }
        if (window < 1 || stride < 1 || stride > window) fail("schedule needs window >= 1 and 1 <= stride <= window");
        densify.validate();
    }
};

struct RegionDiagnostics {
    std::string region;  ///< "mask[i]" or "background"
    int trajectories = 0;
    int landmarks = 0;
    int hints = 0;
    double max_residual = 0.0;
    int max_iterations = 0;
};

struct PreviewDiagnostics {
    int collisions = 0;
    int clamped = 0;
    std::vector<RegionDiagnostics> regions;
    std::vector<int> hole_pixels;        ///< per rendered frame 1..L-1
    std::vector<double> mean_coverage;   ///< per rendered frame 1..L-1
    std::vector<FrameWindow> schedule;   ///< generation windows for L frames
};

struct PreviewResult {
    std::vector<ImageFrame> frames;
    FlowField dense_flow;
    PreviewDiagnostics diagnostics;
};

/// Motion from trajectories and landmarks assigned to one brush region.
struct RegionControls {
    std::vector<Trajectory> trajectories;
    std::vector<int> landmark_ids;
};

/// Index of the first brush mask containing `p` (rounded), or masks.size().
inline std::size_t region_of(Vec2 p, const std::vector<RegionMask>& masks) {
    for (std::size_t i = 0; i < masks.size(); ++i) {
        if (covers(masks[i], p)) return i;
    }
    return masks.size();
}

/// Sparse hints for one region: trajectory hints, then landmark hints on top.
inline std::optional<SparseHints> region_hints(const RegionControls& controls, const Project& project) {
    const int h = project.reference.height();
    const int w = project.reference.width();
    std::optional<SparseHints> hints;
    if (!controls.trajectories.empty()) {
        hints = sparse_from_trajectories(controls.trajectories, project.frames, h, w);
    }
    if (!controls.landmark_ids.empty()) {
        std::vector<std::vector<Vec2>> sub(static_cast<std::size_t>(project.frames));
        for (int l = 0; l < project.frames; ++l) {
            for (int k : controls.landmark_ids) sub[static_cast<std::size_t>(l)].push_back(project.landmarks->frame(l)[static_cast<std::size_t>(k)]);
        }
        SparseHints lm = sparse_from_landmarks(LandmarkSequence(std::move(sub)), h, w);
        if (hints) overlay_hints(*hints, lm); else hints = std::move(lm);
    }
    return hints;
}

/// Renders a flow-driven preview of the project.
///
/// Trajectories and landmarks are grouped by the first brush mask their
/// start falls in (the rest form the background group). Each group's hints
/// are densified separately and the dense fields are composed with the
/// masks, earlier masks winning. A camera pattern, if any, is added on top.
/// Frame 0 is the reference; frame l is the reference forward-warped by
/// flow frame l - 1.
inline PreviewResult run_pipeline(const Project& project, const std::string& backend = DensifierRegistry::default_backend,
                                  const DensifierRegistry* registry = nullptr) {
    project.validate();
    const DensifierRegistry default_registry(project.densify);
    const DensifierRegistry& reg = registry ? *registry : default_registry;
    const int h = project.reference.height();
    const int w = project.reference.width();
    const auto& masks = project.brush_masks;

    std::vector<RegionControls> groups(masks.size() + 1);
    for (const auto& t : project.trajectories) groups[region_of(t.points.front(), masks)].trajectories.push_back(t);
    if (project.landmarks) {
        for (int k = 0; k < project.landmarks->points_per_frame(); ++k) {
            groups[region_of(project.landmarks->frame(0)[static_cast<std::size_t>(k)], masks)].landmark_ids.push_back(k);
        }
    }

    PreviewResult result;
    std::vector<FlowField> dense;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        RegionDiagnostics rd;
        rd.region = g < masks.size() ? "mask[" + std::to_string(g) + "]" : "background";
        rd.trajectories = static_cast<int>(groups[g].trajectories.size());
        rd.landmarks = static_cast<int>(groups[g].landmark_ids.size());
        const auto hints = region_hints(groups[g], project);
        if (!hints) {
            dense.emplace_back(project.frames - 1, h, w);
        } else {
            rd.hints = hints->hint_count();
            result.diagnostics.collisions += hints->collisions;
            result.diagnostics.clamped += hints->clamped;
            if (backend == DensifierRegistry::default_backend && !registry) {
                DensifyReport report;
                dense.push_back(densify(*hints, project.densify, &report));
                rd.max_residual = report.max_residual;
                rd.max_iterations = report.max_iterations;
            } else {
                dense.push_back(densify_interface(*hints, backend, reg, &project.reference));
            }
        }
        result.diagnostics.regions.push_back(std::move(rd));
    }

    FlowField flow = std::move(dense.back());
    for (std::size_t i = masks.size(); i-- > 0;) flow = brush_compose(dense[i], flow, masks[i]);
    if (project.camera) flow = flow + camera_pattern(*project.camera, project.frames, h, w);

    result.frames.push_back(project.reference);
    for (int f = 0; f < flow.frame_count(); ++f) {
        WarpResult warped = forward_warp(project.reference, flow.frame(f));
        result.diagnostics.hole_pixels.push_back(warped.hole_count());
        double cov = 0.0;
        for (double c : warped.coverage.values()) cov += c;
        result.diagnostics.mean_coverage.push_back(cov / (static_cast<double>(h) * w));
        for (double& v : warped.warped.values()) v = std::clamp(v, 0.0, 1.0);
        result.frames.emplace_back(std::move(warped.warped));
    }
    result.dense_flow = std::move(flow);

    const int window = std::min(project.window, project.frames);
    result.diagnostics.schedule = build_schedule(project.frames, window, std::min(project.stride, window)).groups;
    return result;
}

inline nlohmann::json diagnostics_to_json(const PreviewDiagnostics& d) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : d.regions) {
        regions.push_back({{"region", r.region},
                           {"trajectories", r.trajectories},
                           {"landmarks", r.landmarks},
                           {"hints", r.hints},
                           {"max_residual", r.max_residual},
                           {"max_iterations", r.max_iterations}});
    }
    nlohmann::json schedule = nlohmann::json::array();
    for (const auto& g : d.schedule) schedule.push_back({g.start, g.end() - 1});
    return {{"collisions", d.collisions},
            {"clamped", d.clamped},
            {"regions", regions},
            {"hole_pixels", d.hole_pixels},
            {"mean_coverage", d.mean_coverage},
            {"schedule", schedule}};
}

/// Resolves the asset paths of a project document against `base_dir`.
inline Project load_project_assets(const io::ProjectFile& file, const std::filesystem::path& base_dir) {
    Project p;
    p.reference = io::read_png(base_dir / file.image);
    p.trajectories = file.trajectories;
    for (const auto& m : file.masks) p.brush_masks.push_back(io::read_mask_png(base_dir / m));
    if (file.landmarks) p.landmarks = io::landmarks_from_json(io::read_json_file(base_dir / *file.landmarks));
    p.camera = file.camera;
    p.frames = file.frames;
    p.densify.lambda = file.lambda;
    p.densify.residual_tolerance = file.tolerance;
    p.window = file.window;
    p.stride = file.stride;
    return p;
}

}  // namespace motionfield
