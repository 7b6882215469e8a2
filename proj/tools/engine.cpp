// engine: command-line front end for the motion-field engine.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "motionfield/motionfield.hpp"
#include "motionfield/service.hpp"

namespace fs = std::filesystem;
using namespace motionfield;

namespace {

enum ExitCode { ok = 0, validation = 2, solver = 3, io_failure = 4 };

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::convergence: return solver;
        case ErrorKind::io: return io_failure;
        default: return validation;
    }
}

std::string numbered(const char* stem, int i, const char* ext) {
    std::ostringstream s;
    s << stem << '_' << std::setw(3) << std::setfill('0') << i << ext;
    return s.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(module_name::pipeline, ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

int run_preview(const fs::path& project_path, const fs::path& out, bool gif, bool flow_viz) {
    const io::ProjectFile file = io::load_project(project_path);
    const Project project = load_project_assets(file, project_path.parent_path());
    const PreviewResult result = run_pipeline(project);

    ensure_dir(out);
    for (std::size_t i = 0; i < result.frames.size(); ++i) {
        io::write_png(out / numbered("frame", static_cast<int>(i), ".png"), result.frames[i]);
    }
    for (int f = 0; f < result.dense_flow.frame_count(); ++f) {
        io::write_flo(out / numbered("flow", f, ".flo"), result.dense_flow.frame(f));
        if (flow_viz) io::write_png(out / numbered("flow", f, ".png"), flow_to_color(result.dense_flow.frame(f)));
    }
    if (gif) io::write_gif(out / "preview.gif", result.frames);
    io::write_json_file(out / "diagnostics.json", diagnostics_to_json(result.diagnostics));
    std::cout << "wrote " << result.frames.size() << " frames to " << out.string() << '\n';
    return ok;
}

int run_densify(const fs::path& hints_path, const fs::path& out) {
    const io::HintsDocument doc = io::hints_from_json(io::read_json_file(hints_path));
    const DensifierRegistry registry(doc.config);
    const FlowField flow = densify_interface(doc.hints, doc.backend, registry);
    ensure_dir(out);
    for (int f = 0; f < flow.frame_count(); ++f) io::write_flo(out / numbered("flow", f, ".flo"), flow.frame(f));
    std::cout << "wrote " << flow.frame_count() << " flow frames to " << out.string() << '\n';
    return ok;
}

int run_schedule(int frames, int window, int stride) {
    const GroupSchedule s = build_schedule(frames, window, stride);
    std::cout << "groups:\n";
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        std::cout << "  " << g << ": [" << s.groups[g].start << ".." << s.groups[g].end() - 1 << "]\n";
    }
    std::cout << "weights (frame: per-group):\n";
    const auto w = frame_weights(s);
    for (std::size_t f = 0; f < w.size(); ++f) {
        std::cout << "  " << f << ":";
        for (double v : w[f]) std::cout << ' ' << v;
        std::cout << '\n';
    }
    return ok;
}

int run_serve(const std::string& host, int port, const std::string& static_dir, const fs::path& root) {
    ServiceConfig config;
    config.host = host;
    config.port = port;
    config.asset_root = root;
    if (!static_dir.empty()) config.static_dir = static_dir;
    Service service(config);
    std::cout << "listening on http://" << host << ':' << port << '\n' << std::flush;
    if (!service.listen()) {
        std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
        return io_failure;
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motion-field authoring engine"};
    app.require_subcommand(1);

    fs::path project_path, preview_out;
    bool gif = false, flow_viz = false;
    auto* preview = app.add_subcommand("preview", "Render a flow-warped preview of a project");
    preview->add_option("project", project_path, "project JSON")->required();
    preview->add_option("--out", preview_out, "output directory")->required();
    preview->add_flag("--gif", gif, "also write preview.gif");
    preview->add_flag("--flow-viz", flow_viz, "also write colour-coded flow PNGs");

    fs::path hints_path, flo_out;
    auto* dens = app.add_subcommand("densify", "Densify a sparse-hint document into .flo files");
    dens->add_option("hints", hints_path, "hints JSON")->required();
    dens->add_option("--out", flo_out, "output directory for .flo files")->required();

    int frames = 0, window = 14, stride = 7;
    auto* sched = app.add_subcommand("schedule", "Print overlapping generation windows and frame weights");
    sched->add_option("--frames", frames, "total frame count")->required();
    sched->add_option("--window", window, "window length")->capture_default_str();
    sched->add_option("--stride", stride, "window stride")->capture_default_str();

    int port = 8080;
    std::string host = "127.0.0.1", static_dir;
    fs::path root = ".";
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--port", port, "TCP port")->capture_default_str();
    serve->add_option("--host", host, "bind address")->capture_default_str();
    serve->add_option("--static", static_dir, "directory of UI assets served at /");
    serve->add_option("--root", root, "directory project asset paths are resolved against")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : validation;
    }

    try {
        if (*preview) return run_preview(project_path, preview_out, gif, flow_viz);
        if (*dens) return run_densify(hints_path, flo_out);
        if (*sched) return run_schedule(frames, window, stride);
        if (*serve) return run_serve(host, port, static_dir, root);
    } catch (const Error& e) {
        std::cerr << "error [" << e.module() << '/' << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io_failure;
    }
    return ok;
}
