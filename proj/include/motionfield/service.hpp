#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "motionfield/flow_color.hpp"
#include "motionfield/io/flo.hpp"
#include "motionfield/io/png.hpp"
#include "motionfield/io/project_json.hpp"
#include "motionfield/pipeline.hpp"

// After Eigen: <resolv.h> (via httplib) defines a `_res` macro.
#include <httplib.h>

namespace motionfield {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path asset_root = ".";  ///< project asset paths resolve against this
    std::optional<std::filesystem::path> static_dir;
};

/// In-memory project store keyed by id. Entries are immutable snapshots;
/// writers replace them under the store lock.
class ProjectStore {
public:
    struct Entry {
        io::ProjectFile file;
        std::shared_ptr<const Project> project;
        std::shared_ptr<const PreviewResult> preview;
    };

    std::string create(Entry e) {
        std::unique_lock lock(mutex_);
        const std::string id = "p" + std::to_string(++counter_);
        entries_.emplace(id, std::move(e));
        return id;
    }

    std::optional<Entry> get(const std::string& id) const {
        std::shared_lock lock(mutex_);
        auto it = entries_.find(id);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    bool replace(const std::string& id, Entry e) {
        std::unique_lock lock(mutex_);
        auto it = entries_.find(id);
        if (it == entries_.end()) return false;
        it->second = std::move(e);
        return true;
    }

    /// Stores a preview only if the project was not replaced meanwhile.
    bool set_preview(const std::string& id, const std::shared_ptr<const Project>& computed_from,
                     std::shared_ptr<const PreviewResult> preview) {
        std::unique_lock lock(mutex_);
        auto it = entries_.find(id);
        if (it == entries_.end() || it->second.project != computed_from) return false;
        it->second.preview = std::move(preview);
        return true;
    }

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, Entry> entries_;
    unsigned long counter_ = 0;
};

inline int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::not_found: return 404;
        case ErrorKind::convergence: return 422;
        case ErrorKind::contract: return 500;
        default: return 400;
    }
}

/// HTTP surface for the studio front end.
class Service {
public:
    explicit Service(ServiceConfig config) : config_(std::move(config)) { routes(); }

    httplib::Server& server() { return server_; }
    ProjectStore& store() { return store_; }

    /// Binds and serves until stop(); returns false if the port is unavailable.
    bool listen() { return server_.listen(config_.host, config_.port); }
    int bind_to_any_port() { return server_.bind_to_any_port(config_.host); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }

private:
    using Request = httplib::Request;
    using Response = httplib::Response;

    static void send_json(Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void send_error(Response& res, int status, const std::string& module, const std::string& kind,
                           const std::string& message) {
        send_json(res, status, {{"error", message}, {"module", module}, {"kind", kind}});
    }

    template <typename Handler>
    auto guarded(Handler handler) {
        return [handler](const Request& req, Response& res) {
            try {
                handler(req, res);
            } catch (const Error& e) {
                send_error(res, http_status(e.kind()), e.module(), std::string(to_string(e.kind())), e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, module_name::pipeline, "internal", e.what());
            }
        };
    }

    ProjectStore::Entry load_entry(const std::string& body) const {
        io::ProjectFile file = io::project_from_json(io::parse_json_text(body, "request body"));
        auto project = std::make_shared<Project>(load_project_assets(file, config_.asset_root));
        project->validate();
        return {std::move(file), std::move(project), nullptr};
    }

    ProjectStore::Entry require_entry(const std::string& id) const {
        auto e = store_.get(id);
        if (!e) throw Error(module_name::pipeline, ErrorKind::not_found, "unknown project id '" + id + "'");
        return *e;
    }

    static std::shared_ptr<const PreviewResult> require_preview(const ProjectStore::Entry& e) {
        if (!e.preview) throw Error(module_name::pipeline, ErrorKind::not_found, "no preview computed yet");
        return e.preview;
    }

    static int frame_index(const std::string& text, int count) {
        int i = -1;
        try {
            i = std::stoi(text);
        } catch (const std::exception&) {
        }
        if (i < 0 || i >= count) throw Error(module_name::pipeline, ErrorKind::not_found, "frame index out of range");
        return i;
    }

    void routes() {
        server_.Get("/healthz", [](const Request&, Response& res) { send_json(res, 200, {{"status", "ok"}}); });

        server_.Post("/projects", guarded([this](const Request& req, Response& res) {
            const std::string id = store_.create(load_entry(req.body));
            res.set_header("Location", "/projects/" + id);
            send_json(res, 201, {{"id", id}});
        }));

        server_.Get(R"(/projects/([^/]+))", guarded([this](const Request& req, Response& res) {
            send_json(res, 200, io::to_json(require_entry(req.matches[1]).file));
        }));

        server_.Put(R"(/projects/([^/]+))", guarded([this](const Request& req, Response& res) {
            const std::string id = req.matches[1];
            require_entry(id);
            auto entry = load_entry(req.body);
            if (!store_.replace(id, entry)) {
                throw Error(module_name::pipeline, ErrorKind::not_found, "unknown project id '" + id + "'");
            }
            send_json(res, 200, io::to_json(entry.file));
        }));

        server_.Post(R"(/projects/([^/]+)/preview)", guarded([this](const Request& req, Response& res) {
            const std::string id = req.matches[1];
            const auto entry = require_entry(id);
            auto preview = std::make_shared<const PreviewResult>(run_pipeline(*entry.project));
            store_.set_preview(id, entry.project, preview);
            nlohmann::json frames = nlohmann::json::array();
            nlohmann::json flows = nlohmann::json::array();
            for (std::size_t i = 0; i < preview->frames.size(); ++i) {
                frames.push_back("/projects/" + id + "/frames/" + std::to_string(i) + ".png");
            }
            for (int i = 0; i < preview->dense_flow.frame_count(); ++i) {
                flows.push_back("/projects/" + id + "/flow/" + std::to_string(i) + ".flo");
            }
            send_json(res, 200, {{"frames", frames}, {"flow", flows}, {"diagnostics", diagnostics_to_json(preview->diagnostics)}});
        }));

        server_.Get(R"(/projects/([^/]+)/frames/(\d+)\.png)", guarded([this](const Request& req, Response& res) {
            const auto preview = require_preview(require_entry(req.matches[1]));
            const int i = frame_index(req.matches[2], static_cast<int>(preview->frames.size()));
            const auto bytes = io::encode_png(preview->frames[static_cast<std::size_t>(i)]);
            res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
        }));

        server_.Get(R"(/projects/([^/]+)/flow/(\d+)\.flo)", guarded([this](const Request& req, Response& res) {
            const auto preview = require_preview(require_entry(req.matches[1]));
            const int i = frame_index(req.matches[2], preview->dense_flow.frame_count());
            const auto bytes = io::encode_flo(preview->dense_flow.frame(i));
            res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
        }));

        server_.Get(R"(/projects/([^/]+)/flow/(\d+)\.png)", guarded([this](const Request& req, Response& res) {
            const auto preview = require_preview(require_entry(req.matches[1]));
            const int i = frame_index(req.matches[2], preview->dense_flow.frame_count());
            const auto bytes = io::encode_png(flow_to_color(preview->dense_flow.frame(i)));
            res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
        }));

        if (config_.static_dir) server_.set_mount_point("/", config_.static_dir->string());
    }

    ServiceConfig config_;
    httplib::Server server_;
    ProjectStore store_;
};

}  // namespace motionfield
