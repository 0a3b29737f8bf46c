#pragma once

// Binds the api handlers to a cpp-httplib server.

#include <string>

#include <httplib.h>

#include "collider/api.hpp"

namespace collider::api {

inline void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.text(), "application/json");
}

/// Registers /api/simulate, /api/sweep, /api/dag and /healthz. When
/// `static_dir` is non-empty it is mounted at "/" for the browser bundle.
inline void register_routes(httplib::Server& server, const std::string& static_dir = {}) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/api/simulate", [](const httplib::Request& req, httplib::Response& res) {
    send(res, simulate_text(req.body));
  });
  server.Get("/api/sweep", [](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    send(res, sweep(query));
  });
  server.Get("/api/dag", [](const httplib::Request&, httplib::Response& res) { send(res, dag()); });
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  if (!static_dir.empty()) server.set_mount_point("/", static_dir);
}

}  // namespace collider::api
