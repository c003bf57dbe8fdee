#pragma once

// Serves a TriageService over HTTP. Cross-origin requests are allowed only
// from `allowed_origin` (the dev UI); same-origin and non-browser clients
// are unaffected.

#include <string>

#include <httplib.h>

#include "bibcurate/service.hpp"

namespace bibcurate {

inline void mount_service(httplib::Server& server, TriageService& service,
                          std::string allowed_origin = "http://localhost:5173") {
  auto cors = [allowed_origin](const httplib::Request& in, httplib::Response& out) {
    if (!allowed_origin.empty() && in.get_header_value("Origin") == allowed_origin) {
      out.set_header("Access-Control-Allow-Origin", allowed_origin);
      out.set_header("Vary", "Origin");
    }
  };
  auto handler = [&service, cors](const httplib::Request& in, httplib::Response& out) {
    ServiceRequest req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.params[k] = v;
    req.body = in.body;
    ServiceResponse resp = service.handle(req);
    cors(in, out);
    out.status = resp.status;
    out.set_content(resp.body.dump(), "application/json");
  };
  server.Get(R"(/api/.*)", handler);
  server.Post(R"(/api/.*)", handler);
  server.Options(R"(/api/.*)", [cors](const httplib::Request& in, httplib::Response& out) {
    cors(in, out);
    out.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    out.set_header("Access-Control-Allow-Headers", "Content-Type");
    out.status = 204;
  });
}

}  // namespace bibcurate
