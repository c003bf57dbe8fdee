#pragma once

// httplib bindings for the remote wire contract: a client-side Transport and
// a helper that serves any Transport (typically FakeAdsServer) over HTTP.

#include <mutex>
#include <string>

#include <httplib.h>

#include "bibcurate/remote.hpp"

namespace bibcurate {

class HttpTransport : public Transport {
 public:
  /// `base_url` like "https://api.adsabs.harvard.edu" or "http://127.0.0.1:8080".
  explicit HttpTransport(const std::string& base_url, std::time_t timeout_s = 30) : client_(base_url) {
    if (!client_.is_valid()) throw Error(Errc::InvalidArgument, "unusable base URL " + base_url);
    client_.set_connection_timeout(timeout_s);
    client_.set_read_timeout(timeout_s);
  }

  HttpResponse send(const HttpRequest& req) override {
    httplib::Headers headers(req.headers.begin(), req.headers.end());
    httplib::Params params(req.params.begin(), req.params.end());
    httplib::Result res;
    if (req.method == "GET") {
      res = client_.Get(req.path, params, headers);
    } else if (req.method == "POST") {
      std::string path = params.empty() ? req.path : req.path + "?" + httplib::detail::params_to_query_str(params);
      auto ct = req.headers.find("Content-Type");
      res = client_.Post(path, headers, req.body, ct == req.headers.end() ? "application/json" : ct->second);
    } else {
      throw Error(Errc::InvalidArgument, "unsupported method " + req.method);
    }
    if (!res) throw Error(Errc::TransientFailure, "HTTP " + req.method + " " + req.path + ": " + httplib::to_string(res.error()));
    HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    for (const auto& [k, v] : res->headers) out.headers[k] = v;
    return out;
  }

 private:
  httplib::Client client_;
};

/// Routes every /v1/... request on `server` to `backend`. Calls into the
/// backend are serialized.
inline void mount_transport(httplib::Server& server, Transport& backend, std::mutex& backend_mutex) {
  auto handler = [&backend, &backend_mutex](const httplib::Request& in, httplib::Response& out) {
    HttpRequest req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.params[k] = v;
    for (const auto& [k, v] : in.headers) req.headers[k] = v;
    req.body = in.body;
    HttpResponse resp;
    {
      std::lock_guard lk(backend_mutex);
      resp = backend.send(req);
    }
    out.status = resp.status;
    std::string type = "application/json";
    for (const auto& [k, v] : resp.headers) {
      if (k == "Content-Type") type = v;
      else out.set_header(k, v);
    }
    out.set_content(resp.body, type);
  };
  server.Get(R"(/v1/.*)", handler);
  server.Post(R"(/v1/.*)", handler);
}

}  // namespace bibcurate
