#pragma once

// Client for an ADS-compatible remote service, plus an in-process fake that
// speaks the same wire contract.
//
// Wire contract (v1):
//   GET  /v1/search/query?q=&fl=bibcode&sort=&rows=&start=[&fq=year:A-B]
//        -> {"responseHeader":{"status":0},
//            "response":{"numFound":N,"start":S,"docs":[{"bibcode":..},..]}}
//   GET  /v1/biblib/libraries/{key}?start=&rows=
//        -> {"metadata":{"id":key,"name":..,"num_documents":N},"documents":[..]}
//   POST /v1/biblib/documents/{key}  {"bibcode":[..],"action":"add"|"remove"}
//        -> {"number_added":n} | {"number_removed":n}
// Every response carries X-RateLimit-Limit, X-RateLimit-Remaining and
// X-RateLimit-Reset (epoch seconds). Requests authenticate with
// "Authorization: Bearer <token>".

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <iterator>
#include <limits>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bibcurate/error.hpp"
#include "bibcurate/resolver.hpp"
#include "bibcurate/timeutil.hpp"

namespace bibcurate {

struct HttpRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::map<std::string, std::string> headers;
  std::string body;
};

/// The one narrow seam between the client and the network. Implementations
/// throw Error(TransientFailure) for connection-level failures.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& req) = 0;
};

inline constexpr int kMaxPageSize = 2000;

struct RemoteConfig {
  std::string base_url = "https://api.adsabs.harvard.edu";
  std::string auth_token;
  int page_size = 200;
  int max_retries = 3;
  std::vector<std::chrono::milliseconds> backoff = {std::chrono::milliseconds(500), std::chrono::seconds(2),
                                                    std::chrono::seconds(8)};
  Timestamp cache_max_age = 30 * 24 * 3600;  // 0 disables the search cache

  void validate() const {
    if (page_size < 1 || page_size > kMaxPageSize)
      throw Error(Errc::InvalidArgument, "pageSize must be in [1, 2000], got " + std::to_string(page_size));
    if (max_retries < 0) throw Error(Errc::InvalidArgument, "maxRetries must be >= 0");
  }

  /// Token for log output.
  std::string redacted_token() const { return auth_token.empty() ? "(unset)" : "****"; }
};

/// Reads the bearer token from ADS_API_TOKEN.
inline RemoteConfig remote_config_from_env(RemoteConfig base = {}) {
  if (const char* t = std::getenv("ADS_API_TOKEN")) base.auth_token = t;
  return base;
}

template <class T>
struct RemoteOutcome {
  T payload{};
  std::int64_t quota_remaining = 0;
  Timestamp quota_reset_at = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

class RemoteClient {
 public:
  RemoteClient(Transport& transport, RemoteConfig config, Clock clock = system_now, Sleeper sleeper = real_sleep)
      : transport_(transport), config_(std::move(config)), clock_(std::move(clock)), sleep_(std::move(sleeper)) {
    config_.validate();
  }

  const RemoteConfig& config() const { return config_; }

  /// All pages of a search, in remote order. `years` adds a year filter.
  RemoteOutcome<std::vector<std::string>> remote_search(const std::string& query,
                                                        std::optional<std::pair<int, int>> years = std::nullopt) {
    std::string cache_key = query;
    if (years) cache_key += "\n" + std::to_string(years->first) + "-" + std::to_string(years->second);
    if (config_.cache_max_age > 0) {
      std::lock_guard lk(mu_);
      auto it = cache_.find(cache_key);
      if (it != cache_.end() && clock_() - it->second.fetched_at < config_.cache_max_age) {
        ++cache_hits_;
        return {it->second.bibcodes, quota_remaining_.value_or(0), quota_reset_at_};
      }
    }
    std::vector<std::string> out;
    for (std::size_t start = 0;;) {
      HttpRequest req;
      req.path = "/v1/search/query";
      req.params = {{"q", query},
                    {"fl", "bibcode"},
                    {"sort", "date desc, bibcode desc"},
                    {"rows", std::to_string(config_.page_size)},
                    {"start", std::to_string(start)}};
      if (years) req.params["fq"] = "year:" + std::to_string(years->first) + "-" + std::to_string(years->second);
      auto j = call(req, "");
      const auto& resp = field(j, "response");
      const auto& docs = field(resp, "docs");
      std::size_t found = field(resp, "numFound").get<std::size_t>();
      for (const auto& d : docs) out.push_back(field(d, "bibcode").get<std::string>());
      start += docs.size();
      if (docs.empty() || start >= found) break;
    }
    if (config_.cache_max_age > 0) {
      std::lock_guard lk(mu_);
      cache_[cache_key] = {out, clock_()};
    }
    return outcome(std::move(out));
  }

  RemoteOutcome<MemberSet> pull_library(const std::string& key) {
    MemberSet out;
    for (std::size_t start = 0;;) {
      HttpRequest req;
      req.path = "/v1/biblib/libraries/" + key;
      req.params = {{"start", std::to_string(start)}, {"rows", std::to_string(config_.page_size)}};
      auto j = call(req, key);
      const auto& docs = field(j, "documents");
      std::size_t total = field(field(j, "metadata"), "num_documents").get<std::size_t>();
      for (const auto& d : docs) out.insert(d.get<std::string>());
      start += docs.size();
      if (docs.empty() || start >= total) break;
    }
    return outcome(std::move(out));
  }

  /// Number of bibcodes the server reports as newly added.
  RemoteOutcome<std::size_t> push_add(const std::string& key, const std::vector<std::string>& bibcodes) {
    return push(key, bibcodes, "add", "number_added");
  }

  RemoteOutcome<std::size_t> push_remove(const std::string& key, const std::vector<std::string>& bibcodes) {
    return push(key, bibcodes, "remove", "number_removed");
  }

  /// Intersection of two remote libraries; empty means healthy.
  RemoteOutcome<MemberSet> verify_remote_disjoint(const std::string& key_a, const std::string& key_b) {
    MemberSet a = pull_library(key_a).payload;
    MemberSet b = pull_library(key_b).payload;
    MemberSet both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(both, both.end()));
    return outcome(std::move(both));
  }

  void clear_cache() {
    std::lock_guard lk(mu_);
    cache_.clear();
  }
  std::size_t cache_hits() const { return cache_hits_; }
  std::optional<std::int64_t> quota_remaining() const { return quota_remaining_; }
  Timestamp quota_reset_at() const { return quota_reset_at_; }

 private:
  struct CacheEntry {
    std::vector<std::string> bibcodes;
    Timestamp fetched_at = 0;
  };

  RemoteOutcome<std::size_t> push(const std::string& key, const std::vector<std::string>& bibcodes,
                                  const char* action, const char* count_field) {
    // Chunked so one request never carries more than a page of bibcodes.
    std::size_t total = 0;
    for (std::size_t i = 0; i < bibcodes.size(); i += static_cast<std::size_t>(config_.page_size)) {
      auto end = std::min(bibcodes.size(), i + static_cast<std::size_t>(config_.page_size));
      HttpRequest req;
      req.method = "POST";
      req.path = "/v1/biblib/documents/" + key;
      req.headers["Content-Type"] = "application/json";
      nlohmann::json body;
      body["bibcode"] = std::vector<std::string>(bibcodes.begin() + static_cast<std::ptrdiff_t>(i),
                                                 bibcodes.begin() + static_cast<std::ptrdiff_t>(end));
      body["action"] = action;
      req.body = body.dump();
      total += field(call(req, key), count_field).get<std::size_t>();
    }
    if (config_.cache_max_age > 0) clear_cache();
    return outcome(total);
  }

  template <class T>
  RemoteOutcome<T> outcome(T payload) const {
    return {std::move(payload), std::max<std::int64_t>(0, quota_remaining_.value_or(0)), quota_reset_at_};
  }

  static const nlohmann::json& field(const nlohmann::json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw Error(Errc::ProtocolError, std::string("response lacks '") + name + "'");
    return j.at(name);
  }

  // One request at a time, served in ticket order.
  nlohmann::json call(HttpRequest req, const std::string& library_key) {
    std::uint64_t ticket;
    {
      std::unique_lock lk(mu_);
      ticket = next_ticket_++;
      turn_.wait(lk, [&] { return serving_ == ticket; });
    }
    struct Release {
      RemoteClient* self;
      ~Release() {
        {
          std::lock_guard lk(self->mu_);
          ++self->serving_;
        }
        self->turn_.notify_all();
      }
    } release{this};

    req.headers["Authorization"] = "Bearer " + config_.auth_token;
    for (int attempt = 0;; ++attempt) {
      if (quota_remaining_ && *quota_remaining_ <= 0 && clock_() < quota_reset_at_)
        throw Error(Errc::QuotaExhausted, "rate limit exhausted until " + format_utc(quota_reset_at_));
      std::optional<HttpResponse> resp;
      std::string failure;
      try {
        resp = transport_.send(req);
      } catch (const Error& e) {
        if (e.code() != Errc::TransientFailure) throw;
        failure = e.what();
      }
      if (resp) {
        note_quota(*resp);
        if (resp->status >= 200 && resp->status < 300) {
          try {
            return nlohmann::json::parse(resp->body);
          } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ProtocolError, std::string("invalid JSON from server: ") + e.what());
          }
        }
        if (resp->status == 401 || resp->status == 403)
          throw Error(Errc::AuthFailure, "server rejected token " + config_.redacted_token());
        if (resp->status == 429)
          throw Error(Errc::QuotaExhausted, "rate limit exhausted until " + format_utc(quota_reset_at_));
        if (resp->status == 404 && !library_key.empty())
          throw Error(Errc::UnknownRemoteLibrary, library_key);
        if (resp->status < 500)
          throw Error(Errc::ProtocolError, req.path + " returned HTTP " + std::to_string(resp->status));
        failure = req.path + " returned HTTP " + std::to_string(resp->status);
      }
      if (attempt >= config_.max_retries)
        throw Error(Errc::TransientFailure, failure + " (after " + std::to_string(attempt + 1) + " attempts)");
      const auto& b = config_.backoff;
      sleep_(b.empty() ? std::chrono::milliseconds(0) : b[std::min<std::size_t>(attempt, b.size() - 1)]);
    }
  }

  void note_quota(const HttpResponse& r) {
    auto get = [&](const char* h) -> std::optional<std::int64_t> {
      auto it = r.headers.find(h);
      if (it == r.headers.end()) return std::nullopt;
      try {
        return std::stoll(it->second);
      } catch (const std::exception&) {
        return std::nullopt;
      }
    };
    if (auto v = get("X-RateLimit-Remaining")) quota_remaining_ = std::max<std::int64_t>(0, *v);
    if (auto v = get("X-RateLimit-Reset")) quota_reset_at_ = *v;
  }

  Transport& transport_;
  RemoteConfig config_;
  Clock clock_;
  Sleeper sleep_;

  std::mutex mu_;
  std::condition_variable turn_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;

  std::optional<std::int64_t> quota_remaining_;
  Timestamp quota_reset_at_ = 0;
  std::map<std::string, CacheEntry> cache_;
  std::size_t cache_hits_ = 0;
};

/// In-process implementation of the wire contract, with quota accounting and
/// fault injection. Search results are registered per query string.
class FakeAdsServer : public Transport {
 public:
  struct Doc {
    std::string bibcode;
    int year = 0;
  };

  explicit FakeAdsServer(std::string token, Clock clock = system_now) : token_(std::move(token)), clock_(std::move(clock)) {}

  void set_search_results(const std::string& query, std::vector<Doc> docs) { searches_[query] = std::move(docs); }
  void create_library(const std::string& key, const std::string& name, MemberSet members = {}) {
    libraries_[key] = {name, std::move(members)};
  }
  const MemberSet& library(const std::string& key) const { return libraries_.at(key).members; }

  /// Quota window: `limit` requests per `window` seconds starting now.
  void set_quota(std::int64_t limit, Timestamp window) {
    limit_ = limit;
    remaining_ = limit;
    window_ = window;
    reset_at_ = clock_() + window;
  }
  /// The next `n` requests fail with `status` (e.g. 503).
  void fail_next(int n, int status = 503) {
    failures_ = n;
    failure_status_ = status;
  }

  std::size_t request_count() const { return requests_.size(); }
  const std::vector<HttpRequest>& requests() const { return requests_; }
  /// Requests that arrived while the quota was exhausted.
  std::size_t quota_violations() const { return violations_; }

  HttpResponse send(const HttpRequest& req) override {
    requests_.push_back(req);
    Timestamp now = clock_();
    if (now >= reset_at_) {
      remaining_ = limit_;
      reset_at_ = now + window_;
    }
    if (remaining_ <= 0) {
      ++violations_;
      return reply(429, error_body("rate limit exceeded"));
    }
    --remaining_;
    if (failures_ > 0) {
      --failures_;
      return reply(failure_status_, error_body("injected failure"));
    }
    auto auth = req.headers.find("Authorization");
    if (auth == req.headers.end() || auth->second != "Bearer " + token_)
      return reply(401, error_body("unauthorized"));
    return route(req);
  }

 private:
  struct RemoteLibrary {
    std::string name;
    MemberSet members;
  };

  static std::string error_body(const std::string& msg) { return nlohmann::json{{"error", msg}}.dump(); }

  HttpResponse reply(int status, std::string body) const {
    HttpResponse r;
    r.status = status;
    r.body = std::move(body);
    r.headers["Content-Type"] = "application/json";
    r.headers["X-RateLimit-Limit"] = std::to_string(limit_);
    r.headers["X-RateLimit-Remaining"] = std::to_string(std::max<std::int64_t>(0, remaining_));
    r.headers["X-RateLimit-Reset"] = std::to_string(reset_at_);
    return r;
  }

  static std::optional<std::size_t> number(const HttpRequest& req, const std::string& name, std::size_t fallback) {
    auto it = req.params.find(name);
    if (it == req.params.end()) return fallback;
    try {
      std::size_t used = 0;
      long long v = std::stoll(it->second, &used);
      if (used != it->second.size() || v < 0) return std::nullopt;
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  HttpResponse route(const HttpRequest& req) {
    static const std::string search = "/v1/search/query";
    static const std::string libs = "/v1/biblib/libraries/";
    static const std::string docs = "/v1/biblib/documents/";
    auto start = number(req, "start", 0);
    auto rows = number(req, "rows", 10);
    if (!start || !rows || *rows > static_cast<std::size_t>(kMaxPageSize))
      return reply(400, error_body("bad start/rows"));

    if (req.method == "GET" && req.path == search) {
      auto q = req.params.find("q");
      if (q == req.params.end() || q->second.empty()) return reply(400, error_body("missing q"));
      std::vector<std::string> all;
      int lo = 0, hi = 9999;
      if (auto fq = req.params.find("fq"); fq != req.params.end()) {
        if (std::sscanf(fq->second.c_str(), "year:%d-%d", &lo, &hi) != 2) return reply(400, error_body("bad fq"));
      }
      if (auto it = searches_.find(q->second); it != searches_.end())
        for (const auto& d : it->second)
          if (d.year >= lo && d.year <= hi) all.push_back(d.bibcode);
      nlohmann::json page = nlohmann::json::array();
      for (std::size_t i = *start; i < all.size() && i < *start + *rows; ++i) page.push_back({{"bibcode", all[i]}});
      nlohmann::json body = {{"responseHeader", {{"status", 0}}},
                             {"response", {{"numFound", all.size()}, {"start", *start}, {"docs", page}}}};
      return reply(200, body.dump());
    }
    if (req.method == "GET" && req.path.rfind(libs, 0) == 0) {
      auto it = libraries_.find(req.path.substr(libs.size()));
      if (it == libraries_.end()) return reply(404, error_body("no such library"));
      const auto& m = it->second.members;
      nlohmann::json page = nlohmann::json::array();
      auto b = m.begin();
      std::advance(b, std::min(*start, m.size()));
      for (std::size_t n = 0; b != m.end() && n < *rows; ++b, ++n) page.push_back(*b);
      nlohmann::json body = {{"metadata", {{"id", it->first}, {"name", it->second.name}, {"num_documents", m.size()}}},
                             {"documents", page}};
      return reply(200, body.dump());
    }
    if (req.method == "POST" && req.path.rfind(docs, 0) == 0) {
      auto it = libraries_.find(req.path.substr(docs.size()));
      if (it == libraries_.end()) return reply(404, error_body("no such library"));
      nlohmann::json in = nlohmann::json::parse(req.body, nullptr, false);
      if (in.is_discarded() || !in.contains("bibcode") || !in["bibcode"].is_array() || !in.contains("action"))
        return reply(400, error_body("bad body"));
      std::string action = in["action"].is_string() ? in["action"].get<std::string>() : "";
      if (action != "add" && action != "remove") return reply(400, error_body("unknown action"));
      for (const auto& b : in["bibcode"])
        if (!b.is_string()) return reply(400, error_body("bibcodes must be strings"));
      std::size_t n = 0;
      for (const auto& b : in["bibcode"]) {
        if (action == "add") n += it->second.members.insert(b.get<std::string>()).second;
        else n += it->second.members.erase(b.get<std::string>());
      }
      return reply(200, nlohmann::json{{action == "add" ? "number_added" : "number_removed", n}}.dump());
    }
    return reply(404, error_body("no route"));
  }

  std::string token_;
  Clock clock_;
  std::map<std::string, std::vector<Doc>> searches_;
  std::map<std::string, RemoteLibrary> libraries_;
  std::int64_t limit_ = 5000;
  std::int64_t remaining_ = 5000;
  Timestamp window_ = 24 * 3600;
  Timestamp reset_at_ = std::numeric_limits<Timestamp>::max();
  int failures_ = 0;
  int failure_status_ = 503;
  std::vector<HttpRequest> requests_;
  std::size_t violations_ = 0;
};

}  // namespace bibcurate
