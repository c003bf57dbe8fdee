#pragma once

// Triage API. TriageService maps (method, path, params, body) to a status
// and a JSON body without knowing about sockets; service_http.hpp mounts it
// on an httplib server.
//
//   GET  /api/queue?limit=N      next N undecided hits with highlights and tag hints
//   POST /api/decision           {bibcode, verdict, tags, note, expectedSeq}
//   POST /api/undo               {bibcode, expectedSeq}
//   GET  /api/stats              metrics table and year histogram of the SETI library
//   POST /api/search             {q, explain}
//   GET  /api/record/{bibcode}
//   GET  /api/digest/{YYYY-MM}
//
// Errors come back as {"error": <code>, "message": <text>} with 400, 404 or
// 409. Writes are serialized; reads run concurrently.

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "bibcurate/curation.hpp"
#include "bibcurate/index.hpp"
#include "bibcurate/metrics.hpp"
#include "bibcurate/query.hpp"

namespace bibcurate {

struct ServiceRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> params;
  std::string body;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceOptions {
  std::string curator = "local";
  std::size_t default_queue_limit = 20;
  // Called under the write lock after every successful decision or undo,
  // before the response is produced (for example to save the catalog).
  std::function<void()> on_change;
};

inline nlohmann::json to_json(const MatchTriple& m) {
  nlohmann::json j{{"field", phys_field_name(m.field)}, {"term", m.term}, {"position", m.position}, {"span", m.span}};
  if (!m.note.empty()) j["note"] = m.note;
  return j;
}

inline nlohmann::json to_json(const Decision& d) {
  nlohmann::json tags = nlohmann::json::array();
  for (auto t : d.reasons) tags.push_back(tag_name(t));
  return {{"seq", d.seq},         {"bibcode", d.bibcode},    {"verdict", verdict_name(d.verdict)},
          {"tags", tags},         {"note", d.note},          {"curator", d.curator},
          {"decidedAt", format_utc(d.decided_at)}, {"month", d.month_stamp}};
}

class TriageService {
 public:
  TriageService(const Index& index, Curator& curator, QueryNode query, ServiceOptions opts = {})
      : index_(index), curator_(curator), query_(std::move(query)), opts_(std::move(opts)) {}

  ServiceResponse handle(const ServiceRequest& req) {
    try {
      return route(req);
    } catch (const Error& e) {
      return fail(status_for(e.code()), std::string(errc_name(e.code())), e.what());
    } catch (const nlohmann::json::exception& e) {
      return fail(400, "MalformedBody", e.what());
    }
  }

  std::uint64_t seq() const {
    std::shared_lock lk(mu_);
    return curator_.log().last_seq();
  }

 private:
  static int status_for(Errc c) {
    switch (c) {
      case Errc::NothingToUndo: return 404;
      case Errc::UnknownLibraryKey: return 404;
      case Errc::IoFailure: return 500;
      default: return 400;
    }
  }

  static ServiceResponse fail(int status, std::string code, std::string message) {
    return {status, {{"error", std::move(code)}, {"message", std::move(message)}}};
  }

  ServiceResponse route(const ServiceRequest& req) {
    const std::string& p = req.path;
    auto tail = [&](std::string_view prefix) -> std::optional<std::string> {
      if (p.size() > prefix.size() && p.compare(0, prefix.size(), prefix) == 0) return p.substr(prefix.size());
      return std::nullopt;
    };
    if (req.method == "GET") {
      if (p == "/api/queue") return queue(req);
      if (p == "/api/stats") return stats();
      if (auto b = tail("/api/record/")) return record(*b);
      if (auto m = tail("/api/digest/")) return digest(*m);
    } else if (req.method == "POST") {
      if (p == "/api/decision") return decision(body_of(req));
      if (p == "/api/undo") return undo(body_of(req));
      if (p == "/api/search") return search(body_of(req));
    }
    return fail(404, "NotFound", req.method + " " + p);
  }

  static nlohmann::json body_of(const ServiceRequest& req) {
    auto j = nlohmann::json::parse(req.body.empty() ? "{}" : req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::InvalidArgument, "body must be a JSON object");
    return j;
  }

  static std::string text_field(const nlohmann::json& j, const char* key, bool required) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw Error(Errc::InvalidArgument, std::string("missing '") + key + "'");
      return {};
    }
    if (!it->is_string()) throw Error(Errc::InvalidArgument, std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  }

  // Skipped records stay in the hit list but are not offered again.
  std::vector<std::string> pending(const SearchResult& r) const {
    std::vector<std::string> out;
    for (const auto& b : r.hits)
      if (!curator_.effective(b)) out.push_back(b);
    return out;
  }

  ServiceResponse queue(const ServiceRequest& req) {
    std::size_t limit = opts_.default_queue_limit;
    if (auto it = req.params.find("limit"); it != req.params.end()) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(it->second, &used);
        if (used != it->second.size() || v < 0) throw std::invalid_argument("limit");
        limit = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw Error(Errc::InvalidArgument, "limit must be a non-negative integer");
      }
    }
    std::shared_lock lk(mu_);
    auto result = evaluate(query_, index_, curator_.catalog(), EvalOptions{true});
    auto todo = pending(result);
    nlohmann::json items = nlohmann::json::array();
    for (std::size_t i = 0; i < todo.size() && i < limit; ++i) {
      const BibRecord& r = *index_.corpus().find(todo[i]);
      const auto& why = result.explanations->at(todo[i]);
      nlohmann::json item = record_json(r);
      item["highlights"] = nlohmann::json::array();
      for (const auto& m : why) item["highlights"].push_back(to_json(m));
      item["hints"] = nlohmann::json::array();
      for (const auto& h : suggest_tags(r, why))
        item["hints"].push_back({{"tag", tag_name(h.tag)}, {"score", h.score}, {"cues", h.cues}});
      items.push_back(std::move(item));
    }
    return {200,
            {{"seq", curator_.log().last_seq()},
             {"pending", todo.size()},
             {"skipped", result.hits.size() - todo.size()},
             {"decidedThisSession", decided_},
             {"converged", result.hits.empty()},
             {"items", items}}};
  }

  std::optional<ServiceResponse> stale(const nlohmann::json& body) const {
    auto it = body.find("expectedSeq");
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_unsigned()) throw Error(Errc::InvalidArgument, "expectedSeq must be a non-negative integer");
    auto cur = curator_.log().last_seq();
    if (it->get<std::uint64_t>() == cur) return std::nullopt;
    auto r = fail(409, "StaleSequence", "expected seq " + std::to_string(it->get<std::uint64_t>()) +
                                            " but the log is at " + std::to_string(cur));
    r.body["seq"] = cur;
    return r;
  }

  ServiceResponse decision(const nlohmann::json& body) {
    std::string bibcode = text_field(body, "bibcode", true);
    auto verdict = verdict_from_name(text_field(body, "verdict", true));
    if (!verdict) throw Error(Errc::InvalidDecision, "unknown verdict");
    Proposal p;
    p.verdict = *verdict;
    p.note = text_field(body, "note", false);
    if (auto it = body.find("tags"); it != body.end() && !it->is_null()) {
      if (!it->is_array()) throw Error(Errc::InvalidDecision, "tags must be a list");
      for (const auto& t : *it) {
        auto tag = t.is_string() ? tag_from_name(t.get<std::string>()) : std::nullopt;
        if (!tag) throw Error(Errc::InvalidDecision, "unknown tag " + t.dump());
        p.reasons.insert(*tag);
      }
    }
    std::string who = body.contains("curator") ? text_field(body, "curator", false) : opts_.curator;
    if (who.empty()) who = opts_.curator;

    std::unique_lock lk(mu_);
    if (!index_.corpus().find(bibcode)) return fail(404, "UnknownBibcode", bibcode);
    if (auto r = stale(body)) return *r;
    Decision d = curator_.decide(bibcode, p, who);
    ++decided_;
    if (opts_.on_change) opts_.on_change();
    return {200, {{"seq", d.seq}, {"decision", to_json(d)}, {"membership", membership(bibcode)}}};
  }

  ServiceResponse undo(const nlohmann::json& body) {
    std::string bibcode = text_field(body, "bibcode", true);
    std::unique_lock lk(mu_);
    if (!index_.corpus().find(bibcode)) return fail(404, "UnknownBibcode", bibcode);
    if (auto r = stale(body)) return *r;
    Decision undone = curator_.undo(opts_.curator, bibcode);
    if (decided_) --decided_;
    if (opts_.on_change) opts_.on_change();
    const Decision* now = curator_.effective(bibcode);
    return {200,
            {{"seq", curator_.log().last_seq()},
             {"undone", to_json(undone)},
             {"effective", now ? to_json(*now) : nlohmann::json(nullptr)},
             {"membership", membership(bibcode)}}};
  }

  std::string membership(const std::string& bibcode) const {
    if (curator_.catalog().library(curator_.seti_key()).members.count(bibcode)) return "seti";
    if (curator_.catalog().library(curator_.not_seti_key()).members.count(bibcode)) return "not-seti";
    return "none";
  }

  ServiceResponse stats() {
    std::shared_lock lk(mu_);
    const MemberSet& seti = curator_.catalog().library(curator_.seti_key()).members;
    auto rep = citation_table(seti, index_.corpus());
    return {200,
            {{"seq", curator_.log().last_seq()},
             {"library", curator_.seti_key()},
             {"metrics", to_json(rep)},
             {"histogram", to_json(year_histogram(seti, index_.corpus()))},
             {"notSetiCount", curator_.catalog().library(curator_.not_seti_key()).members.size()}}};
  }

  ServiceResponse search(const nlohmann::json& body) {
    QueryNode q = parse(text_field(body, "q", true));
    bool explain = body.value("explain", false);
    std::shared_lock lk(mu_);
    auto r = evaluate(q, index_, curator_.catalog(), EvalOptions{explain});
    nlohmann::json out{{"total", r.total}, {"hits", r.hits}};
    if (r.explanations) {
      nlohmann::json ex = nlohmann::json::object();
      for (const auto& [b, ms] : *r.explanations) {
        ex[b] = nlohmann::json::array();
        for (const auto& m : ms) ex[b].push_back(to_json(m));
      }
      out["explanations"] = ex;
    }
    return {200, out};
  }

  nlohmann::json record_json(const BibRecord& r) const {
    nlohmann::json j = to_json(r);
    const Decision* d = curator_.effective(r.bibcode);
    j["decision"] = d ? to_json(*d) : nlohmann::json(nullptr);
    return j;
  }

  ServiceResponse record(const std::string& bibcode) {
    std::shared_lock lk(mu_);
    const BibRecord* r = index_.corpus().find(bibcode);
    if (!r) return fail(404, "UnknownBibcode", bibcode);
    auto j = record_json(*r);
    j["membership"] = membership(bibcode);
    return {200, j};
  }

  ServiceResponse digest(const std::string& month) {
    if (!is_month_stamp(month)) throw Error(Errc::InvalidArgument, "month must be YYYY-MM: " + month);
    std::shared_lock lk(mu_);
    Digest d = render_digest(curator_, index_.corpus(), month);
    return {200, {{"month", month}, {"entries", d.entries}, {"text", d.text}, {"warnings", d.warnings}}};
  }

  const Index& index_;
  Curator& curator_;
  QueryNode query_;
  ServiceOptions opts_;
  mutable std::shared_mutex mu_;
  std::size_t decided_ = 0;
};

}  // namespace bibcurate
