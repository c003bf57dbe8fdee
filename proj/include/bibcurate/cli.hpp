#pragma once

// The bibcurate command line. run() is the whole program minus main(), so
// tests can drive it in-process with captured streams.
//
// Exit codes: 0 success, 1 user error (bad flags, bad query, bad data),
// 2 environment error (I/O, corrupt state, remote failures).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bibcurate/curation.hpp"
#include "bibcurate/index.hpp"
#include "bibcurate/library.hpp"
#include "bibcurate/metrics.hpp"
#include "bibcurate/presets.hpp"
#include "bibcurate/remote.hpp"
#include "bibcurate/remote_http.hpp"
#include "bibcurate/service_http.hpp"

namespace bibcurate::cli {

/// Settings shared by all subcommands. Loaded from an optional JSON config
/// file, then overridden by flags.
struct CliConfig {
  std::string corpus;
  std::string catalog = "bibcurate.catalog";
  std::string decisions = "decisions.jsonl";
  std::string seti = "SETI";
  std::string not_seti = "NotSETI";
  std::string this_month = "This Month";
  std::string curator = "local";
  std::string preset = "preset-strict";
  RemoteConfig remote;
  std::optional<Timestamp> now;
  std::optional<std::uint64_t> seed;
};

inline void apply_config_file(CliConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot read config " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::InvalidArgument, path + ": config must be a JSON object");
  auto take = [&](const char* key, std::string& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw Error(Errc::InvalidArgument, path + ": '" + key + "' must be a string");
    dst = j[key].get<std::string>();
  };
  take("corpus", c.corpus);
  take("catalog", c.catalog);
  take("decisions", c.decisions);
  take("seti", c.seti);
  take("notSeti", c.not_seti);
  take("thisMonth", c.this_month);
  take("curator", c.curator);
  take("preset", c.preset);
  if (j.contains("remote")) {
    const auto& r = j["remote"];
    if (!r.is_object()) throw Error(Errc::InvalidArgument, path + ": 'remote' must be an object");
    c.remote.base_url = r.value("baseUrl", c.remote.base_url);
    c.remote.page_size = r.value("pageSize", c.remote.page_size);
    c.remote.max_retries = r.value("maxRetries", c.remote.max_retries);
    if (r.contains("cacheMaxAgeDays")) c.remote.cache_max_age = r["cacheMaxAgeDays"].get<Timestamp>() * 24 * 3600;
    if (r.contains("authToken"))
      throw Error(Errc::InvalidArgument, path + ": put the token in ADS_API_TOKEN, not in the config file");
  }
}

/// Lazily loaded corpus, catalog and decision log.
class Workspace {
 public:
  Workspace(CliConfig cfg, std::ostream& err) : cfg_(std::move(cfg)), err_(err) {
    if (cfg_.now) {
      Timestamp t = *cfg_.now;
      clock_ = [t] { return t; };
    } else {
      clock_ = system_now;
    }
  }

  const CliConfig& config() const { return cfg_; }
  const Clock& clock() const { return clock_; }

  const Corpus& corpus() {
    if (!corpus_) {
      if (cfg_.corpus.empty()) throw Error(Errc::InvalidArgument, "no corpus given (use --corpus)");
      corpus_ = std::make_unique<Corpus>(load_corpus_file(cfg_.corpus));
      for (const auto& w : corpus_->warnings()) err_ << "warning: " << w << "\n";
    }
    return *corpus_;
  }

  const Index& index() {
    if (!index_) index_ = std::make_unique<Index>(corpus());
    return *index_;
  }

  Catalog& catalog() {
    if (!catalog_) {
      CatalogOptions opts{clock_, cfg_.seed, cfg_.curator};
      if (std::filesystem::exists(cfg_.catalog)) {
        catalog_ = std::make_unique<Catalog>(load_snapshot(cfg_.catalog));
        catalog_->set_clock(clock_);
        catalog_->set_actor(cfg_.curator);
        if (cfg_.seed) catalog_->set_seed(*cfg_.seed);
      } else {
        catalog_ = std::make_unique<Catalog>(opts);
      }
    }
    return *catalog_;
  }

  void save_catalog() { save_snapshot(catalog(), cfg_.catalog); }

  /// Resolves a library by key or name; with `create` a missing one is made
  /// (adopting the string as key when it is key-shaped).
  std::string library(const std::string& key_or_name, bool create) {
    Catalog& cat = catalog();
    try {
      return cat.resolve(key_or_name);
    } catch (const Error& e) {
      if (!create || e.code() != Errc::UnknownLibraryKey) throw;
    }
    auto key = is_library_key(key_or_name) ? std::optional<std::string>(key_or_name) : std::nullopt;
    std::string k = cat.create_library(key_or_name, "", key);
    err_ << "created library '" << key_or_name << "' (" << k << ")\n";
    return k;
  }

  /// The SETI / NotSETI pair, created when missing.
  std::pair<std::string, std::string> pair() {
    std::string a = library(cfg_.seti, true);
    std::string b = library(cfg_.not_seti, true);
    if (a == b) throw Error(Errc::InvalidArgument, "--seti and --not-seti must name different libraries");
    return {a, b};
  }

  Curator& curator() {
    if (!curator_) {
      auto [a, b] = pair();
      log_ = std::make_unique<DecisionLog>(cfg_.decisions);
      curator_ = std::make_unique<Curator>(catalog(), *log_, a, b, clock_);
    }
    return *curator_;
  }

  /// Preset text (or a literal query), with the preset's library keys
  /// rebound onto this workspace's pair, plus an optional year filter.
  QueryNode query(const std::string& preset, const std::string& text, const std::string& year) {
    if (!preset.empty() && !text.empty()) throw Error(Errc::InvalidArgument, "give either --preset or --query");
    std::string src = text;
    if (src.empty()) {
      auto p = find_preset(preset.empty() ? cfg_.preset : preset);
      if (!p) throw Error(Errc::InvalidArgument, "unknown preset '" + (preset.empty() ? cfg_.preset : preset) + "'");
      src = std::string(p->text);
    }
    auto [a, b] = pair();
    QueryNode q = rebind_docs_refs(parse(src), std::map<std::string, std::string>{
                                                   {std::string(kExcludedA), a},
                                                   {std::string(kExcludedB), b},
                                                   {std::string(kExcludedBAlt), b},
                                               });
    if (!year.empty()) q = q::all_of({std::move(q), parse("year:" + year)});
    return q;
  }

 private:
  CliConfig cfg_;
  std::ostream& err_;
  Clock clock_;
  std::unique_ptr<Corpus> corpus_;
  std::unique_ptr<Index> index_;
  std::unique_ptr<Catalog> catalog_;
  std::unique_ptr<DecisionLog> log_;
  std::unique_ptr<Curator> curator_;
};

namespace detail {

inline std::vector<std::string> read_bibcodes(const std::vector<std::string>& args, const std::string& file) {
  std::vector<std::string> out = args;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw Error(Errc::IoFailure, "cannot read " + file);
    for (std::string line; std::getline(in, line);) {
      auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      auto e = line.find_last_not_of(" \t\r");
      out.push_back(line.substr(b, e - b + 1));
    }
  }
  return out;
}

inline void print_triple(std::ostream& out, const MatchTriple& m) {
  out << "  " << phys_field_name(m.field) << ":" << m.term << " @" << m.position;
  if (m.span != 1) out << "+" << m.span;
  if (!m.note.empty()) out << " (" << m.note << ")";
  out << "\n";
}

inline void print_report(std::ostream& out, const CycleReport& r) {
  out << "iterations: " << r.iterations << "\n"
      << "relevant: " << r.classified_relevant << "\n"
      << "irrelevant: " << r.classified_irrelevant << "\n"
      << "skipped: " << r.skipped << "\n"
      << "automatic: " << r.automatic << "\n"
      << "converged: " << (r.converged ? "yes" : "no") << "\n";
  for (const auto& b : r.residual) out << "residual: " << b << "\n";
}

inline MemberSet minus(const MemberSet& a, const MemberSet& b) { return apply_set_op(SetOp::difference, a, b); }

inline Timestamp parse_now(const std::string& s) {
  auto t = parse_utc(s);
  if (!t) throw Error(Errc::InvalidArgument, "--now must look like 2021-02-01T00:00:00Z");
  return *t;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curate a living bibliography: search, libraries, triage, metrics, digests."};
  app.name("bibcurate");
  app.require_subcommand(1);

  std::string f_config, f_corpus, f_catalog, f_decisions, f_seti, f_not_seti, f_this_month, f_curator, f_now,
      f_remote;
  std::optional<std::uint64_t> f_seed;
  app.add_option("--config", f_config, "JSON config file; flags override it");
  app.add_option("--corpus", f_corpus, "Corpus file (JSON lines)");
  app.add_option("--catalog", f_catalog, "Library catalog snapshot");
  app.add_option("--decisions", f_decisions, "Decision log (JSON lines)");
  app.add_option("--seti", f_seti, "Library receiving relevant records (name or key)");
  app.add_option("--not-seti", f_not_seti, "Library receiving irrelevant records (name or key)");
  app.add_option("--this-month", f_this_month, "Library staged for the monthly digest");
  app.add_option("--curator", f_curator, "Curator id recorded with decisions");
  app.add_option("--now", f_now, "Fixed current time, e.g. 2021-02-01T00:00:00Z");
  app.add_option("--seed", f_seed, "Seed for new library keys");
  app.add_option("--remote-url", f_remote, "Base URL of the remote bibliographic API");

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus tools")->require_subcommand(1);
  std::string load_path;
  auto* corpus_load = corpus_cmd->add_subcommand("load", "Validate a corpus and print a summary");
  corpus_load->add_option("file", load_path, "Corpus file (defaults to --corpus)");

  // search
  auto* search = app.add_subcommand("search", "Run a query against the corpus");
  std::string s_preset, s_query, s_year, s_format = "text";
  bool s_explain = false;
  search->add_option("--preset", s_preset, "preset-strict | preset-broad");
  search->add_option("--query,-q", s_query, "Query string");
  search->add_option("--year", s_year, "Restrict to a year or range, e.g. 2021 or 2019-2021");
  search->add_flag("--explain", s_explain, "Show the terms that matched");
  search->add_option("--format", s_format, "text | json")->check(CLI::IsMember({"text", "json"}));

  // lib
  auto* lib = app.add_subcommand("lib", "Manage libraries")->require_subcommand(1);
  std::string l_name, l_desc, l_key, l_lib, l_file, l_op, l_a, l_b, l_into;
  std::vector<std::string> l_bibcodes;
  auto* lib_create = lib->add_subcommand("create", "Create a library and print its key");
  lib_create->add_option("name", l_name)->required();
  lib_create->add_option("--description", l_desc);
  lib_create->add_option("--key", l_key, "Adopt an existing 22-character key");
  auto* lib_add = lib->add_subcommand("add", "Add bibcodes to a library");
  auto* lib_remove = lib->add_subcommand("remove", "Remove bibcodes from a library");
  for (auto* c : {lib_add, lib_remove}) {
    c->add_option("library", l_lib)->required();
    c->add_option("bibcodes", l_bibcodes);
    c->add_option("--file", l_file, "One bibcode per line");
  }
  auto* lib_op = lib->add_subcommand("op", "Set operation between two libraries");
  lib_op->add_option("operation", l_op, "union | intersection | difference")->required();
  lib_op->add_option("a", l_a)->required();
  lib_op->add_option("b", l_b)->required();
  lib_op->add_option("--into", l_into, "Store the result as a new library with this name");
  auto* lib_list = lib->add_subcommand("list", "List libraries, or the members of one");
  lib_list->add_option("library", l_lib);

  // update
  auto* update = app.add_subcommand("update", "Search, classify, repeat")->require_subcommand(1);
  std::string u_preset, u_query, u_year, u_batch;
  auto* update_run = update->add_subcommand("run", "Run the update cycle with the strict preset");
  auto* update_deep = update->add_subcommand("deep-scan", "Run the update cycle with the broad preset");
  for (auto* c : {update_run, update_deep}) {
    c->add_option("--preset", u_preset);
    c->add_option("--query,-q", u_query);
    c->add_option("--year", u_year);
    c->add_option("--batch", u_batch, "Decision file: bibcode, verdict, tags, note (tab separated)");
  }

  // triage
  auto* triage = app.add_subcommand("triage", "Interactive triage")->require_subcommand(1);
  std::string t_host = "127.0.0.1", t_origin = "http://localhost:5173", t_preset, t_query;
  int t_port = 8765;
  auto* triage_serve = triage->add_subcommand("serve", "Serve the triage API");
  triage_serve->add_option("--host", t_host);
  triage_serve->add_option("--port", t_port);
  triage_serve->add_option("--origin", t_origin, "Origin allowed to call the API from a browser");
  triage_serve->add_option("--preset", t_preset);
  triage_serve->add_option("--query,-q", t_query);

  // stats
  auto* stats = app.add_subcommand("stats", "Citation table and year histogram of a library");
  std::string st_lib, st_format = "markdown";
  stats->add_option("--library", st_lib, "Defaults to the SETI library");
  stats->add_option("--format", st_format)->check(CLI::IsMember({"markdown", "md", "csv", "json"}));

  // digest
  auto* digest = app.add_subcommand("digest", "Monthly digest of newly relevant records");
  std::string d_month, d_out;
  bool d_stage = false;
  digest->add_option("--month", d_month, "YYYY-MM")->required();
  digest->add_option("--out", d_out, "Write the digest here instead of standard output");
  digest->add_flag("--stage", d_stage, "Also add the records to the this-month library");

  // sync
  auto* sync = app.add_subcommand("sync", "Synchronize libraries with the remote service")->require_subcommand(1);
  std::string y_lib;
  auto* sync_pull = sync->add_subcommand("pull", "Make the local library match the remote one");
  auto* sync_push = sync->add_subcommand("push", "Make the remote library match the local one");
  for (auto* c : {sync_pull, sync_push}) c->add_option("library", y_lib)->required();
  auto* sync_verify = sync->add_subcommand("verify", "Check that the remote SETI and NotSETI are disjoint");

  // preset
  auto* preset = app.add_subcommand("preset", "Built-in search strings")->require_subcommand(1);
  std::string p_name;
  bool p_rebound = false;
  auto* preset_show = preset->add_subcommand("show", "Print a preset");
  preset_show->add_option("name", p_name)->required();
  preset_show->add_flag("--rebound", p_rebound, "Show it with library keys bound to this workspace");

  std::vector<const char*> argv{"bibcurate"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    if (code != 0) err << "\n" << app.help();
    return code == 0 ? 0 : 1;
  }

  try {
    CliConfig cfg;
    if (!f_config.empty()) apply_config_file(cfg, f_config);
    auto over = [](std::string& dst, const std::string& v) {
      if (!v.empty()) dst = v;
    };
    over(cfg.corpus, f_corpus);
    over(cfg.catalog, f_catalog);
    over(cfg.decisions, f_decisions);
    over(cfg.seti, f_seti);
    over(cfg.not_seti, f_not_seti);
    over(cfg.this_month, f_this_month);
    over(cfg.curator, f_curator);
    over(cfg.remote.base_url, f_remote);
    if (!f_now.empty()) cfg.now = detail::parse_now(f_now);
    if (f_seed) cfg.seed = f_seed;

    Workspace ws(cfg, err);

    if (corpus_load->parsed()) {
      CliConfig c2 = cfg;
      if (!load_path.empty()) c2.corpus = load_path;
      Workspace w2(c2, err);
      const Corpus& c = w2.corpus();
      std::map<std::string, std::size_t> doctypes, collections;
      int lo = 0, hi = 0;
      for (const auto& r : c.records()) {
        ++doctypes[std::string(doctype_name(r.doctype))];
        for (auto col : r.collections) ++collections[std::string(collection_name(col))];
        lo = lo ? std::min(lo, r.year) : r.year;
        hi = std::max(hi, r.year);
      }
      out << "records: " << c.size() << "\n";
      out << "warnings: " << c.warnings().size() << "\n";
      if (!c.empty()) out << "years: " << lo << "-" << hi << "\n";
      for (const auto& [k, n] : doctypes) out << "doctype " << k << ": " << n << "\n";
      for (const auto& [k, n] : collections) out << "collection " << k << ": " << n << "\n";
      out << "dangling references: " << invert_citations(c).dangling << "\n";
      return 0;
    }

    if (search->parsed()) {
      QueryNode q = ws.query(s_preset, s_query, s_year);
      auto r = evaluate(q, ws.index(), ws.catalog(), EvalOptions{s_explain});
      if (s_format == "json") {
        nlohmann::json j{{"total", r.total}, {"hits", r.hits}};
        if (r.explanations) {
          j["explanations"] = nlohmann::json::object();
          for (const auto& [b, ms] : *r.explanations)
            for (const auto& m : ms) j["explanations"][b].push_back(to_json(m));
        }
        out << j.dump(2) << "\n";
      } else {
        for (const auto& b : r.hits) {
          out << b << "\n";
          if (r.explanations)
            for (const auto& m : r.explanations->at(b)) detail::print_triple(out, m);
        }
      }
      err << r.total << " hit(s)\n";
      return 0;
    }

    if (lib_create->parsed()) {
      auto key = l_key.empty() ? std::nullopt : std::optional<std::string>(l_key);
      out << ws.catalog().create_library(l_name, l_desc, key) << "\n";
      ws.save_catalog();
      return 0;
    }
    if (lib_add->parsed() || lib_remove->parsed()) {
      std::string key = ws.catalog().resolve(l_lib);
      auto bibs = detail::read_bibcodes(l_bibcodes, l_file);
      if (lib_add->parsed()) out << "added " << ws.catalog().add_members(key, bibs) << "\n";
      else out << "removed " << ws.catalog().remove_members(key, bibs) << "\n";
      ws.save_catalog();
      return 0;
    }
    if (lib_op->parsed()) {
      auto op = set_op_from_name(l_op);
      if (!op) throw Error(Errc::InvalidArgument, "unknown operation '" + l_op + "'");
      Catalog& cat = ws.catalog();
      MemberSet result = cat.set_op(*op, cat.resolve(l_a), cat.resolve(l_b));
      if (!l_into.empty()) {
        std::string key = cat.create_library(l_into, l_op + " of " + l_a + " and " + l_b);
        cat.add_members(key, {result.begin(), result.end()});
        ws.save_catalog();
        out << key << "\t" << result.size() << "\n";
      } else {
        for (const auto& b : result) out << b << "\n";
      }
      return 0;
    }
    if (lib_list->parsed()) {
      Catalog& cat = ws.catalog();
      if (!l_lib.empty()) {
        for (const auto& b : cat.library(cat.resolve(l_lib)).members) out << b << "\n";
      } else {
        for (const auto& [k, l] : cat.libraries()) out << k << "\t" << l.name << "\t" << l.members.size() << "\n";
      }
      return 0;
    }

    if (update_run->parsed() || update_deep->parsed()) {
      std::string preset_name = u_preset;
      if (preset_name.empty() && u_query.empty() && update_deep->parsed()) preset_name = "preset-broad";
      QueryNode q = ws.query(preset_name, u_query, u_year);
      Curator& cur = ws.curator();
      if (u_batch.empty()) {
        // Nothing to decide with: report what is waiting.
        auto r = evaluate(q, ws.index(), ws.catalog());
        std::size_t waiting = 0;
        for (const auto& b : r.hits) {
          if (cur.effective(b)) continue;
          ++waiting;
          out << "pending: " << b << "\n";
        }
        out << "converged: " << (r.hits.empty() ? "yes" : "no") << "\n";
        err << waiting << " record(s) need a decision; use --batch or triage serve\n";
        ws.save_catalog();
        return 0;
      }
      std::ifstream in(u_batch);
      if (!in) throw Error(Errc::IoFailure, "cannot read " + u_batch);
      BatchSource source(parse_batch(in, u_batch));
      CycleOptions opts;
      opts.curator = cfg.curator;
      CycleReport report;
      try {
        report = run_update_cycle(q, ws.index(), cur, source, opts);
      } catch (...) {
        ws.save_catalog();  // keep the catalog in step with the decisions already logged
        throw;
      }
      ws.save_catalog();
      detail::print_report(out, report);
      return 0;
    }

    if (triage_serve->parsed()) {
      QueryNode q = ws.query(t_preset, t_query, "");
      Curator& cur = ws.curator();
      ws.save_catalog();
      ServiceOptions opts;
      opts.curator = cfg.curator;
      opts.on_change = [&ws] { ws.save_catalog(); };
      TriageService service(ws.index(), cur, q, opts);
      httplib::Server server;
      mount_service(server, service, t_origin);
      int port = t_port;
      if (port == 0) port = server.bind_to_any_port(t_host);
      else if (!server.bind_to_port(t_host, port)) port = -1;
      if (port < 0) throw Error(Errc::IoFailure, "cannot listen on " + t_host + ":" + std::to_string(t_port));
      err << "serving triage API on http://" << t_host << ":" << port << "/api/\n";
      server.listen_after_bind();
      return 0;
    }

    if (stats->parsed()) {
      std::string key = st_lib.empty() ? ws.library(cfg.seti, true) : ws.catalog().resolve(st_lib);
      const MemberSet& members = ws.catalog().library(key).members;
      auto rep = citation_table(members, ws.corpus());
      auto hist = year_histogram(members, ws.corpus());
      ReportFormat fmt = report_format_from_name(st_format);
      for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
      if (fmt == ReportFormat::structured) {
        out << nlohmann::json{{"metrics", to_json(rep)}, {"histogram", to_json(hist)}}.dump(2) << "\n";
      } else {
        out << render_report(rep, fmt) << "\n" << render_histogram(hist, fmt);
      }
      return 0;
    }

    if (digest->parsed()) {
      Curator& cur = ws.curator();
      Digest d = render_digest(cur, ws.corpus(), d_month);
      for (const auto& w : d.warnings) err << "warning: " << w << "\n";
      if (d_stage) {
        std::string key = ws.library(cfg.this_month, true);
        err << "staged " << stage_month(cur, key, d_month) << " record(s) in " << cfg.this_month << "\n";
        ws.save_catalog();
      }
      if (d_out.empty()) {
        out << d.text;
      } else {
        std::ofstream f(d_out, std::ios::binary);
        f << d.text;
        if (!f) throw Error(Errc::IoFailure, "cannot write " + d_out);
        err << "wrote " << d_out << "\n";
      }
      return 0;
    }

    if (sync->parsed()) {
      RemoteConfig rc = remote_config_from_env(cfg.remote);
      rc.validate();
      if (rc.auth_token.empty()) throw Error(Errc::AuthFailure, "ADS_API_TOKEN is not set");
      HttpTransport transport(rc.base_url);
      RemoteClient client(transport, rc, ws.clock());
      if (sync_verify->parsed()) {
        auto [a, b] = ws.pair();
        auto overlap = client.verify_remote_disjoint(a, b).payload;
        for (const auto& x : overlap) out << "overlap: " << x << "\n";
        out << (overlap.empty() ? "disjoint" : "not disjoint") << "\n";
        return overlap.empty() ? 0 : 1;
      }
      Catalog& cat = ws.catalog();
      std::string key = cat.resolve(y_lib);
      MemberSet local = cat.library(key).members;
      MemberSet remote = client.pull_library(key).payload;
      auto only_local = detail::minus(local, remote), only_remote = detail::minus(remote, local);
      if (sync_pull->parsed()) {
        cat.remove_members(key, {only_local.begin(), only_local.end()});
        cat.add_members(key, {only_remote.begin(), only_remote.end()});
        ws.save_catalog();
        out << "pulled " << key << ": +" << only_remote.size() << " -" << only_local.size() << "\n";
      } else {
        auto added = client.push_add(key, {only_local.begin(), only_local.end()}).payload;
        auto removed = client.push_remove(key, {only_remote.begin(), only_remote.end()}).payload;
        out << "pushed " << key << ": +" << added << " -" << removed << "\n";
      }
      return 0;
    }

    if (preset_show->parsed()) {
      auto p = find_preset(p_name);
      if (!p) throw Error(Errc::InvalidArgument, "unknown preset '" + p_name + "'");
      if (p_rebound) out << serialize(ws.query(p_name, "", "")) << "\n";
      else out << p->text << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_environment_error(e.code()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace bibcurate::cli
