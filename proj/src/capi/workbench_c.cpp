#include "workbench/workbench.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "workbench/analysis.hpp"
#include "workbench/error.hpp"
#include "workbench/lexical.hpp"
#include "workbench/orchestrator.hpp"
#include "workbench/provider.hpp"
#include "workbench/service.hpp"
#include "workbench/store.hpp"

using namespace workbench;

struct wb_store {
  std::unique_ptr<CorpusStore> store;
};

struct wb_server {
  std::unique_ptr<CorpusStore> store;
  std::unique_ptr<Service> service;
};

namespace {

static_assert(static_cast<int>(ErrorCode::Io) + 1 == WB_IO, "wb_status must mirror ErrorCode");

thread_local std::string g_last_error;

template <typename Fn>
wb_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return WB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<wb_status>(static_cast<int>(e.code()) + 1);
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return WB_MALFORMED_JSON;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return WB_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WB_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return WB_INTERNAL;
  }
}

char* dup(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void put(char** out, const std::string& text) {
  if (out == nullptr) fail(ErrorCode::InvalidArgument, "output pointer is null");
  *out = dup(text);
}

CorpusStore& need(wb_store* s) {
  if (s == nullptr || !s->store) fail(ErrorCode::InvalidArgument, "store handle is null");
  return *s->store;
}

Json options(const char* text) {
  if (text == nullptr || *text == '\0') return Json::object();
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::MalformedJson, std::string("options: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "options must be a JSON object");
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

RunManifest manifest_from(const Json& o) {
  RunManifest m = o.contains("plan") ? load_manifest(o.at("plan").get<std::string>()) : RunManifest{};
  if (o.contains("mode")) m.provider_mode = parse_provider_mode(o.at("mode").get<std::string>());
  return m;
}

std::filesystem::path transcripts_from(const Json& o, const CorpusStore& store) {
  return o.contains("transcripts") ? std::filesystem::path(o.at("transcripts").get<std::string>())
                                   : store.transcripts_dir();
}

GatewayOptions gateway_options(const Json& o) {
  GatewayOptions g;
  if (o.contains("parallelism")) g.parallelism = o.at("parallelism").get<std::ptrdiff_t>();
  return g;
}

AnalysisOptions analysis_from(const Json& o) {
  AnalysisOptions a;
  if (o.contains("correction")) a.correction = parse_correction(o.at("correction").get<std::string>());
  if (o.contains("alpha")) a.alpha = o.at("alpha").get<double>();
  if (o.contains("reference")) {
    const std::string r = o.at("reference").get<std::string>();
    if (r == "normal") a.reference = Reference::Normal;
    else if (r == "t") a.reference = Reference::StudentT;
    else fail(ErrorCode::InvalidArgument, "reference must be normal or t");
  }
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  return a;
}

}  // namespace

extern "C" {

const char* wb_status_name(wb_status status) {
  if (status == WB_OK) return "Ok";
  if (status == WB_INTERNAL) return "Internal";
  if (status > WB_OK && status <= WB_IO) {
    return error_code_name(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
  }
  return "Unknown";
}

const char* wb_last_error(void) { return g_last_error.c_str(); }

void wb_string_free(char* text) { std::free(text); }

const char* wb_version(void) { return "1.0.0"; }

wb_status wb_store_open(const char* directory, wb_store** out) {
  return guard([&] {
    if (directory == nullptr || out == nullptr) fail(ErrorCode::InvalidArgument, "null argument");
    auto handle = std::make_unique<wb_store>();
    handle->store = std::make_unique<CorpusStore>(directory);
    *out = handle.release();
  });
}

void wb_store_close(wb_store* store) { delete store; }

wb_status wb_store_digest(wb_store* store, char** out_hex) {
  return guard([&] { put(out_hex, need(store).digest()); });
}

wb_status wb_stage_one(wb_store* handle, const char* options_json, char** out_json) {
  return guard([&] {
    CorpusStore& store = need(handle);
    const Json o = options(options_json);
    if (!o.contains("context")) fail(ErrorCode::InvalidArgument, "stage one needs a context file");
    const CitationContext context = citation_context_from_json(Json::parse(read_file(o.at("context").get<std::string>())));
    RunManifest manifest = manifest_from(o);
    if (o.contains("n")) {
      manifest.stage_one_count = o.at("n").get<std::size_t>();
      manifest.seed_sample_size = std::min(manifest.seed_sample_size, manifest.stage_one_count);
    }
    ReplayStore replay(transcripts_from(o, store));
    Gateway gateway(replay, make_https_transport(), gateway_options(o));
    Orchestrator orchestrator(gateway);
    const auto records =
        orchestrator.execute_stage_one(manifest, context, [&](const StageOneRecord& r) { store.append_stage_one(r); });

    std::map<std::string, std::size_t> categories;
    std::size_t ok = 0, same_label = 0, attempts = 0;
    for (const auto& r : records) {
      attempts += r.attempt_count;
      if (!r.parsed) continue;
      ++ok;
      bool same = true;
      for (const auto& c : r.parsed->cited_papers) {
        ++categories[std::string(category_label(c.classification_category))];
        same = same && c.classification_category == r.parsed->cited_papers.front().classification_category;
      }
      same_label += same ? 1 : 0;
    }
    Json cats = Json::object();
    for (const auto& [k, v] : categories) cats[k] = v;
    put(out_json, Json{{"records", records.size()},
                       {"ok", ok},
                       {"failed", records.size() - ok},
                       {"attempts", attempts},
                       {"category_assignments", std::move(cats)},
                       {"runs_with_one_label", same_label}}
                      .dump(2));
  });
}

wb_status wb_sample(wb_store* handle, const char* options_json, char** out_json) {
  return guard([&] {
    CorpusStore& store = need(handle);
    const Json o = options(options_json);
    const RunManifest manifest = manifest_from(o);
    const std::size_t k = o.contains("k") ? o.at("k").get<std::size_t>() : manifest.seed_sample_size;
    const std::uint64_t seed = o.contains("seed") ? o.at("seed").get<std::uint64_t>() : manifest.rng_seed;
    std::vector<StageOneRecord> usable;
    for (auto& r : store.stage_one_records()) {
      if (r.ok()) usable.push_back(std::move(r));
    }
    const auto chosen = sample_seeds(usable, k, seed);
    std::vector<std::string> ids;
    for (const auto& r : chosen) ids.push_back(r.id);
    store.save_seeds(ids);
    put(out_json, Json{{"k", k}, {"rng_seed", seed}, {"seeds", ids}}.dump(2));
  });
}

wb_status wb_stage_two(wb_store* handle, const char* options_json, char** out_json) {
  return guard([&] {
    CorpusStore& store = need(handle);
    const Json o = options(options_json);
    if (!o.contains("attachments")) fail(ErrorCode::InvalidArgument, "stage two needs an attachments directory");
    const RunManifest manifest = manifest_from(o);
    const auto seeds = store.seeds();
    if (seeds.empty()) fail(ErrorCode::InvalidArgument, "no seeds stored; run sample first");
    const auto attachments = load_attachments(o.at("attachments").get<std::string>());
    ReplayStore replay(transcripts_from(o, store));
    Gateway gateway(replay, make_https_transport(), gateway_options(o));
    Orchestrator orchestrator(gateway);
    const auto records =
        orchestrator.execute_stage_two(manifest, seeds, attachments, [&](const RunRecord& r) { store.append_run(r); });
    std::size_t ok = 0, units = 0, sections = 0;
    for (const auto& r : records) {
      if (!r.parsed) continue;
      ++ok;
      units += r.parsed->alternative_hypotheses.size();
      sections += r.parsed->intermediate_sections();
    }
    put(out_json, Json{{"runs", records.size()},
                       {"ok", ok},
                       {"failed", records.size() - ok},
                       {"hypotheses", units},
                       {"intermediate_sections", sections}}
                      .dump(2));
  });
}

wb_status wb_import_codes(wb_store* handle, const char* csv_text, char** out_json) {
  return guard([&] {
    if (csv_text == nullptr) fail(ErrorCode::InvalidArgument, "csv is null");
    const BinaryMatrix m = need(handle).import_code_matrix(csv_text);
    put(out_json, Json{{"rows", m.rows()},
                       {"columns", m.columns.size()},
                       {"codebook_version", m.codebook_version},
                       {"matrix_digest", m.digest()}}
                      .dump(2));
  });
}

wb_status wb_synthesize_codes(wb_store* handle, const char* counts_csv, char** out_csv) {
  return guard([&] {
    if (counts_csv == nullptr) fail(ErrorCode::InvalidArgument, "counts are null");
    const auto table = parse_count_table(counts_csv);
    std::vector<std::pair<std::string, CellCounts>> counts;
    for (const auto& [code, cells] : table) {
      CellCounts c{};
      for (std::size_t s = 0; s < 6; ++s) c[s].count = cells[s];
      counts.emplace_back(code, c);
    }
    const auto units = need(handle).hypotheses();
    put(out_csv, matrix_to_csv(synthesize_matrix_from_counts(counts, layout_from_units(units))));
  });
}

wb_status wb_analyze(wb_store* handle, const char* options_json, char** out_text) {
  return guard([&] {
    CorpusStore& store = need(handle);
    const Json o = options(options_json);
    AnalysisReport report = run_analysis_codes(store, analysis_from(o));
    if (o.value("markers", false)) add_marker_analysis(report, store, MarkerLexicon::shipped());
    const std::string output = o.value("output", "json");
    if (output == "json") put(out_text, report_json(report).dump(2));
    else if (output == "effects") put(out_text, effects_csv(report, o.value("raw", false)));
    else if (output == "omnibus") put(out_text, omnibus_csv(report));
    else fail(ErrorCode::InvalidArgument, "output must be json, effects or omnibus");
  });
}

wb_status wb_report(wb_store* handle, const char* options_json, char** out_text) {
  return guard([&] {
    CorpusStore& store = need(handle);
    const Json o = options(options_json);
    if (!o.contains("family")) fail(ErrorCode::UnknownFamily, "a family is required");
    const AmeKind family = parse_ame_kind(o.at("family").get<std::string>());
    const std::string subject_text = o.value("subject", "codes");
    if (subject_text != "codes" && subject_text != "markers") {
      fail(ErrorCode::UnknownFamily, "subject must be codes or markers");
    }
    const EffectSubject subject = subject_text == "codes" ? EffectSubject::Codes : EffectSubject::Markers;
    AnalysisReport report = run_analysis_codes(store, analysis_from(o));
    if (subject == EffectSubject::Markers) add_marker_analysis(report, store, MarkerLexicon::shipped());
    const auto rows = emit_dotwhisker(report, family, subject);
    const bool raw = o.value("raw", false);
    if (o.value("format", "csv") == "json") put(out_text, dotwhisker_json(rows, family, subject, raw).dump());
    else put(out_text, dotwhisker_csv(rows, raw));
  });
}

wb_status wb_export(wb_store* handle, const char* which, char** out_csv) {
  return guard([&] {
    const std::string w = which == nullptr ? "" : which;
    const BinaryMatrix m = need(handle).code_matrix();
    if (w == "table1") put(out_csv, export_table1(m));
    else if (w == "table3") put(out_csv, export_table3(m));
    else if (w == "matrix") put(out_csv, matrix_to_csv(m));
    else fail(ErrorCode::InvalidArgument, "export must be table1, table3 or matrix");
  });
}

wb_status wb_cell_counts(wb_store* handle, const char* options_json, char** out_json) {
  return guard([&] {
    const Json o = options(options_json);
    const std::string code = o.value("code", "");
    put(out_json, Json{{"code", code}, {"cells", cell_counts_json(cell_counts(need(handle).code_matrix(), code))}}.dump(2));
  });
}

wb_status wb_hedge_counts(wb_store* handle, char** out_json) {
  return guard([&] {
    const auto records = need(handle).stage_one_records();
    const auto notes = expectation_notes(records);
    const HedgeCounts h = hedge_counts(notes);
    put(out_json, Json{{"notes", notes.size()}, {"expected_to", h.expected_to}, {"likely_to", h.likely_to}, {"may", h.may}}
                      .dump(2));
  });
}

wb_status wb_reiter(wb_store* handle, const char* options_json, char** out_json) {
  return guard([&] {
    CorpusStore& store = need(handle);
    const Json o = options(options_json);
    const auto units = store.hypotheses();
    const auto shares = reiter_cooccurrence(store.code_matrix(), units, o.value("term", "reiter"));
    Json out = Json::array();
    for (const auto& s : shares) {
      out.push_back(Json{{"code", s.code},
                         {"code_rows", s.code_rows},
                         {"term_rows", s.term_rows},
                         {"joint_rows", s.joint_rows},
                         {"share_with_term", s.share_with_term ? Json(*s.share_with_term) : Json(nullptr)},
                         {"code_given_term", s.code_given_term ? Json(*s.code_given_term) : Json(nullptr)}});
    }
    put(out_json, out.dump(2));
  });
}

wb_status wb_cost(wb_store* handle, const char* options_json, char** out_json) {
  return guard([&] {
    CorpusStore& store = need(handle);
    const Json o = options(options_json);
    ProviderConfig config = manifest_from(o).provider;
    if (o.contains("input_price_per_1m")) config.price_table.input_per_1m = o.at("input_price_per_1m").get<double>();
    if (o.contains("output_price_per_1m")) config.price_table.output_per_1m = o.at("output_price_per_1m").get<double>();
    config.validate();
    const auto transcripts = ReplayStore(transcripts_from(o, store)).all();
    const CostReport c = accumulate_cost(transcripts, config);
    put(out_json, Json{{"transcripts", transcripts.size()},
                       {"input_tokens", c.input_tokens},
                       {"output_tokens", c.output_tokens},
                       {"reasoning_tokens", c.reasoning_tokens},
                       {"total_cost", c.total_cost},
                       {"reasoning_cost", c.reasoning_cost},
                       {"price_table",
                        {{"input_per_1m", config.price_table.input_per_1m},
                         {"output_per_1m", config.price_table.output_per_1m}}}}
                      .dump(2));
  });
}

wb_status wb_server_start(const char* store_directory, const char* options_json, wb_server** out) {
  return guard([&] {
    if (store_directory == nullptr || out == nullptr) fail(ErrorCode::InvalidArgument, "null argument");
    const Json o = options(options_json);
    ServeConfig config;
    config.host = o.value("host", config.host);
    config.port = o.value("port", config.port);
    config.static_dir = o.value("static_dir", "");
    config.analysis = analysis_from(o);
    auto server = std::make_unique<wb_server>();
    server->store = std::make_unique<CorpusStore>(store_directory);
    server->service = std::make_unique<Service>(*server->store, config);
    server->service->start();
    *out = server.release();
  });
}

int wb_server_port(const wb_server* server) { return server == nullptr ? 0 : server->service->port(); }

void wb_server_stop(wb_server* server) {
  if (server == nullptr) return;
  server->service->stop();
  delete server;
}

}  // extern "C"
