#include "workbench/service.hpp"

#include <httplib.h>

#include <thread>

#include "workbench/error.hpp"
#include "workbench/lexical.hpp"

namespace workbench {

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoMatrix:
      return 404;
    case ErrorCode::UnknownFamily:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedJson:
      return 400;
    case ErrorCode::StoreLocked:
    case ErrorCode::RunReferenced:
      return 409;
    case ErrorCode::Io:
      return 500;
    default:
      return 422;
  }
}

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, Json{{"error", code}, {"message", message}}, status);
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::MalformedJson, std::string("request body is not JSON: ") + e.what());
  }
}

bool want_csv(const httplib::Request& req) { return req.get_param_value("format") == "csv"; }
bool want_raw(const httplib::Request& req) {
  const auto v = req.get_param_value("raw");
  return v == "1" || v == "true";
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), error_code_name(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "InvalidArgument", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

Json run_summary(const RunRecord& r, std::size_t units) {
  return Json{{"run_id", r.run_id},          {"setting", setting_label(r.setting)}, {"seed_ref", r.seed_ref},
              {"ok", r.ok()},                {"failure", r.failure},                {"attempt_count", r.attempt_count},
              {"hypotheses", units},         {"intermediate_sections", r.parsed ? r.parsed->intermediate_sections() : 0}};
}

Json unit_json(const HypothesisUnit& u, const MarkerLexicon& lexicon) {
  Json j = to_json(u);
  Json markers = Json::array();
  const auto hits = marker_indicators(u, lexicon);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) markers.push_back(lexicon.items()[i].label);
  }
  j["markers"] = std::move(markers);
  return j;
}

}  // namespace

struct Service::Impl {
  CorpusStore& store;
  ServeConfig config;
  httplib::Server server;
  std::thread thread;
  int bound_port = 0;

  Impl(CorpusStore& s, ServeConfig c) : store(s), config(std::move(c)) { routes(); }

  AnalysisReport analyse(bool markers) const {
    AnalysisReport report = run_analysis_codes(store, config.analysis);
    if (markers) add_marker_analysis(report, store, MarkerLexicon::shipped());
    return report;
  }

  void routes() {
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    server.Get("/api/runs", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string filter = req.get_param_value("setting");
      const auto units = store.hypotheses();
      Json out = Json::array();
      for (const auto& r : store.runs()) {
        if (!filter.empty() && setting_label(r.setting) != filter) continue;
        const auto n = std::count_if(units.begin(), units.end(), [&](const auto& u) { return u.run_id == r.run_id; });
        out.push_back(run_summary(r, static_cast<std::size_t>(n)));
      }
      send_json(res, out);
    }));

    server.Get(R"(/api/runs/([^/]+)/hypotheses)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!store.run(id)) {
        send_error(res, 404, "UnknownRun", "no run " + id);
        return;
      }
      Json out = Json::array();
      for (const auto& u : store.hypotheses_for_run(id)) out.push_back(unit_json(u, MarkerLexicon::shipped()));
      send_json(res, out);
    }));

    server.Get("/api/hypotheses", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string setting = req.get_param_value("setting");
      const std::string code = req.get_param_value("code");
      std::optional<BinaryMatrix> matrix;
      std::size_t column = 0;
      if (!code.empty()) {
        matrix = store.code_matrix();
        column = matrix->column_index(code);
      }
      Json out = Json::array();
      const auto units = store.hypotheses();
      for (std::size_t i = 0; i < units.size(); ++i) {
        if (!setting.empty() && setting_label(units[i].setting) != setting) continue;
        if (matrix && !matrix->at(i, column)) continue;
        out.push_back(unit_json(units[i], MarkerLexicon::shipped()));
      }
      send_json(res, out);
    }));

    server.Get("/api/codebook", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, to_json(store.codebook()));
    }));

    server.Post("/api/codebook", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, to_json(store.save_codebook(codebook_from_json(parse_body(req)))), 201);
    }));

    server.Get("/api/assignments", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json out = Json::array();
      for (const auto& a : store.assignments()) out.push_back(to_json(a));
      send_json(res, out);
    }));

    server.Post("/api/assignments", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = parse_body(req);
      if (!body.is_object() || !body.contains("hypothesis_id") || !body.contains("code") || !body.contains("value")) {
        fail(ErrorCode::InvalidArgument, "expected {hypothesis_id, code, value}");
      }
      if (auto v = body.find("codebook_version"); v != body.end() && v->get<int>() != store.codebook().version) {
        send_error(res, 409, "StaleCodebook",
                   "codebook is at version " + std::to_string(store.codebook().version));
        return;
      }
      const Json& value = body.at("value");
      int v = -1;
      if (value.is_number_integer()) {
        const auto raw = value.get<long long>();
        v = raw == 0 || raw == 1 ? static_cast<int>(raw) : -1;
      } else if (value.is_boolean()) {
        v = value.get<bool>() ? 1 : 0;
      }
      if (v < 0) fail(ErrorCode::NonBinaryCell, "value " + value.dump() + " is not 0 or 1");
      send_json(res, to_json(store.set_assignment(body.at("hypothesis_id").get<std::string>(),
                                                  body.at("code").get<std::string>(), v)));
    }));

    server.Get("/api/analysis/ame", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const AmeKind family = parse_ame_kind(req.get_param_value("family"));
      const std::string subject_text = req.has_param("subject") ? req.get_param_value("subject") : "codes";
      if (subject_text != "codes" && subject_text != "markers") {
        fail(ErrorCode::UnknownFamily, "subject must be codes or markers");
      }
      const EffectSubject subject = subject_text == "codes" ? EffectSubject::Codes : EffectSubject::Markers;
      const auto rows = emit_dotwhisker(analyse(subject == EffectSubject::Markers), family, subject);
      if (want_csv(req)) {
        res.set_content(dotwhisker_csv(rows, want_raw(req)), "text/csv");
      } else {
        send_json(res, dotwhisker_json(rows, family, subject, want_raw(req)));
      }
    }));

    server.Get("/api/analysis/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const AnalysisReport report = analyse(req.get_param_value("markers") == "1");
      if (want_csv(req)) {
        res.set_content(effects_csv(report, want_raw(req)), "text/csv");
      } else {
        send_json(res, report_json(report));
      }
    }));

    server.Get("/api/analysis/echo", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto units = store.hypotheses();
      if (units.empty()) fail(ErrorCode::NoMatrix, "no hypothesis units are stored");
      send_json(res, echo_json(echo_study(units, MarkerLexicon::shipped(), design_from_units(units),
                                          config.analysis.alpha, config.analysis.correction)));
    }));

    server.Get("/api/export/table3", guarded([this](const httplib::Request&, httplib::Response& res) {
      res.set_content(export_table3(store.code_matrix()), "text/csv");
    }));

    server.Get("/api/export/table1", guarded([this](const httplib::Request&, httplib::Response& res) {
      res.set_content(export_table1(store.code_matrix()), "text/csv");
    }));

    server.Get("/api/cell-counts", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string code = req.get_param_value("code");
      send_json(res, Json{{"code", code}, {"cells", cell_counts_json(cell_counts(store.code_matrix(), code))}});
    }));

    if (!config.static_dir.empty()) server.set_mount_point("/", config.static_dir);
  }
};

Service::Service(CorpusStore& store, ServeConfig config) : impl_(std::make_unique<Impl>(store, std::move(config))) {}

Service::~Service() { stop(); }

void Service::start() {
  if (impl_->thread.joinable()) return;
  auto& s = impl_->server;
  if (impl_->config.port == 0) {
    impl_->bound_port = s.bind_to_any_port(impl_->config.host);
    if (impl_->bound_port <= 0) fail(ErrorCode::PortBusy, "could not bind any port on " + impl_->config.host);
  } else {
    if (!s.bind_to_port(impl_->config.host, impl_->config.port)) {
      fail(ErrorCode::PortBusy, "port " + std::to_string(impl_->config.port) + " is already in use");
    }
    impl_->bound_port = impl_->config.port;
  }
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
}

void Service::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->server.stop();
  impl_->thread.join();
}

int Service::port() const noexcept { return impl_->bound_port; }

}  // namespace workbench
