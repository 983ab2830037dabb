#include "workbench/provider.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "workbench/digest.hpp"
#include "workbench/error.hpp"

namespace workbench {

namespace {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double round_cents(long double dollars) {
  return static_cast<double>(std::floor(dollars * 100.0L + 0.5L + 1e-9L) / 100.0L);
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

std::string_view reasoning_effort_label(ReasoningEffort effort) noexcept {
  switch (effort) {
    case ReasoningEffort::Low: return "low";
    case ReasoningEffort::Medium: return "medium";
    case ReasoningEffort::High: return "high";
  }
  return {};
}

ReasoningEffort parse_reasoning_effort(std::string_view text) {
  for (auto e : {ReasoningEffort::Low, ReasoningEffort::Medium, ReasoningEffort::High}) {
    if (reasoning_effort_label(e) == text) return e;
  }
  fail(ErrorCode::InvalidArgument, "unknown reasoning effort \"" + std::string(text) + "\"");
}

void ProviderConfig::validate() const {
  if (!(temperature >= 0.0)) fail(ErrorCode::InvalidArgument, "temperature must be >= 0");
  if (!(price_table.input_per_1m >= 0.0) || !(price_table.output_per_1m >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "prices must be >= 0");
  }
  if (model_id.empty()) fail(ErrorCode::InvalidArgument, "model_id must not be empty");
}

std::string_view provider_mode_label(ProviderMode mode) noexcept {
  switch (mode) {
    case ProviderMode::Live: return "live";
    case ProviderMode::Record: return "record";
    case ProviderMode::Replay: return "replay";
  }
  return {};
}

ProviderMode parse_provider_mode(std::string_view text) {
  for (auto m : {ProviderMode::Live, ProviderMode::Record, ProviderMode::Replay}) {
    if (provider_mode_label(m) == text) return m;
  }
  fail(ErrorCode::InvalidArgument, "unknown provider mode \"" + std::string(text) + "\"");
}

ProviderMode resolve_mode(ProviderMode configured) {
  if (const char* env = std::getenv("WORKBENCH_MODE"); env != nullptr && *env != '\0') {
    return parse_provider_mode(env);
  }
  return configured;
}

Json to_json(const Transcript& t) {
  Json digests = Json::array();
  for (const auto& d : t.request_summary.attachment_digests) {
    digests.push_back(Json{{"name", d.name}, {"sha256", d.sha256}});
  }
  return Json{{"key", t.key},
              {"request_summary",
               {{"stage", stage_label(t.request_summary.stage)},
                {"setting", t.request_summary.setting_label},
                {"attachment_digests", std::move(digests)},
                {"call_index", t.request_summary.call_index}}},
              {"response_text", t.response_text},
              {"usage",
               {{"input_tokens", t.usage.input_tokens},
                {"output_tokens", t.usage.output_tokens},
                {"reasoning_tokens", t.usage.reasoning_tokens}}},
              {"created_at", t.created_at},
              {"provider_echo", t.provider_echo}};
}

Transcript transcript_from_json(const Json& j) {
  Transcript t;
  t.key = j.at("key").get<std::string>();
  const Json& s = j.at("request_summary");
  t.request_summary.stage = s.at("stage").get<std::string>() == "stage-1" ? Stage::StageOne : Stage::StageTwo;
  t.request_summary.setting_label = s.value("setting", "");
  t.request_summary.call_index = s.value("call_index", std::uint64_t{0});
  for (const auto& d : s.at("attachment_digests")) {
    t.request_summary.attachment_digests.push_back(
        {d.at("name").get<std::string>(), d.at("sha256").get<std::string>()});
  }
  t.response_text = j.at("response_text").get<std::string>();
  const Json& u = j.at("usage");
  t.usage.input_tokens = u.at("input_tokens").get<std::uint64_t>();
  t.usage.output_tokens = u.at("output_tokens").get<std::uint64_t>();
  t.usage.reasoning_tokens = u.value("reasoning_tokens", std::uint64_t{0});
  t.created_at = j.value("created_at", "");
  t.provider_echo = j.value("provider_echo", Json::object());
  return t;
}

std::string transcript_key(const PromptBundle& bundle, const ProviderConfig& config,
                           std::uint64_t call_index) {
  FieldHasher h;
  h.field("workbench-transcript-v1");
  h.field(stage_label(bundle.stage));
  h.field(bundle.system_or_role_text);
  h.field(bundle.input_payload);
  h.field(std::to_string(bundle.attachments.size()));
  for (const auto& a : bundle.attachments) {
    h.field(a.name);
    h.field(a.media_kind == MediaKind::Pdf ? "pdf" : "text");
    h.field(sha256_hex(a.bytes));
  }
  h.field(config.model_id);
  h.field(reasoning_effort_label(config.reasoning_effort));
  h.field(format_double(config.temperature));
  h.field(std::to_string(call_index));
  return h.hex();
}

CostReport accumulate_cost(std::span<const Transcript> transcripts, const ProviderConfig& config) {
  CostReport r;
  for (const auto& t : transcripts) {
    r.input_tokens += t.usage.input_tokens;
    r.output_tokens += t.usage.output_tokens;
    r.reasoning_tokens += t.usage.reasoning_tokens;
  }
  const long double in = static_cast<long double>(r.input_tokens) / 1e6L * config.price_table.input_per_1m;
  const long double out = static_cast<long double>(r.output_tokens) / 1e6L * config.price_table.output_per_1m;
  const long double reasoning =
      static_cast<long double>(r.reasoning_tokens) / 1e6L * config.price_table.output_per_1m;
  r.total_cost = round_cents(in + out);
  r.reasoning_cost = round_cents(reasoning);
  return r;
}

// ---------------------------------------------------------------------------

ReplayStore::ReplayStore(std::filesystem::path directory) : directory_(std::move(directory)) {}

std::filesystem::path ReplayStore::path_for(const std::string& key) const {
  return directory_ / (key + ".json");
}

std::optional<std::string> ReplayStore::load_raw(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file(path);
}

std::optional<Transcript> ReplayStore::load(const std::string& key) const {
  auto raw = load_raw(key);
  if (!raw) return std::nullopt;
  try {
    return transcript_from_json(Json::parse(*raw));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, "corrupt transcript " + key + ": " + e.what());
  }
}

void ReplayStore::save(const Transcript& transcript) {
  std::unique_lock lock(mutex_);
  std::filesystem::create_directories(directory_);
  const auto path = path_for(transcript.key);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << to_json(transcript).dump(2) << '\n';
    if (!out) fail(ErrorCode::Io, "cannot write transcript " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<Transcript> ReplayStore::all() const {
  std::vector<std::filesystem::path> files;
  {
    std::shared_lock lock(mutex_);
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(directory_, ec)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Transcript> out;
  for (const auto& f : files) {
    if (auto t = load(f.stem().string())) out.push_back(std::move(*t));
  }
  return out;
}

std::size_t ReplayStore::size() const {
  std::shared_lock lock(mutex_);
  std::error_code ec;
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(directory_, ec)) {
    if (e.path().extension() == ".json") ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------

Json build_request_body(const PromptBundle& bundle, const ProviderConfig& config) {
  Json user_content = Json::array();
  user_content.push_back(Json{{"type", "input_text"}, {"text", bundle.input_payload}});
  for (const auto& a : bundle.attachments) {
    if (a.media_kind == MediaKind::Pdf) {
      user_content.push_back(Json{{"type", "input_file"},
                                  {"filename", a.name + ".pdf"},
                                  {"file_data", "data:application/pdf;base64," + base64_encode(a.bytes)}});
    } else {
      user_content.push_back(
          Json{{"type", "input_text"}, {"text", "Attached full text \"" + a.name + "\":\n\n" + a.bytes}});
    }
  }
  Json input = Json::array();
  input.push_back(Json{{"role", "developer"},
                       {"content", Json::array({Json{{"type", "input_text"},
                                                     {"text", bundle.system_or_role_text}}})}});
  input.push_back(Json{{"role", "user"}, {"content", std::move(user_content)}});
  return Json{{"model", config.model_id},
              {"reasoning", {{"effort", reasoning_effort_label(config.reasoning_effort)}}},
              {"temperature", config.temperature},
              {"input", std::move(input)}};
}

void read_response_body(const std::string& body, Transcript& into) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProviderFailure(std::string("provider returned a non-JSON body: ") + e.what(), 1, 200);
  }
  std::string text;
  if (auto it = j.find("output_text"); it != j.end() && it->is_string()) {
    text = it->get<std::string>();
  } else if (auto out = j.find("output"); out != j.end() && out->is_array()) {
    for (const auto& item : *out) {
      if (item.value("type", "") != "message") continue;
      for (const auto& part : item.value("content", Json::array())) {
        if (part.value("type", "") == "output_text") text += part.value("text", "");
      }
    }
  } else {
    throw ProviderFailure("provider response has no output", 1, 200);
  }
  into.response_text = std::move(text);
  if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
    into.usage.input_tokens = u->value("input_tokens", std::uint64_t{0});
    into.usage.output_tokens = u->value("output_tokens", std::uint64_t{0});
    into.usage.reasoning_tokens = 0;
    if (auto d = u->find("output_tokens_details"); d != u->end() && d->is_object()) {
      into.usage.reasoning_tokens = d->value("reasoning_tokens", std::uint64_t{0});
    }
    into.usage.reasoning_tokens = std::min(into.usage.reasoning_tokens, into.usage.output_tokens);
  }
  Json echo = Json::object();
  for (const char* field : {"model", "temperature", "reasoning"}) {
    if (j.contains(field)) echo[field] = j.at(field);
  }
  into.provider_echo = std::move(echo);
}

Gateway::Gateway(ReplayStore& store, std::shared_ptr<Transport> transport, GatewayOptions options)
    : store_(store),
      transport_(std::move(transport)),
      options_(std::move(options)),
      in_flight_(std::clamp<std::ptrdiff_t>(options_.parallelism, 1, 64)) {
  options_.parallelism = std::clamp<std::ptrdiff_t>(options_.parallelism, 1, 64);
  if (!options_.api_key) {
    if (const char* env = std::getenv("WORKBENCH_API_KEY"); env != nullptr && *env != '\0') {
      options_.api_key = env;
    }
  }
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!options_.clock) options_.clock = utc_now;
  options_.max_attempts = std::max(1, options_.max_attempts);
}

TransportResponse Gateway::send_with_retry(const TransportRequest& request) {
  auto backoff = options_.initial_backoff;
  int last_status = 0;
  std::string last_error;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    try {
      TransportResponse response = transport_->post(request);
      if (response.status >= 200 && response.status < 300) return response;
      last_status = response.status;
      last_error = "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 300);
      if (!retryable(response.status)) {
        throw ProviderFailure("provider rejected the request (" + last_error + ")", attempt, last_status);
      }
    } catch (const ProviderFailure&) {
      throw;
    } catch (const std::exception& e) {
      last_status = 0;
      last_error = e.what();
    }
    if (attempt < options_.max_attempts) {
      options_.sleep(backoff);
      backoff *= 2;
    }
  }
  throw ProviderFailure("provider call failed after " + std::to_string(options_.max_attempts) +
                            " attempts (" + last_error + ")",
                        options_.max_attempts, last_status);
}

Transcript Gateway::complete(const PromptBundle& bundle, const ProviderConfig& config, ProviderMode mode,
                             std::uint64_t call_index) {
  const std::string key = transcript_key(bundle, config, call_index);
  if (mode == ProviderMode::Replay) {
    if (auto stored = store_.load(key)) return std::move(*stored);
    fail(ErrorCode::ReplayMiss, "no recorded transcript for key " + key);
  }

  config.validate();
  if (!options_.api_key || options_.api_key->empty()) {
    fail(ErrorCode::AuthMissing, "live provider calls need WORKBENCH_API_KEY");
  }
  if (!transport_) fail(ErrorCode::ProviderError, "no transport configured");

  Transcript t;
  t.key = key;
  t.request_summary.stage = bundle.stage;
  t.request_summary.setting_label = bundle.setting ? setting_label(*bundle.setting) : std::string{};
  t.request_summary.call_index = call_index;
  for (const auto& a : bundle.attachments) t.request_summary.attachment_digests.push_back({a.name, sha256_hex(a.bytes)});

  TransportRequest request{config.endpoint, build_request_body(bundle, config).dump(), *options_.api_key};
  in_flight_.acquire();
  TransportResponse response;
  try {
    response = send_with_retry(request);
  } catch (...) {
    in_flight_.release();
    throw;
  }
  in_flight_.release();

  read_response_body(response.body, t);
  t.created_at = options_.clock();
  if (mode == ProviderMode::Record) store_.save(t);
  return t;
}

}  // namespace workbench
