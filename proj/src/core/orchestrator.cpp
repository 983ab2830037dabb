#include "workbench/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "workbench/error.hpp"
#include "workbench/schema.hpp"

namespace workbench {

namespace {

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size() || value.front() == '-') throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "plan key " + key + " expects a non-negative integer, got \"" + value + "\"");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "plan key " + key + " expects a number, got \"" + value + "\"");
  }
}

std::vector<PromptSetting> parse_settings(const std::string& value) {
  std::vector<PromptSetting> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_setting_label(item));
  }
  return out;
}

bool is_parse_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson:
    case ErrorCode::SchemaViolation:
    case ErrorCode::CardinalityError:
    case ErrorCode::SectionMismatch:
    case ErrorCode::IdentifierMismatch:
      return true;
    default:
      return false;
  }
}

std::string describe(const Error& e) { return std::string(error_code_name(e.code())) + ": " + e.what(); }

// Runs job(slot) for every slot on up to `workers` threads. The first
// exception (by slot) is rethrown after all workers finish.
template <typename Job>
void run_slots(std::size_t count, std::ptrdiff_t workers, Job job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t slot = next++; slot < count; slot = next++) {
      try {
        job(slot);
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(workers, 1, 64));
  if (n == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < std::min(n, count); ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Record>
void check_tolerance(const std::vector<Record>& records, std::size_t tolerance, const char* stage) {
  std::size_t failures = 0;
  std::string first;
  for (const auto& r : records) {
    if (!r.ok()) {
      if (failures == 0) first = r.failure;
      ++failures;
    }
  }
  if (failures > tolerance) {
    fail(ErrorCode::PlanIncomplete, std::string(stage) + ": " + std::to_string(failures) + " of " +
                                        std::to_string(records.size()) + " calls failed (tolerance " +
                                        std::to_string(tolerance) + "); first: " + first);
  }
}

}  // namespace

void RunManifest::validate() const {
  if (seed_sample_size > stage_one_count) {
    fail(ErrorCode::InvalidArgument, "seed_sample_size exceeds stage_one_count");
  }
  std::set<PromptSetting> distinct(settings.begin(), settings.end());
  if (settings.size() != kAllSettings.size() || distinct.size() != kAllSettings.size()) {
    fail(ErrorCode::InvalidArgument, "a plan needs exactly the six distinct prompt settings");
  }
  if (retry_limit + 1 >= kCallStride) fail(ErrorCode::InvalidArgument, "retry_limit too large");
  provider.validate();
}

RunManifest parse_manifest(std::string_view text) {
  RunManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::InvalidArgument, "plan line " + std::to_string(line_no) + " is not key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "stage_one_count") m.stage_one_count = parse_unsigned(key, value);
    else if (key == "seed_sample_size") m.seed_sample_size = parse_unsigned(key, value);
    else if (key == "rng_seed") m.rng_seed = parse_unsigned(key, value);
    else if (key == "settings") m.settings = parse_settings(value);
    else if (key == "retry_limit") m.retry_limit = parse_unsigned(key, value);
    else if (key == "provider_mode") m.provider_mode = parse_provider_mode(value);
    else if (key == "failure_tolerance") m.failure_tolerance = parse_unsigned(key, value);
    else if (key == "model_id") m.provider.model_id = value;
    else if (key == "reasoning_effort") m.provider.reasoning_effort = parse_reasoning_effort(value);
    else if (key == "temperature") m.provider.temperature = parse_real(key, value);
    else if (key == "input_price_per_1m") m.provider.price_table.input_per_1m = parse_real(key, value);
    else if (key == "output_price_per_1m") m.provider.price_table.output_per_1m = parse_real(key, value);
    else if (key == "endpoint") m.provider.endpoint = value;
    else fail(ErrorCode::InvalidArgument, "unknown plan key \"" + key + "\"");
  }
  m.validate();
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read plan " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_manifest(text.str());
}

std::string manifest_to_text(const RunManifest& m) {
  std::ostringstream out;
  out << "stage_one_count = " << m.stage_one_count << '\n'
      << "seed_sample_size = " << m.seed_sample_size << '\n'
      << "rng_seed = " << m.rng_seed << '\n'
      << "settings = ";
  for (std::size_t i = 0; i < m.settings.size(); ++i) out << (i ? ", " : "") << setting_label(m.settings[i]);
  out << '\n'
      << "retry_limit = " << m.retry_limit << '\n'
      << "provider_mode = " << provider_mode_label(m.provider_mode) << '\n'
      << "failure_tolerance = " << m.failure_tolerance << '\n'
      << "model_id = " << m.provider.model_id << '\n'
      << "reasoning_effort = " << reasoning_effort_label(m.provider.reasoning_effort) << '\n'
      << "temperature = " << m.provider.temperature << '\n'
      << "input_price_per_1m = " << m.provider.price_table.input_per_1m << '\n'
      << "output_price_per_1m = " << m.provider.price_table.output_per_1m << '\n'
      << "endpoint = " << m.provider.endpoint << '\n';
  return out.str();
}

Json to_json(const StageOneRecord& r) {
  Json j{{"id", r.id}, {"index", r.index}, {"transcript_key", r.transcript_key}};
  j["parsed"] = r.parsed ? to_json(*r.parsed) : Json(nullptr);
  j["failure"] = r.failure;
  j["attempt_count"] = r.attempt_count;
  return j;
}

StageOneRecord stage_one_record_from_json(const Json& j) {
  StageOneRecord r;
  r.id = j.at("id").get<std::string>();
  r.index = j.at("index").get<std::size_t>();
  r.transcript_key = j.at("transcript_key").get<std::string>();
  if (!j.at("parsed").is_null()) r.parsed = stage_one_from_json(j.at("parsed"));
  r.failure = j.value("failure", "");
  r.attempt_count = j.at("attempt_count").get<std::size_t>();
  return r;
}

Json to_json(const RunRecord& r) {
  Json j{{"run_id", r.run_id},
         {"setting", setting_label(r.setting)},
         {"seed_ref", r.seed_ref},
         {"transcript_key", r.transcript_key}};
  j["parsed"] = r.parsed ? output_json(*r.parsed) : Json(nullptr);
  j["failure"] = r.failure;
  j["attempt_count"] = r.attempt_count;
  return j;
}

RunRecord run_record_from_json(const Json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.setting = parse_setting_label(j.at("setting").get<std::string>());
  r.seed_ref = j.at("seed_ref").get<std::string>();
  r.transcript_key = j.at("transcript_key").get<std::string>();
  if (!j.at("parsed").is_null()) {
    r.parsed = stage_two_from_json(Json{{"run_id", r.run_id},
                                        {"setting", setting_label(r.setting)},
                                        {"seed_stage_one", r.seed_ref},
                                        {"output", j.at("parsed")}});
  }
  r.failure = j.value("failure", "");
  r.attempt_count = j.at("attempt_count").get<std::size_t>();
  return r;
}

std::vector<StageOneRecord> sample_seeds(std::span<const StageOneRecord> records, std::size_t k,
                                         std::uint64_t rng_seed) {
  if (k > records.size()) {
    fail(ErrorCode::SampleTooLarge, "cannot sample " + std::to_string(k) + " seeds from " +
                                        std::to_string(records.size()) + " records");
  }
  std::mt19937_64 rng(rng_seed);
  std::vector<StageOneRecord> out;
  out.reserve(k);
  std::size_t needed = k;
  for (std::size_t i = 0; i < records.size() && needed > 0; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (static_cast<double>(records.size() - i) * u < static_cast<double>(needed)) {
      out.push_back(records[i]);
      --needed;
    }
  }
  return out;
}

std::vector<StageOneRecord> Orchestrator::execute_stage_one(const RunManifest& manifest,
                                                            const CitationContext& context,
                                                            const StageOneSink& sink) {
  manifest.validate();
  std::vector<StageOneRecord> records(manifest.stage_one_count);
  if (records.empty()) return records;
  const PromptBundle bundle = build_stage_one_prompt(context, classification_scheme());
  const ProviderMode mode = resolve_mode(manifest.provider_mode);

  run_slots(records.size(), gateway_.parallelism(), [&](std::size_t slot) {
    StageOneRecord r;
    r.index = slot;
    r.id = make_stage_one_id(slot);
    for (std::size_t attempt = 0; attempt <= manifest.retry_limit; ++attempt) {
      r.attempt_count = attempt + 1;
      try {
        const Transcript t = gateway_.complete(bundle, manifest.provider, mode, slot * kCallStride + attempt);
        r.transcript_key = t.key;
        r.parsed = parse_stage_one_output(t.response_text, context);
        r.failure.clear();
        break;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::AuthMissing) throw;
        r.failure = describe(e);
        if (!is_parse_error(e.code())) break;
      }
    }
    records[slot] = std::move(r);
  });

  if (sink) {
    for (const auto& r : records) sink(r);
  }
  check_tolerance(records, manifest.failure_tolerance, "stage one");
  return records;
}

std::vector<RunRecord> Orchestrator::execute_stage_two(const RunManifest& manifest,
                                                       std::span<const StageOneRecord> seeds,
                                                       std::span<const Attachment> attachments,
                                                       const RunSink& sink) {
  manifest.validate();
  if (seeds.empty()) fail(ErrorCode::InvalidArgument, "stage two needs at least one seed");
  for (const auto& s : seeds) {
    if (!s.parsed) fail(ErrorCode::InvalidArgument, "seed " + s.id + " has no parsed stage-one output");
  }

  struct Planned {
    const StageOneRecord* seed;
    PromptSetting setting;
    PromptBundle bundle;
  };
  std::vector<Planned> plan;
  plan.reserve(seeds.size() * manifest.settings.size());
  for (const auto& seed : seeds) {
    for (PromptSetting setting : manifest.settings) {
      plan.push_back({&seed, setting, build_stage_two_prompt(setting, *seed.parsed, attachments)});
    }
  }

  const ProviderMode mode = resolve_mode(manifest.provider_mode);
  std::vector<RunRecord> records(plan.size());
  run_slots(plan.size(), gateway_.parallelism(), [&](std::size_t slot) {
    const Planned& p = plan[slot];
    RunRecord r;
    r.run_id = make_run_id(p.seed->index, p.setting, slot);
    r.setting = p.setting;
    r.seed_ref = p.seed->id;
    for (std::size_t attempt = 0; attempt <= manifest.retry_limit; ++attempt) {
      r.attempt_count = attempt + 1;
      try {
        const Transcript t = gateway_.complete(p.bundle, manifest.provider, mode, slot * kCallStride + attempt);
        r.transcript_key = t.key;
        StageTwoResult parsed = parse_stage_two_output(t.response_text, p.setting);
        parsed.run_id = r.run_id;
        parsed.seed_stage_one = r.seed_ref;
        r.parsed = std::move(parsed);
        r.failure.clear();
        break;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::AuthMissing) throw;
        r.failure = describe(e);
        if (!is_parse_error(e.code())) break;
      }
    }
    records[slot] = std::move(r);
  });

  if (sink) {
    for (const auto& r : records) sink(r);
  }
  check_tolerance(records, manifest.failure_tolerance, "stage two");
  return records;
}

}  // namespace workbench
