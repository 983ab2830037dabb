#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "workbench/domain.hpp"
#include "workbench/prompts.hpp"
#include "workbench/provider.hpp"

namespace workbench {

struct RunManifest {
  std::size_t stage_one_count = 30;
  std::size_t seed_sample_size = 15;
  std::uint64_t rng_seed = 1970;
  std::vector<PromptSetting> settings{kAllSettings.begin(), kAllSettings.end()};
  std::size_t retry_limit = 2;
  ProviderMode provider_mode = ProviderMode::Replay;
  std::size_t failure_tolerance = 0;
  ProviderConfig provider;

  // Throws InvalidArgument.
  void validate() const;
};

// key = value lines, '#' starts a comment. Unknown keys are rejected.
RunManifest parse_manifest(std::string_view text);
RunManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_text(const RunManifest& manifest);

struct StageOneRecord {
  std::string id;
  std::size_t index = 0;
  std::string transcript_key;
  std::optional<StageOneResult> parsed;
  std::string failure;  // empty on success
  std::size_t attempt_count = 0;

  bool ok() const noexcept { return parsed.has_value(); }
};

Json to_json(const StageOneRecord& record);
StageOneRecord stage_one_record_from_json(const Json& j);

struct RunRecord {
  std::string run_id;
  PromptSetting setting;
  std::string seed_ref;
  std::string transcript_key;
  std::optional<StageTwoResult> parsed;
  std::string failure;
  std::size_t attempt_count = 0;

  bool ok() const noexcept { return parsed.has_value(); }
};

Json to_json(const RunRecord& record);
RunRecord run_record_from_json(const Json& j);

// Attempt a of the call in plan slot s uses call index s * kCallStride + a.
inline constexpr std::uint64_t kCallStride = 256;

// Uniform sample without replacement (selection sampling over a seeded
// mt19937_64); the result keeps the input order. Errors: SampleTooLarge.
std::vector<StageOneRecord> sample_seeds(std::span<const StageOneRecord> records, std::size_t k,
                                         std::uint64_t rng_seed);

class Orchestrator {
 public:
  using StageOneSink = std::function<void(const StageOneRecord&)>;
  using RunSink = std::function<void(const RunRecord&)>;

  explicit Orchestrator(Gateway& gateway) : gateway_(gateway) {}

  // Every record, failures included, reaches the sink in slot order before
  // PlanIncomplete is raised.
  std::vector<StageOneRecord> execute_stage_one(const RunManifest& manifest, const CitationContext& context,
                                                const StageOneSink& sink = {});

  // Seeds outer loop, settings inner loop. Errors: PlanIncomplete,
  // MissingAttachment, InvalidArgument (empty seeds or unparsed seed).
  std::vector<RunRecord> execute_stage_two(const RunManifest& manifest, std::span<const StageOneRecord> seeds,
                                           std::span<const Attachment> attachments, const RunSink& sink = {});

 private:
  Gateway& gateway_;
};

}  // namespace workbench
