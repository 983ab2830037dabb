#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "workbench/domain.hpp"
#include "workbench/prompts.hpp"

namespace workbench {

enum class ReasoningEffort { Low, Medium, High };

std::string_view reasoning_effort_label(ReasoningEffort effort) noexcept;
ReasoningEffort parse_reasoning_effort(std::string_view text);

struct PriceTable {
  double input_per_1m = 0.625;  // USD per 1M input tokens
  double output_per_1m = 5.0;   // USD per 1M output tokens (reasoning included)
};

struct ProviderConfig {
  std::string model_id = "gpt-5-2025-08-07";
  ReasoningEffort reasoning_effort = ReasoningEffort::High;
  double temperature = 1.0;
  PriceTable price_table;
  std::string endpoint = "https://api.openai.com/v1/responses";

  // Throws InvalidArgument on negative temperature or prices.
  void validate() const;
};

struct Usage {
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::uint64_t reasoning_tokens = 0;  // part of output_tokens
};

struct AttachmentDigest {
  std::string name;
  std::string sha256;
};

struct RequestSummary {
  Stage stage = Stage::StageOne;
  std::string setting_label;  // empty for stage one
  std::vector<AttachmentDigest> attachment_digests;
  std::uint64_t call_index = 0;
};

struct Transcript {
  std::string key;
  RequestSummary request_summary;
  std::string response_text;
  Usage usage;
  std::string created_at;
  // Generation parameters as echoed by the provider, stored verbatim.
  Json provider_echo = Json::object();
};

Json to_json(const Transcript& transcript);
Transcript transcript_from_json(const Json& j);

enum class ProviderMode { Live, Record, Replay };

std::string_view provider_mode_label(ProviderMode mode) noexcept;
ProviderMode parse_provider_mode(std::string_view text);
// WORKBENCH_MODE, when set, overrides the configured mode.
ProviderMode resolve_mode(ProviderMode configured);

// SHA-256 over the rendered template, payload, attachment digests, model,
// reasoning effort, temperature and call index.
std::string transcript_key(const PromptBundle& bundle, const ProviderConfig& config,
                           std::uint64_t call_index);

struct CostReport {
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::uint64_t reasoning_tokens = 0;
  double total_cost = 0.0;      // USD, rounded half-up to cents
  double reasoning_cost = 0.0;  // USD, rounded half-up to cents
};

CostReport accumulate_cost(std::span<const Transcript> transcripts, const ProviderConfig& config);

struct TransportRequest {
  std::string url;
  std::string body;
  std::string api_key;
};

struct TransportResponse {
  int status = 0;
  std::string body;
};

// The only path to the network. Implementations throw std::exception on
// connection-level failures.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResponse post(const TransportRequest& request) = 0;
};

std::shared_ptr<Transport> make_https_transport();

// transcripts/{key}.json, one file per transcript. Concurrent readers,
// serialized writers.
class ReplayStore {
 public:
  explicit ReplayStore(std::filesystem::path directory);

  std::optional<Transcript> load(const std::string& key) const;
  // Raw file bytes, for byte-identity checks.
  std::optional<std::string> load_raw(const std::string& key) const;
  void save(const Transcript& transcript);
  std::vector<Transcript> all() const;
  std::size_t size() const;
  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path directory_;
  mutable std::shared_mutex mutex_;
};

struct GatewayOptions {
  std::optional<std::string> api_key;  // falls back to WORKBENCH_API_KEY
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{2000};
  std::ptrdiff_t parallelism = 4;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
  std::function<std::string()> clock;                    // ISO-8601 UTC timestamp source
};

class Gateway {
 public:
  Gateway(ReplayStore& store, std::shared_ptr<Transport> transport, GatewayOptions options = {});

  // live: network call; record: network call + persist; replay: stored
  // transcript only, never touches the transport.
  // Errors: ProviderError, ReplayMiss, AuthMissing.
  Transcript complete(const PromptBundle& bundle, const ProviderConfig& config, ProviderMode mode,
                      std::uint64_t call_index);

  std::ptrdiff_t parallelism() const noexcept { return options_.parallelism; }
  ReplayStore& store() noexcept { return store_; }

 private:
  TransportResponse send_with_retry(const TransportRequest& request);

  ReplayStore& store_;
  std::shared_ptr<Transport> transport_;
  GatewayOptions options_;
  std::counting_semaphore<64> in_flight_;
};

// Request body for the Responses API; attachments travel with the user turn.
Json build_request_body(const PromptBundle& bundle, const ProviderConfig& config);
// Extracts output text, usage and echoed parameters from a response body.
// Throws ProviderError on an unusable body.
void read_response_body(const std::string& body, Transcript& into);

}  // namespace workbench
