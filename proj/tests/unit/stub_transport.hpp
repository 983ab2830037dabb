#pragma once

#include <deque>
#include <functional>
#include <mutex>
#include <vector>

#include "workbench/provider.hpp"

namespace testsupport {

// Scripted transport: each post() pops the next scripted step; once the
// script is empty, `fallback` answers.
class StubTransport : public workbench::Transport {
 public:
  using Step = std::function<workbench::TransportResponse(const workbench::TransportRequest&)>;

  void push(Step step) {
    std::lock_guard lock(mutex_);
    script_.push_back(std::move(step));
  }
  void push_status(int status, std::string body = "{}") {
    push([status, body](const workbench::TransportRequest&) { return workbench::TransportResponse{status, body}; });
  }
  void push_throw(std::string what) {
    push([what](const workbench::TransportRequest&) -> workbench::TransportResponse {
      throw std::runtime_error(what);
    });
  }

  workbench::TransportResponse post(const workbench::TransportRequest& request) override {
    Step step;
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(request);
      if (!script_.empty()) {
        step = std::move(script_.front());
        script_.pop_front();
      } else {
        step = fallback;
      }
    }
    if (!step) return {500, "no scripted response"};
    return step(request);
  }

  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
  }
  std::vector<workbench::TransportRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

  Step fallback;

 private:
  mutable std::mutex mutex_;
  std::deque<Step> script_;
  std::vector<workbench::TransportRequest> requests_;
};

inline std::string response_body(const std::string& text, std::uint64_t in = 10, std::uint64_t out = 5,
                                 std::uint64_t reasoning = 2) {
  workbench::Json j{{"model", "gpt-5-2025-08-07"},
                    {"temperature", 1.0},
                    {"output", workbench::Json::array({workbench::Json{
                                   {"type", "message"},
                                   {"content", workbench::Json::array({workbench::Json{{"type", "output_text"},
                                                                                       {"text", text}}})}}})},
                    {"usage",
                     {{"input_tokens", in},
                      {"output_tokens", out},
                      {"output_tokens_details", {{"reasoning_tokens", reasoning}}}}}};
  return j.dump();
}

}  // namespace testsupport
