#pragma once

#include <memory>
#include <string>

#include "workbench/analysis.hpp"
#include "workbench/store.hpp"

namespace workbench {

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8787;  // 0 picks a free port
  AnalysisOptions analysis;
  std::string static_dir;  // optional built UI assets
};

// JSON API over a CorpusStore. Reads run concurrently; writes go through the
// store's serialized writer.
class Service {
 public:
  explicit Service(CorpusStore& store, ServeConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and starts serving on a background thread. Errors: PortBusy.
  void start();
  // Stops accepting, lets in-flight requests finish, joins the thread.
  void stop();
  int port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace workbench
