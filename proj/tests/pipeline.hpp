#pragma once

#include <string>
#include <vector>

#include "support.hpp"
#include "workbench/orchestrator.hpp"
#include "workbench/store.hpp"

namespace testsupport {

inline workbench::CitationContext load_context() {
  return workbench::citation_context_from_json(workbench::Json::parse(read_file(fixtures() / "context.json")));
}

inline std::vector<workbench::Attachment> load_fixture_attachments() {
  return workbench::load_attachments((fixtures() / "attachments").string());
}

struct ReplayPipeline {
  std::vector<workbench::StageOneRecord> stage_one;
  std::vector<workbench::StageOneRecord> seeds;
  std::vector<workbench::RunRecord> runs;
};

// The default manifest over the shipped replay transcripts.
inline ReplayPipeline run_replay_pipeline() {
  using namespace workbench;
  ReplayStore replay(fixtures() / "replay" / "transcripts");
  Gateway gateway(replay, nullptr);
  Orchestrator orchestrator(gateway);
  const RunManifest manifest;
  ReplayPipeline out;
  out.stage_one = orchestrator.execute_stage_one(manifest, load_context());
  out.seeds = sample_seeds(out.stage_one, manifest.seed_sample_size, manifest.rng_seed);
  out.runs = orchestrator.execute_stage_two(manifest, out.seeds, load_fixture_attachments());
  return out;
}

inline std::vector<std::pair<std::string, workbench::CellCounts>> table3_counts() {
  std::vector<std::pair<std::string, workbench::CellCounts>> out;
  for (const auto& [code, cells] : workbench::parse_count_table(read_file(fixtures() / "table3_counts.csv"))) {
    workbench::CellCounts c{};
    for (std::size_t s = 0; s < 6; ++s) c[s] = {cells[s], 75};
    out.emplace_back(code, c);
  }
  return out;
}

inline workbench::CodeMatrix table3_matrix() {
  return workbench::synthesize_matrix_from_counts(table3_counts(), workbench::synthetic_layout());
}

inline void populate_store(workbench::CorpusStore& store, const ReplayPipeline& p) {
  for (const auto& r : p.stage_one) store.append_stage_one(r);
  std::vector<std::string> ids;
  for (const auto& s : p.seeds) ids.push_back(s.id);
  store.save_seeds(ids);
  for (const auto& r : p.runs) store.append_run(r);
}

// Stage-one records, seeds and runs from replay plus the Table-3 code matrix.
inline void populate_fixture_store(workbench::CorpusStore& store) {
  populate_store(store, run_replay_pipeline());
  store.import_code_matrix(read_file(fixtures() / "codes_table3.csv"));
}

}  // namespace testsupport
