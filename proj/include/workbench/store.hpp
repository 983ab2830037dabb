#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "workbench/domain.hpp"
#include "workbench/orchestrator.hpp"

namespace workbench {

struct CodeEntry {
  std::string name;
  std::string description;
};

struct Codebook {
  int version = 1;
  std::vector<CodeEntry> codes;
  // new name -> name in the previous version
  std::map<std::string, std::string> renamed_from;

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::string> names() const;
  // Errors: DuplicateName (also for empty names), InvalidArgument.
  void validate() const;
};

Json to_json(const Codebook& codebook);
Codebook codebook_from_json(const Json& j);

// The 21 codes, ordered by decreasing overall frequency.
Codebook default_codebook();

// Binary matrix over hypothesis units: code assignments or marker indicators.
struct BinaryMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> clusters;  // run id per row
  std::vector<PromptSetting> settings;
  std::vector<std::string> columns;
  std::vector<std::uint8_t> cells;  // row-major, rows x columns
  int codebook_version = 0;

  std::size_t rows() const noexcept { return row_ids.size(); }
  std::uint8_t at(std::size_t row, std::size_t col) const { return cells[row * columns.size() + col]; }
  std::uint8_t& at(std::size_t row, std::size_t col) { return cells[row * columns.size() + col]; }
  // Errors: UnknownCode.
  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
  std::string digest() const;
};

using CodeMatrix = BinaryMatrix;
using IndicatorMatrix = BinaryMatrix;

struct CellCount {
  std::size_t count = 0;
  std::size_t denominator = 0;
};

// Indexed like kAllSettings.
using CellCounts = std::array<CellCount, 6>;

// Errors: UnknownCode.
CellCounts cell_counts(const BinaryMatrix& matrix, std::string_view code);

struct LayoutRow {
  std::string row_id;
  std::string cluster;
};

// Rows of each design cell, indexed like kAllSettings, in row order.
using CellLayout = std::array<std::vector<LayoutRow>, 6>;

CellLayout layout_from_units(std::span<const HypothesisUnit> units);
// runs_per_cell runs of rows_per_run rows in every cell, with ids in the
// orchestrator's run-id format.
CellLayout synthetic_layout(std::size_t runs_per_cell = 15, std::size_t rows_per_run = kHypothesesPerRun);

// For each cell, the first `count` rows get a 1. Errors: CountExceedsRows.
BinaryMatrix synthesize_matrix_from_counts(const std::vector<std::pair<std::string, CellCounts>>& counts,
                                           const CellLayout& layout);

// code,4-step/Toward,...,1-step/No-nudge with integer counts.
std::vector<std::pair<std::string, std::array<std::size_t, 6>>> parse_count_table(std::string_view csv);

std::string matrix_to_csv(const BinaryMatrix& matrix);
std::string export_table1(const BinaryMatrix& matrix);
std::string export_table3(const BinaryMatrix& matrix);

struct Assignment {
  std::string hypothesis_id;
  std::string code;
  int value = 0;
  int codebook_version = 1;
};

Json to_json(const Assignment& a);

// Directory-backed store of append-only JSON-lines files. One process holds
// it at a time (flock on .lock); inside the process, reads are concurrent and
// writes serialize.
class CorpusStore {
 public:
  // Creates the directory if needed. Errors: StoreLocked, Io.
  explicit CorpusStore(std::filesystem::path directory);
  ~CorpusStore();
  CorpusStore(const CorpusStore&) = delete;
  CorpusStore& operator=(const CorpusStore&) = delete;

  const std::filesystem::path& directory() const noexcept { return directory_; }
  std::filesystem::path transcripts_dir() const { return directory_ / "transcripts"; }

  void append_stage_one(const StageOneRecord& record);
  std::vector<StageOneRecord> stage_one_records() const;

  void save_seeds(const std::vector<std::string>& ids);
  std::vector<StageOneRecord> seeds() const;

  // Also records the run's hypothesis units.
  void append_run(const RunRecord& record);
  std::vector<RunRecord> runs() const;
  std::optional<RunRecord> run(std::string_view run_id) const;
  // Errors: RunReferenced, InvalidArgument (unknown run).
  void delete_run(std::string_view run_id);

  std::vector<HypothesisUnit> hypotheses() const;
  std::vector<HypothesisUnit> hypotheses_for_run(std::string_view run_id) const;

  Codebook codebook() const;
  std::vector<Codebook> codebooks() const;
  // Stamps version = latest + 1. Errors: DuplicateName, InvalidArgument.
  Codebook save_codebook(Codebook proposed);

  // Errors: UnknownHypothesis, UnknownCode, NonBinaryCell, DuplicateRow,
  // InvalidArgument (header). Nothing is written unless every row is valid.
  BinaryMatrix import_code_matrix(std::string_view csv);
  // Errors: UnknownHypothesis, UnknownCode, NonBinaryCell.
  Assignment set_assignment(const std::string& hypothesis_id, const std::string& code, int value);
  // Current value of every assigned cell, names migrated to the current codebook.
  std::vector<Assignment> assignments() const;

  bool has_matrix() const;
  // Rows: every stored hypothesis unit; columns: current codebook.
  // Errors: NoMatrix.
  BinaryMatrix code_matrix() const;

  // Digest over every store file; unchanged by reads.
  std::string digest() const;

 private:
  void load();
  void append_line(const std::string& file, const Json& j);
  std::vector<Assignment> current_assignments_locked() const;
  BinaryMatrix code_matrix_locked() const;

  std::filesystem::path directory_;
  int lock_fd_ = -1;
  mutable std::shared_mutex mutex_;

  std::vector<StageOneRecord> stage_one_;
  std::vector<std::string> seed_ids_;
  std::vector<RunRecord> runs_;
  std::vector<HypothesisUnit> units_;
  std::vector<Codebook> codebooks_;
  std::vector<Assignment> events_;
};

}  // namespace workbench
