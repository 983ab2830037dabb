#include "workbench/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "csv.hpp"
#include "workbench/digest.hpp"
#include "workbench/error.hpp"

namespace workbench {

namespace {

constexpr const char* kStageOneFile = "stage1.jsonl";
constexpr const char* kSeedsFile = "seeds.json";
constexpr const char* kRunsFile = "runs.jsonl";
constexpr const char* kHypothesesFile = "hypotheses.jsonl";
constexpr const char* kCodebooksFile = "codebooks.jsonl";
constexpr const char* kAssignmentsFile = "assignments.jsonl";

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::vector<Json> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Io, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string percent1(std::size_t count, std::size_t total) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total));
  return buf;
}

template <typename T, typename Key>
void upsert(std::vector<T>& items, T item, Key key) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return key(x) == key(item); });
  if (it == items.end()) {
    items.push_back(std::move(item));
  } else {
    *it = std::move(item);
  }
}

const std::array<std::pair<const char*, const char*>, 21> kDefaultCodes = {{
    {"Agile", "Justifying temporary relaxation of the ref\xE2\x80\x93" "cit distinction and its flexible use"},
    {"Preempt", "Preempting potential criticism about (mis)use of the distinction"},
    {"Aware", "Signaling familiarity with the distinction and its policing"},
    {"MuteGW", "Downplaying G&W's discussion of the distinction"},
    {"Bridge", "Bridging distinct intellectual camps to signal inclusivity or recruit multiple audiences"},
    {"Test", "Recasting the distinction as an empirical question to be examined with data"},
    {"Pragma", "Projecting a pragmatic and empirical stance"},
    {"Agency", "Asserting authority to reshape the distinction on one's own terms"},
    {"Payoff", "Deferring the distinction to foreground empirical results as the paper's payoff"},
    {"UseGW", "Borrowing G&W's authority instrumentally"},
    {"Canon", "Normalizing the distinction as consensus through a tidy genealogy"},
    {"SSS", "Positioning the paper for the SSS journal, appealing to its reviewers' expectations"},
    {"SideP", "Aligning with Price's bibliometric program rather than with sociology of science"},
    {"PrioP", "Emphasizing Price's priority or originality"},
    {"UseP", "Borrowing Price's authority instrumentally"},
    {"NegP", "Challenging Price's discussion of the distinction"},
    {"NegGW", "Challenging G&W's discussion of the distinction"},
    {"NegGEN", "Challenging the discussion of the distinction in general"},
    {"Teach", "Orienting readers to sources primarily for pedagogy"},
    {"MuteGEN", "Downplaying the discussion of the distinction in general"},
    {"MuteP", "Downplaying Price's discussion of the distinction"},
}};

}  // namespace

// ---------------------------------------------------------------------------
// Codebook

std::optional<std::size_t> Codebook::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Codebook::names() const {
  std::vector<std::string> out;
  for (const auto& c : codes) out.push_back(c.name);
  return out;
}

void Codebook::validate() const {
  std::set<std::string> seen;
  for (const auto& c : codes) {
    if (trim(c.name).empty() || trim(c.name) != c.name) {
      fail(ErrorCode::DuplicateName, "code names must be non-empty and carry no surrounding whitespace");
    }
    if (c.name.find_first_of(",\"\n") != std::string::npos) {
      fail(ErrorCode::InvalidArgument, "code name \"" + c.name + "\" contains a CSV delimiter");
    }
    if (!seen.insert(c.name).second) fail(ErrorCode::DuplicateName, "duplicate code name \"" + c.name + "\"");
  }
  std::set<std::string> sources;
  for (const auto& [to, from] : renamed_from) {
    if (!index_of(to)) fail(ErrorCode::InvalidArgument, "rename target \"" + to + "\" is not in the codebook");
    if (!sources.insert(from).second) fail(ErrorCode::DuplicateName, "\"" + from + "\" renamed twice");
  }
}

Json to_json(const Codebook& cb) {
  Json codes = Json::array();
  for (const auto& c : cb.codes) codes.push_back(Json{{"name", c.name}, {"description", c.description}});
  Json renamed = Json::object();
  for (const auto& [to, from] : cb.renamed_from) renamed[to] = from;
  return Json{{"version", cb.version}, {"codes", std::move(codes)}, {"renamed_from", std::move(renamed)}};
}

Codebook codebook_from_json(const Json& j) {
  try {
    Codebook cb;
    cb.version = j.value("version", 0);
    for (const auto& c : j.at("codes")) {
      cb.codes.push_back({c.at("name").get<std::string>(), c.value("description", "")});
    }
    if (auto it = j.find("renamed_from"); it != j.end() && it->is_object()) {
      for (const auto& [to, from] : it->items()) cb.renamed_from[to] = from.get<std::string>();
    }
    return cb;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("codebook: ") + e.what());
  }
}

Codebook default_codebook() {
  Codebook cb;
  cb.version = 1;
  for (const auto& [name, description] : kDefaultCodes) cb.codes.push_back({name, description});
  return cb;
}

// ---------------------------------------------------------------------------
// Matrices

std::size_t BinaryMatrix::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) fail(ErrorCode::UnknownCode, "unknown column \"" + std::string(name) + "\"");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> BinaryMatrix::column(std::string_view name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::string BinaryMatrix::digest() const {
  FieldHasher h;
  h.field("binary-matrix-v1").field(std::to_string(codebook_version));
  h.field(std::to_string(columns.size()));
  for (const auto& c : columns) h.field(c);
  h.field(std::to_string(rows()));
  for (std::size_t r = 0; r < rows(); ++r) {
    h.field(row_ids[r]).field(clusters[r]).field(setting_label(settings[r]));
  }
  h.field(std::string_view(reinterpret_cast<const char*>(cells.data()), cells.size()));
  return h.hex();
}

CellCounts cell_counts(const BinaryMatrix& matrix, std::string_view code) {
  const std::size_t c = matrix.column_index(code);
  CellCounts out{};
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    auto& cell = out[setting_index(matrix.settings[r])];
    ++cell.denominator;
    cell.count += matrix.at(r, c);
  }
  return out;
}

CellLayout layout_from_units(std::span<const HypothesisUnit> units) {
  CellLayout layout;
  for (const auto& u : units) layout[setting_index(u.setting)].push_back({u.id(), u.run_id});
  return layout;
}

CellLayout synthetic_layout(std::size_t runs_per_cell, std::size_t rows_per_run) {
  CellLayout layout;
  for (std::size_t run = 0; run < runs_per_cell; ++run) {
    for (std::size_t s = 0; s < kAllSettings.size(); ++s) {
      const std::string run_id = make_run_id(run, kAllSettings[s], run * kAllSettings.size() + s);
      for (std::size_t j = 1; j <= rows_per_run; ++j) {
        layout[s].push_back({hypothesis_id(run_id, static_cast<int>(j)), run_id});
      }
    }
  }
  return layout;
}

BinaryMatrix synthesize_matrix_from_counts(const std::vector<std::pair<std::string, CellCounts>>& counts,
                                           const CellLayout& layout) {
  BinaryMatrix m;
  for (const auto& [code, _] : counts) m.columns.push_back(code);
  for (std::size_t s = 0; s < layout.size(); ++s) {
    for (const auto& row : layout[s]) {
      m.row_ids.push_back(row.row_id);
      m.clusters.push_back(row.cluster);
      m.settings.push_back(kAllSettings[s]);
    }
  }
  m.cells.assign(m.rows() * m.columns.size(), 0);
  std::size_t offset = 0;
  for (std::size_t s = 0; s < layout.size(); ++s) {
    for (std::size_t c = 0; c < counts.size(); ++c) {
      const std::size_t want = counts[c].second[s].count;
      if (want > layout[s].size()) {
        fail(ErrorCode::CountExceedsRows, counts[c].first + " asks for " + std::to_string(want) + " rows in " +
                                              setting_label(kAllSettings[s]) + ", which has " +
                                              std::to_string(layout[s].size()));
      }
      for (std::size_t r = 0; r < want; ++r) m.at(offset + r, c) = 1;
    }
    offset += layout[s].size();
  }
  return m;
}

std::vector<std::pair<std::string, std::array<std::size_t, 6>>> parse_count_table(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows[0].empty() || trim(rows[0][0]) != "code") {
    fail(ErrorCode::InvalidArgument, "count table must start with a \"code\" column");
  }
  std::vector<std::size_t> slot_of_col;
  for (std::size_t c = 1; c < rows[0].size(); ++c) {
    slot_of_col.push_back(setting_index(parse_setting_label(trim(rows[0][c]))));
  }
  if (std::set<std::size_t>(slot_of_col.begin(), slot_of_col.end()).size() != 6 || slot_of_col.size() != 6) {
    fail(ErrorCode::InvalidArgument, "count table needs the six setting columns exactly once");
  }
  std::vector<std::pair<std::string, std::array<std::size_t, 6>>> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 7) fail(ErrorCode::InvalidArgument, "count table row " + std::to_string(r) + " needs 7 fields");
    std::array<std::size_t, 6> counts{};
    for (std::size_t c = 1; c < 7; ++c) {
      const std::string v = trim(rows[r][c]);
      if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        fail(ErrorCode::InvalidArgument, "count table cell \"" + v + "\" is not a count");
      }
      counts[slot_of_col[c - 1]] = std::stoul(v);
    }
    out.emplace_back(trim(rows[r][0]), counts);
  }
  return out;
}

std::string matrix_to_csv(const BinaryMatrix& m) {
  std::string out = "hypothesis_id";
  for (const auto& c : m.columns) out += "," + csv::field(c);
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += csv::field(m.row_ids[r]);
    for (std::size_t c = 0; c < m.columns.size(); ++c) out += m.at(r, c) ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

std::string export_table1(const BinaryMatrix& m) {
  std::string out = "code,N,percent\n";
  for (const auto& code : m.columns) {
    std::size_t n = 0;
    for (const auto& cell : cell_counts(m, code)) n += cell.count;
    out += csv::field(code) + "," + std::to_string(n) + "," + percent1(n, m.rows()) + "\n";
  }
  return out;
}

std::string export_table3(const BinaryMatrix& m) {
  std::string out = "code,setting,count,percent\n";
  for (const auto& code : m.columns) {
    const CellCounts counts = cell_counts(m, code);
    for (std::size_t s = 0; s < counts.size(); ++s) {
      out += csv::field(code) + "," + setting_label(kAllSettings[s]) + "," + std::to_string(counts[s].count) + "," +
             percent1(counts[s].count, counts[s].denominator) + "\n";
    }
  }
  return out;
}

Json to_json(const Assignment& a) {
  return Json{{"hypothesis_id", a.hypothesis_id},
              {"code", a.code},
              {"value", a.value},
              {"codebook_version", a.codebook_version}};
}

// ---------------------------------------------------------------------------
// CorpusStore

CorpusStore::CorpusStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) fail(ErrorCode::Io, "cannot create store " + directory_.string() + ": " + ec.message());
  const auto lock_path = directory_ / ".lock";
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) fail(ErrorCode::Io, "cannot open " + lock_path.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    fail(ErrorCode::StoreLocked, "store " + directory_.string() + " is in use by another process");
  }
  try {
    load();
  } catch (...) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw;
  }
}

CorpusStore::~CorpusStore() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void CorpusStore::load() {
  for (const auto& j : read_jsonl(directory_ / kStageOneFile)) {
    upsert(stage_one_, stage_one_record_from_json(j), [](const StageOneRecord& r) { return r.id; });
  }
  if (std::filesystem::exists(directory_ / kSeedsFile)) {
    seed_ids_ = Json::parse(read_text(directory_ / kSeedsFile)).get<std::vector<std::string>>();
  }
  std::set<std::string> deleted;
  for (const auto& j : read_jsonl(directory_ / kRunsFile)) {
    if (j.value("deleted", false)) {
      const std::string id = j.at("run_id").get<std::string>();
      std::erase_if(runs_, [&](const RunRecord& r) { return r.run_id == id; });
      deleted.insert(id);
      continue;
    }
    RunRecord r = run_record_from_json(j);
    deleted.erase(r.run_id);
    upsert(runs_, std::move(r), [](const RunRecord& x) { return x.run_id; });
  }
  std::unordered_set<std::string> live;
  for (const auto& r : runs_) live.insert(r.run_id);
  for (const auto& j : read_jsonl(directory_ / kHypothesesFile)) {
    HypothesisUnit u = hypothesis_unit_from_json(j);
    if (!live.count(u.run_id)) continue;
    upsert(units_, std::move(u), [](const HypothesisUnit& x) { return x.id(); });
  }
  for (const auto& j : read_jsonl(directory_ / kCodebooksFile)) codebooks_.push_back(codebook_from_json(j));
  if (codebooks_.empty()) {
    codebooks_.push_back(default_codebook());
    append_line(kCodebooksFile, to_json(codebooks_.back()));
  }
  for (const auto& j : read_jsonl(directory_ / kAssignmentsFile)) {
    events_.push_back(Assignment{j.at("hypothesis_id").get<std::string>(), j.at("code").get<std::string>(),
                                 j.at("value").get<int>(), j.value("codebook_version", 1)});
  }
}

void CorpusStore::append_line(const std::string& file, const Json& j) {
  std::ofstream out(directory_ / file, std::ios::app | std::ios::binary);
  out << j.dump() << '\n';
  out.flush();
  if (!out) fail(ErrorCode::Io, "cannot append to " + (directory_ / file).string());
}

void CorpusStore::append_stage_one(const StageOneRecord& record) {
  std::unique_lock lock(mutex_);
  const Json j = to_json(record);
  for (const auto& r : stage_one_) {
    if (r.id == record.id && to_json(r) == j) return;
  }
  append_line(kStageOneFile, j);
  upsert(stage_one_, record, [](const StageOneRecord& r) { return r.id; });
}

std::vector<StageOneRecord> CorpusStore::stage_one_records() const {
  std::shared_lock lock(mutex_);
  auto out = stage_one_;
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

void CorpusStore::save_seeds(const std::vector<std::string>& ids) {
  std::unique_lock lock(mutex_);
  for (const auto& id : ids) {
    if (std::none_of(stage_one_.begin(), stage_one_.end(), [&](const auto& r) { return r.id == id; })) {
      fail(ErrorCode::InvalidArgument, "seed " + id + " is not a stored stage-one record");
    }
  }
  std::ofstream out(directory_ / kSeedsFile, std::ios::trunc | std::ios::binary);
  out << Json(ids).dump() << '\n';
  if (!out) fail(ErrorCode::Io, "cannot write seeds");
  seed_ids_ = ids;
}

std::vector<StageOneRecord> CorpusStore::seeds() const {
  std::shared_lock lock(mutex_);
  std::vector<StageOneRecord> out;
  for (const auto& id : seed_ids_) {
    for (const auto& r : stage_one_) {
      if (r.id == id) out.push_back(r);
    }
  }
  return out;
}

void CorpusStore::append_run(const RunRecord& record) {
  std::unique_lock lock(mutex_);
  const Json j = to_json(record);
  for (const auto& r : runs_) {
    if (r.run_id == record.run_id && to_json(r) == j) return;
  }
  append_line(kRunsFile, j);
  std::erase_if(units_, [&](const HypothesisUnit& u) { return u.run_id == record.run_id; });
  if (record.parsed) {
    for (const auto& u : hypothesis_units(*record.parsed)) {
      append_line(kHypothesesFile, to_json(u));
      units_.push_back(u);
    }
  }
  upsert(runs_, record, [](const RunRecord& r) { return r.run_id; });
}

std::vector<RunRecord> CorpusStore::runs() const {
  std::shared_lock lock(mutex_);
  return runs_;
}

std::optional<RunRecord> CorpusStore::run(std::string_view run_id) const {
  std::shared_lock lock(mutex_);
  for (const auto& r : runs_) {
    if (r.run_id == run_id) return r;
  }
  return std::nullopt;
}

void CorpusStore::delete_run(std::string_view run_id) {
  std::unique_lock lock(mutex_);
  if (std::none_of(runs_.begin(), runs_.end(), [&](const auto& r) { return r.run_id == run_id; })) {
    fail(ErrorCode::InvalidArgument, "unknown run " + std::string(run_id));
  }
  std::unordered_set<std::string> unit_ids;
  for (const auto& u : units_) {
    if (u.run_id == run_id) unit_ids.insert(u.id());
  }
  for (const auto& a : events_) {
    if (unit_ids.count(a.hypothesis_id)) {
      fail(ErrorCode::RunReferenced, "run " + std::string(run_id) + " has code assignments");
    }
  }
  append_line(kRunsFile, Json{{"run_id", run_id}, {"deleted", true}});
  std::erase_if(runs_, [&](const RunRecord& r) { return r.run_id == run_id; });
  std::erase_if(units_, [&](const HypothesisUnit& u) { return u.run_id == run_id; });
}

std::vector<HypothesisUnit> CorpusStore::hypotheses() const {
  std::shared_lock lock(mutex_);
  return units_;
}

std::vector<HypothesisUnit> CorpusStore::hypotheses_for_run(std::string_view run_id) const {
  std::shared_lock lock(mutex_);
  std::vector<HypothesisUnit> out;
  for (const auto& u : units_) {
    if (u.run_id == run_id) out.push_back(u);
  }
  return out;
}

Codebook CorpusStore::codebook() const {
  std::shared_lock lock(mutex_);
  return codebooks_.back();
}

std::vector<Codebook> CorpusStore::codebooks() const {
  std::shared_lock lock(mutex_);
  return codebooks_;
}

Codebook CorpusStore::save_codebook(Codebook proposed) {
  std::unique_lock lock(mutex_);
  proposed.validate();
  const Codebook& previous = codebooks_.back();
  for (const auto& [to, from] : proposed.renamed_from) {
    if (!previous.index_of(from)) {
      fail(ErrorCode::InvalidArgument, "renamed code \"" + from + "\" is not in version " +
                                           std::to_string(previous.version));
    }
  }
  proposed.version = previous.version + 1;
  append_line(kCodebooksFile, to_json(proposed));
  codebooks_.push_back(proposed);
  return proposed;
}

std::vector<Assignment> CorpusStore::current_assignments_locked() const {
  const Codebook& current = codebooks_.back();
  // Carry each event's code name forward through later renames.
  auto migrate = [&](std::string code, int version) -> std::optional<std::string> {
    for (const auto& cb : codebooks_) {
      if (cb.version <= version) continue;
      for (const auto& [to, from] : cb.renamed_from) {
        if (from == code) {
          code = to;
          break;
        }
      }
    }
    if (!current.index_of(code)) return std::nullopt;
    return code;
  };
  std::unordered_set<std::string> live;
  for (const auto& u : units_) live.insert(u.id());

  std::vector<Assignment> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& e : events_) {
    if (!live.count(e.hypothesis_id)) continue;
    auto code = migrate(e.code, e.codebook_version);
    if (!code) continue;
    Assignment a{e.hypothesis_id, *code, e.value, e.codebook_version};
    const std::string key = a.hypothesis_id + '\x1f' + a.code;
    if (auto it = slot.find(key); it != slot.end()) {
      out[it->second] = std::move(a);
    } else {
      slot.emplace(key, out.size());
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<Assignment> CorpusStore::assignments() const {
  std::shared_lock lock(mutex_);
  return current_assignments_locked();
}

bool CorpusStore::has_matrix() const {
  std::shared_lock lock(mutex_);
  return !events_.empty() && !units_.empty();
}

BinaryMatrix CorpusStore::code_matrix_locked() const {
  if (events_.empty() || units_.empty()) fail(ErrorCode::NoMatrix, "no code assignments have been stored");
  const Codebook& cb = codebooks_.back();
  BinaryMatrix m;
  m.columns = cb.names();
  m.codebook_version = cb.version;
  std::unordered_map<std::string, std::size_t> row_of;
  for (const auto& u : units_) {
    row_of.emplace(u.id(), m.rows());
    m.row_ids.push_back(u.id());
    m.clusters.push_back(u.run_id);
    m.settings.push_back(u.setting);
  }
  m.cells.assign(m.rows() * m.columns.size(), 0);
  for (const auto& a : current_assignments_locked()) {
    m.at(row_of.at(a.hypothesis_id), *cb.index_of(a.code)) = static_cast<std::uint8_t>(a.value);
  }
  return m;
}

BinaryMatrix CorpusStore::code_matrix() const {
  std::shared_lock lock(mutex_);
  return code_matrix_locked();
}

BinaryMatrix CorpusStore::import_code_matrix(std::string_view text) {
  std::unique_lock lock(mutex_);
  const Codebook& cb = codebooks_.back();
  const auto rows = csv::parse(text);
  if (rows.empty() || rows[0].empty() || trim(rows[0][0]) != "hypothesis_id") {
    fail(ErrorCode::InvalidArgument, "code matrix header must start with hypothesis_id");
  }
  std::vector<std::string> columns;
  for (std::size_t c = 1; c < rows[0].size(); ++c) {
    std::string name = trim(rows[0][c]);
    if (!cb.index_of(name)) fail(ErrorCode::UnknownCode, "unknown code column \"" + name + "\"");
    if (std::find(columns.begin(), columns.end(), name) != columns.end()) {
      fail(ErrorCode::InvalidArgument, "code column \"" + name + "\" appears twice");
    }
    columns.push_back(std::move(name));
  }
  std::unordered_set<std::string> known;
  for (const auto& u : units_) known.insert(u.id());

  std::unordered_map<std::string, int> current;
  for (const auto& a : current_assignments_locked()) current[a.hypothesis_id + '\x1f' + a.code] = a.value;

  std::unordered_set<std::string> seen;
  std::vector<Assignment> pending;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string id = trim(row[0]);
    if (row.size() != columns.size() + 1) {
      fail(ErrorCode::InvalidArgument, "row " + std::to_string(r) + " (" + id + ") has " +
                                           std::to_string(row.size()) + " fields, expected " +
                                           std::to_string(columns.size() + 1));
    }
    if (!known.count(id)) fail(ErrorCode::UnknownHypothesis, "unknown hypothesis id \"" + id + "\"");
    if (!seen.insert(id).second) fail(ErrorCode::DuplicateRow, "hypothesis \"" + id + "\" appears twice");
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string v = trim(row[c + 1]);
      if (v != "0" && v != "1") {
        fail(ErrorCode::NonBinaryCell, "cell (" + id + ", " + columns[c] + ") = \"" + v + "\" is not 0 or 1");
      }
      const int value = v == "1" ? 1 : 0;
      const auto it = current.find(id + '\x1f' + columns[c]);
      const int before = it == current.end() ? 0 : it->second;
      if (value != before) pending.push_back({id, columns[c], value, cb.version});
    }
  }
  for (const auto& a : pending) {
    append_line(kAssignmentsFile, to_json(a));
    events_.push_back(a);
  }
  if (events_.empty() && !units_.empty() && rows.size() > 1) {
    // An all-zero import still establishes a matrix.
    Assignment a{trim(rows[1][0]), columns.empty() ? cb.codes.front().name : columns.front(), 0, cb.version};
    append_line(kAssignmentsFile, to_json(a));
    events_.push_back(a);
  }
  return code_matrix_locked();
}

Assignment CorpusStore::set_assignment(const std::string& hypothesis_id, const std::string& code, int value) {
  std::unique_lock lock(mutex_);
  const Codebook& cb = codebooks_.back();
  if (std::none_of(units_.begin(), units_.end(), [&](const auto& u) { return u.id() == hypothesis_id; })) {
    fail(ErrorCode::UnknownHypothesis, "unknown hypothesis id \"" + hypothesis_id + "\"");
  }
  if (!cb.index_of(code)) fail(ErrorCode::UnknownCode, "unknown code \"" + code + "\"");
  if (value != 0 && value != 1) fail(ErrorCode::NonBinaryCell, "value must be 0 or 1");
  Assignment a{hypothesis_id, code, value, cb.version};
  append_line(kAssignmentsFile, to_json(a));
  events_.push_back(a);
  return a;
}

std::string CorpusStore::digest() const {
  std::shared_lock lock(mutex_);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(directory_)) {
    if (e.is_regular_file() && e.path().filename() != ".lock") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  FieldHasher h;
  for (const auto& f : files) {
    h.field(std::filesystem::relative(f, directory_).generic_string());
    h.field(read_text(f));
  }
  return h.hex();
}

}  // namespace workbench
