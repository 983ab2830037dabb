#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "workbench/workbench.h"

namespace {

enum Exit { kOk = 0, kGeneral = 1, kValidation = 2, kProvider = 3, kIncomplete = 4 };

int exit_code(wb_status s) {
  switch (s) {
    case WB_OK: return kOk;
    case WB_PROVIDER_ERROR:
    case WB_REPLAY_MISS:
    case WB_AUTH_MISSING: return kProvider;
    case WB_PLAN_INCOMPLETE: return kIncomplete;
    case WB_IO:
    case WB_INTERNAL:
    case WB_PORT_BUSY:
    case WB_STORE_LOCKED: return kGeneral;
    default: return kValidation;
  }
}

int report_failure(wb_status s) {
  std::cerr << "error [" << wb_status_name(s) << "]: " << wb_last_error() << '\n';
  return exit_code(s);
}

struct Text {
  char* ptr = nullptr;
  ~Text() { wb_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

struct StoreHandle {
  wb_store* ptr = nullptr;
  ~StoreHandle() { wb_store_close(ptr); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

struct Globals {
  std::string store = "workbench-store";
  std::string transcripts;
  std::string mode;
  std::string plan;
  int parallelism = 0;

  nlohmann::ordered_json provider_options() const {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    if (!transcripts.empty()) o["transcripts"] = transcripts;
    if (!mode.empty()) o["mode"] = mode;
    if (!plan.empty()) o["plan"] = plan;
    if (parallelism > 0) o["parallelism"] = parallelism;
    return o;
  }
};

struct AnalysisFlags {
  std::string correction = "CR1";
  std::string reference = "normal";
  double alpha = 0.05;
  bool raw = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--correction", correction, "Cluster-robust correction")->check(CLI::IsMember({"CR0", "CR1"}));
    cmd->add_option("--reference", reference, "Reference distribution")->check(CLI::IsMember({"normal", "t"}));
    cmd->add_option("--alpha", alpha, "FDR level for markers");
    cmd->add_flag("--raw", raw, "Raw proportions instead of percentage points");
  }

  nlohmann::ordered_json json() const {
    return {{"correction", correction}, {"reference", reference}, {"alpha", alpha}, {"raw", raw}};
  }
};

template <typename Fn>
int with_store(const Globals& g, Fn fn) {
  StoreHandle store;
  if (const wb_status s = wb_store_open(g.store.c_str(), &store.ptr); s != WB_OK) return report_failure(s);
  return fn(store.ptr);
}

int print_result(wb_status s, const Text& text) {
  if (s != WB_OK) return report_failure(s);
  std::cout << text.str();
  if (!text.str().empty() && text.str().back() != '\n') std::cout << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Citation-context interpretation workbench"};
  app.require_subcommand(1);
  Globals g;
  if (const char* env = std::getenv("WORKBENCH_STORE"); env != nullptr && *env != '\0') g.store = env;
  app.add_option("--store", g.store, "Store directory")->capture_default_str();
  app.add_option("--transcripts", g.transcripts, "Replay directory (default <store>/transcripts)");
  app.add_option("--mode", g.mode, "Provider mode")->check(CLI::IsMember({"live", "record", "replay"}));
  app.add_option("--plan", g.plan, "Run manifest (key = value)");
  app.add_option("--parallelism", g.parallelism, "In-flight provider calls");

  int result = kOk;

  auto* stage1 = app.add_subcommand("stage1", "Run the stage-one classification");
  std::size_t n = 30;
  std::string context = "fixtures/context.json";
  stage1->add_option("--n", n, "Number of runs")->capture_default_str();
  stage1->add_option("--context", context, "Citation context JSON")->capture_default_str();
  stage1->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      auto o = g.provider_options();
      o["context"] = context;
      o["n"] = n;
      Text out;
      return print_result(wb_stage_one(s, o.dump().c_str(), &out.ptr), out);
    });
  });

  auto* sample = app.add_subcommand("sample", "Sample stage-one outputs as stage-two seeds");
  std::size_t k = 15;
  std::uint64_t seed = 1970;
  sample->add_option("--k", k, "Sample size")->capture_default_str();
  sample->add_option("--seed", seed, "RNG seed")->capture_default_str();
  sample->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      auto o = g.provider_options();
      o["k"] = k;
      o["seed"] = seed;
      Text out;
      return print_result(wb_sample(s, o.dump().c_str(), &out.ptr), out);
    });
  });

  auto* stage2 = app.add_subcommand("stage2", "Run the stage-two grid over the sampled seeds");
  std::string attachments = "fixtures/attachments";
  std::string stage2_plan;
  stage2->add_option("--plan", stage2_plan, "Run manifest");
  stage2->add_option("--attachments", attachments, "Full-text directory")->capture_default_str();
  stage2->callback([&] {
    if (!stage2_plan.empty()) g.plan = stage2_plan;
    result = with_store(g, [&](wb_store* s) {
      auto o = g.provider_options();
      o["attachments"] = attachments;
      Text out;
      return print_result(wb_stage_two(s, o.dump().c_str(), &out.ptr), out);
    });
  });

  auto* import = app.add_subcommand("import-codes", "Import a 0/1 code matrix");
  std::string codes_csv;
  import->add_option("csv", codes_csv, "hypothesis_id,<code>,... CSV")->required();
  import->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      const std::string text = read_file(codes_csv);
      Text out;
      return print_result(wb_import_codes(s, text.c_str(), &out.ptr), out);
    });
  });

  auto* synth = app.add_subcommand("synthesize-codes", "Build a code matrix from per-cell counts");
  std::string counts_csv, synth_out;
  synth->add_option("counts", counts_csv, "code,<six settings> count table")->required();
  synth->add_option("-o,--output", synth_out, "Output CSV (default stdout)");
  synth->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      const std::string text = read_file(counts_csv);
      Text out;
      const wb_status st = wb_synthesize_codes(s, text.c_str(), &out.ptr);
      if (st != WB_OK) return report_failure(st);
      if (synth_out.empty()) std::cout << out.str();
      else write_file(synth_out, out.str());
      return static_cast<int>(kOk);
    });
  });

  auto* analyze = app.add_subcommand("analyze", "Fit the 2x3 models and write effects.csv");
  AnalysisFlags analyze_flags;
  analyze_flags.add(analyze);
  bool markers = false;
  std::string out_dir = "analysis";
  analyze->add_flag("--markers", markers, "Include the lexical echo study");
  analyze->add_option("--out-dir", out_dir, "Directory for effects.csv, omnibus.csv, report.json")->capture_default_str();
  analyze->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      auto o = analyze_flags.json();
      o["markers"] = markers;
      for (const char* kind : {"effects", "omnibus", "json"}) {
        o["output"] = kind;
        Text out;
        if (const wb_status st = wb_analyze(s, o.dump().c_str(), &out.ptr); st != WB_OK) return report_failure(st);
        const std::string name = std::string(kind) == "json" ? "report.json" : std::string(kind) + ".csv";
        write_file(std::filesystem::path(out_dir) / name, out.str());
        std::cout << (std::filesystem::path(out_dir) / name).string() << '\n';
      }
      return static_cast<int>(kOk);
    });
  });

  auto* report = app.add_subcommand("report", "Dot-and-whisker rows for one effect family");
  AnalysisFlags report_flags;
  report_flags.add(report);
  std::string family, format = "csv";
  bool report_markers = false;
  report->add_option("--family", family, "4step | toward | away")->required();
  report->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  report->add_flag("--markers", report_markers, "Marker effects instead of codes");
  report->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      auto o = report_flags.json();
      o["family"] = family;
      o["format"] = format;
      o["subject"] = report_markers ? "markers" : "codes";
      Text out;
      return print_result(wb_report(s, o.dump().c_str(), &out.ptr), out);
    });
  });

  auto* exp = app.add_subcommand("export", "Export table1, table3 or the code matrix as CSV");
  std::string which;
  exp->add_option("which", which, "table1 | table3 | matrix")->required();
  exp->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      Text out;
      return print_result(wb_export(s, which.c_str(), &out.ptr), out);
    });
  });

  auto* counts = app.add_subcommand("cell-counts", "Per-setting counts for one code");
  std::string code;
  counts->add_option("--code", code, "Code name")->required();
  counts->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      Text out;
      return print_result(wb_cell_counts(s, nlohmann::ordered_json{{"code", code}}.dump().c_str(), &out.ptr), out);
    });
  });

  auto* hedge = app.add_subcommand("hedge", "Hedging phrases in stage-one citation expectations");
  hedge->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      Text out;
      return print_result(wb_hedge_counts(s, &out.ptr), out);
    });
  });

  auto* reiter = app.add_subcommand("reiter", "Co-occurrence of codes with a term");
  std::string term = "reiter";
  reiter->add_option("--term", term, "Term pattern")->capture_default_str();
  reiter->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      Text out;
      return print_result(wb_reiter(s, nlohmann::ordered_json{{"term", term}}.dump().c_str(), &out.ptr), out);
    });
  });

  auto* cost = app.add_subcommand("cost", "Token and cost totals over stored transcripts");
  double input_price = -1.0, output_price = -1.0;
  cost->add_option("--input-price", input_price, "USD per 1M input tokens");
  cost->add_option("--output-price", output_price, "USD per 1M output tokens");
  cost->callback([&] {
    result = with_store(g, [&](wb_store* s) {
      auto o = g.provider_options();
      if (input_price >= 0.0) o["input_price_per_1m"] = input_price;
      if (output_price >= 0.0) o["output_price_per_1m"] = output_price;
      Text out;
      return print_result(wb_cost(s, o.dump().c_str(), &out.ptr), out);
    });
  });

  auto* serve = app.add_subcommand("serve", "Serve the HTTP JSON API");
  int port = 8787;
  std::string host = "127.0.0.1", static_dir;
  AnalysisFlags serve_flags;
  serve->add_option("--port", port, "Port (0 picks one)")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "Built UI assets to serve at /");
  serve_flags.add(serve);
  serve->callback([&] {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    auto o = serve_flags.json();
    o["port"] = port;
    o["host"] = host;
    if (!static_dir.empty()) o["static_dir"] = static_dir;
    wb_server* server = nullptr;
    if (const wb_status st = wb_server_start(g.store.c_str(), o.dump().c_str(), &server); st != WB_OK) {
      result = report_failure(st);
      return;
    }
    std::cout << "listening on http://" << host << ':' << wb_server_port(server) << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    wb_server_stop(server);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGeneral;
  }
  return result;
}
