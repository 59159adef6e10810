// ctxmine command-line driver.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ctxmine/errors.h"
#include "ctxmine/extractor.h"
#include "ctxmine/rules.h"
#include "ctxmine/scorer.h"
#include "ctxmine/splitter.h"

namespace fs = std::filesystem;
using namespace ctxmine;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kUsage = 2;
constexpr int kFatal = 3;

constexpr const char* kRulesEnv = "CTXMINE_RULES_DIR";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::string> rules;
  std::vector<std::string> inputs;
  std::string out;
  std::string hypotheses;
  std::string export_path;
  std::string corpus;
  int max_distance = kDefaultMaxDistance;
  unsigned jobs = 0;
  bool continue_on_error = false;
  bool no_segmentation = false;
  bool json_output = false;
  bool strict = false;
  bool quiet = false;
  std::size_t sample = 0;
  std::size_t lines = 0;
  std::size_t min_label_count = 100;
  std::size_t test_cap = 5000;
};

std::vector<fs::path> rule_paths(const RunConfig& cfg) {
  std::vector<fs::path> out(cfg.rules.begin(), cfg.rules.end());
  if (out.empty()) {
    const char* env = std::getenv(kRulesEnv);
    if (env == nullptr || *env == '\0')
      throw UsageError(std::string("no --rules given and ") + kRulesEnv + " is not set");
    out.emplace_back(env);
  }
  for (const fs::path& p : out)
    if (!fs::exists(p)) throw UsageError("rule pack path not found: " + p.string());
  return out;
}

void require_inputs(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw UsageError("--input is required");
  for (const std::string& p : cfg.inputs)
    if (p != "-" && !fs::exists(p)) throw UsageError("input not found: " + p);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  if (!out) throw IoError(path.string(), "write failed");
}

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, ec.message());
  return dir;
}

unsigned worker_count(const RunConfig& cfg) {
  if (cfg.jobs > 0) return cfg.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs extraction over every input in order; `sink` sees examples in input
// order.
ExtractionStats run_extraction(const RunConfig& cfg, const std::vector<RulePack>& packs,
                               const ExampleSink& sink) {
  StreamOptions options;
  options.extract.max_distance = cfg.max_distance;
  options.extract.corpus = cfg.corpus;
  options.jobs = worker_count(cfg);
  options.continue_on_error = cfg.continue_on_error;
  ExtractionStats total;
  for (const std::string& input : cfg.inputs) {
    std::size_t last_report = 0;
    options.progress = [&](std::size_t records) {
      if (cfg.quiet || records - last_report < 50000) return;
      last_report = records;
      std::cerr << input << ": " << records << " records\n";
    };
    ExtractionStats stats;
    try {
      if (input == "-") {
        stats = extract_stream(std::cin, packs, options, sink);
      } else {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw IoError(input, "cannot open corpus");
        stats = extract_stream(in, packs, options, sink);
      }
    } catch (const CorpusError& e) {
      throw IoError(input, e.what());
    }
    total.merge(stats);
  }
  return total;
}

std::vector<ExtractedExample> read_all_examples(const RunConfig& cfg) {
  std::vector<ExtractedExample> out;
  for (const std::string& input : cfg.inputs) {
    try {
      auto part = read_examples(input);
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    } catch (const CorpusError& e) {
      throw IoError(input, e.what());
    }
  }
  return out;
}

int cmd_extract(const RunConfig& cfg) {
  require_inputs(cfg);
  const auto paths = rule_paths(cfg);
  if (cfg.max_distance < 0) throw UsageError("--max-distance must be >= 0");
  const fs::path out_dir = prepare_out_dir(cfg.out);
  const std::vector<RulePack> packs = load_rule_packs(paths);

  const fs::path examples_path = out_dir / "examples.jsonl";
  std::ofstream out(examples_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(examples_path.string(), "cannot open for writing");
  ReservoirSampler sampler(cfg.sample);
  const ExtractionStats stats = run_extraction(cfg, packs, [&](const ExtractedExample& e) {
    out << example_to_json(e).dump() << '\n';
    if (cfg.sample > 0) sampler.offer(e);
  });
  out.close();
  if (!out) throw IoError(examples_path.string(), "write failed");

  write_file(out_dir / "stats.json", stats_to_json(stats).dump(2) + "\n");
  if (cfg.sample > 0) {
    std::string text;
    for (const ExtractedExample& e : sampler.take()) text += example_to_json(e).dump() + "\n";
    write_file(out_dir / "sample.jsonl", text);
  }
  if (!cfg.quiet)
    std::cerr << "extracted " << stats.examples << " examples from " << stats.documents
              << " documents (" << stats.lines << " lines, " << stats.skipped_records
              << " skipped)\n";
  return kOk;
}

int cmd_split(const RunConfig& cfg) {
  require_inputs(cfg);
  const fs::path out_dir = prepare_out_dir(cfg.out);
  SplitConfig config;
  config.min_label_count = cfg.min_label_count;
  config.test_cap_per_label = cfg.test_cap;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::vector<ExtractedExample> examples = read_all_examples(cfg);
  const std::vector<SplitAssignment> assignments = split(examples, config);
  const json manifest = write_splits(assignments, examples, out_dir, config);
  if (!cfg.quiet)
    std::cerr << "split " << examples.size() << " examples over "
              << manifest.at("labels").size() << " labels\n";
  return kOk;
}

int cmd_score(const RunConfig& cfg) {
  require_inputs(cfg);
  if (cfg.hypotheses.empty()) throw UsageError("--hypotheses is required");
  if (!fs::exists(cfg.hypotheses)) throw UsageError("hypotheses not found: " + cfg.hypotheses);
  const std::vector<ExtractedExample> examples = read_all_examples(cfg);
  std::vector<Hypothesis> hypotheses;
  try {
    hypotheses = read_hypotheses(cfg.hypotheses);
  } catch (const CorpusError& e) {
    throw IoError(cfg.hypotheses, e.what());
  }
  ScoreOptions options;
  options.segment = !cfg.no_segmentation;
  ScoreReport report;
  try {
    report = score(examples, hypotheses, options);
  } catch (const UnknownExampleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  const std::string table = report_to_table(report);
  const std::string report_json = report_to_json(report).dump(2) + "\n";
  if (!cfg.out.empty()) {
    const fs::path out_dir = prepare_out_dir(cfg.out);
    write_file(out_dir / "report.json", report_json);
    write_file(out_dir / "report.txt", table);
  }
  if (!cfg.export_path.empty()) {
    std::ofstream out(cfg.export_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(cfg.export_path, "cannot open for writing");
    const ExportCounts counts = export_pairs(examples, hypotheses, out, options);
    if (!out) throw IoError(cfg.export_path, "write failed");
    if (!cfg.quiet)
      std::cerr << "exported " << counts.written << " pairs, skipped " << counts.skipped
                << " without hypothesis\n";
  }
  std::cout << (cfg.json_output ? report_json : table);
  return kOk;
}

int cmd_stats(const RunConfig& cfg) {
  require_inputs(cfg);
  ExtractionStats stats;
  if (!cfg.rules.empty() || cfg.lines == 0) {
    // Annotated corpus: extract without writing examples.
    const std::vector<RulePack> packs = load_rule_packs(rule_paths(cfg));
    stats = run_extraction(cfg, packs, [](const ExtractedExample&) {});
  } else {
    const std::vector<ExtractedExample> examples = read_all_examples(cfg);
    stats = compute_stats(examples, cfg.lines);
  }
  std::cout << stats_to_json(stats).dump(2) << "\n";
  return kOk;
}

int cmd_validate_rules(const RunConfig& cfg) {
  const auto paths = rule_paths(cfg);
  std::vector<fs::path> files;
  for (const fs::path& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
          files.push_back(entry.path());
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  int status = kOk;
  std::size_t warnings = 0;
  for (const fs::path& file : files) {
    try {
      const RulePack pack = load_rule_pack(file);
      const auto diagnostics = validate_pack(pack);
      for (const Diagnostic& d : diagnostics)
        std::cout << file.string() << ": warning: "
                  << (d.rule_id.empty() ? "" : d.rule_id + ": ") << d.message << "\n";
      warnings += diagnostics.size();
      std::cout << file.string() << ": " << pack.rules.size() << " rules, "
                << diagnostics.size() << " diagnostics\n";
    } catch (const RuleSyntaxError& e) {
      std::cout << file.string() << ": error: " << e.what() << "\n";
      status = kValidation;
    } catch (const DuplicateRuleError& e) {
      std::cout << file.string() << ": error: " << e.what() << "\n";
      status = kValidation;
    }
  }
  if (cfg.strict && warnings > 0) status = kValidation;
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine, split and score context-dependent MT test examples"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_rules = [&](CLI::App* sub) {
    sub->add_option("--rules", cfg.rules,
                    std::string("Rule pack files or directories (default: $") + kRulesEnv + ")");
  };
  auto add_inputs = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--input", cfg.inputs, what);
  };
  auto add_quiet = [&](CLI::App* sub) {
    sub->add_flag("--quiet,-q", cfg.quiet, "No progress on stderr");
  };
  auto add_extraction = [&](CLI::App* sub) {
    sub->add_option("--max-distance", cfg.max_distance, "Context window in sentences")
        ->capture_default_str();
    sub->add_option("--jobs,-j", cfg.jobs, "Worker threads (default: all cores)");
    sub->add_flag("--continue-on-error", cfg.continue_on_error,
                  "Skip and count bad records instead of stopping");
    sub->add_option("--corpus", cfg.corpus, "Corpus name stored in each example");
  };

  CLI::App* extract = app.add_subcommand("extract", "Extract examples from annotated JSONL");
  add_rules(extract);
  add_inputs(extract, "Annotated corpus JSONL (repeatable, - for stdin)");
  extract->add_option("--out,-o", cfg.out, "Output directory")->required();
  add_extraction(extract);
  extract->add_option("--sample", cfg.sample, "Also write N reservoir-sampled examples");
  add_quiet(extract);

  CLI::App* split_cmd = app.add_subcommand("split", "Assign examples to dev/devtest/test");
  add_inputs(split_cmd, "Examples JSONL (repeatable)");
  split_cmd->add_option("--out,-o", cfg.out, "Output directory")->required();
  split_cmd->add_option("--min-label-count", cfg.min_label_count)->capture_default_str();
  split_cmd->add_option("--test-cap", cfg.test_cap)->capture_default_str();
  add_quiet(split_cmd);

  CLI::App* score_cmd = app.add_subcommand("score", "Score hypotheses against examples");
  add_inputs(score_cmd, "Examples JSONL (repeatable)");
  score_cmd->add_option("--hypotheses", cfg.hypotheses, "Hypotheses JSONL")->required();
  score_cmd->add_option("--out,-o", cfg.out, "Write report.json and report.txt here");
  score_cmd->add_option("--export", cfg.export_path,
                        "Write source/reference/hypothesis TSV for external metrics");
  score_cmd->add_flag("--no-segmentation", cfg.no_segmentation,
                      "Match against the whole hypothesis, not its last sentence");
  score_cmd->add_flag("--json", cfg.json_output, "Print the JSON report instead of the table");
  add_quiet(score_cmd);

  CLI::App* stats_cmd = app.add_subcommand(
      "stats", "Counts for an annotated corpus, or for an examples file with --lines");
  add_rules(stats_cmd);
  add_inputs(stats_cmd, "Annotated corpus JSONL, or examples JSONL with --lines");
  stats_cmd->add_option("--lines", cfg.lines, "Corpus size in lines for an examples file");
  add_extraction(stats_cmd);
  add_quiet(stats_cmd);

  CLI::App* validate = app.add_subcommand("validate-rules", "Load and lint rule packs");
  add_rules(validate);
  validate->add_flag("--strict", cfg.strict, "Treat warnings as failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(cfg);
    if (split_cmd->parsed()) return cmd_split(cfg);
    if (score_cmd->parsed()) return cmd_score(cfg);
    if (stats_cmd->parsed()) return cmd_stats(cfg);
    if (validate->parsed()) return cmd_validate_rules(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const RuleSyntaxError& e) {
    std::cerr << "rule error: " << e.what() << "\n";
    return kValidation;
  } catch (const DuplicateRuleError& e) {
    std::cerr << "rule error: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  }
  return kUsage;
}
