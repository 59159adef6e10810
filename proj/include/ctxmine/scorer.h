// Whole-word accuracy of system outputs against extracted examples.
#ifndef CTXMINE_SCORER_H_
#define CTXMINE_SCORER_H_

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ctxmine/extractor.h"
#include "json.hpp"

namespace ctxmine {

struct Hypothesis {
  std::string example_id;
  std::string text;
};

// Reads JSONL {"example_id","text"}. Duplicate ids are a CorpusError.
std::vector<Hypothesis> read_hypotheses(const std::string& path);
std::vector<Hypothesis> read_hypotheses(std::istream& in);

struct ScoreOptions {
  // When false the whole hypothesis is searched instead of its last sentence
  // (for outputs that are already segmented).
  bool segment = true;
};

// Final sentence of the hypothesis (or all of it), then any expected form as
// a contiguous run of whole words.
bool is_correct(const ExtractedExample& example, std::string_view hypothesis,
                const ScoreOptions& options = {});

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;

  // Empty when total is 0.
  std::optional<double> accuracy() const;
  void add(bool ok) {
    total += 1;
    correct += ok ? 1 : 0;
  }
  friend bool operator==(const Tally&, const Tally&) = default;
};

struct ScoreReport {
  std::map<std::string, Tally> per_rule;      // pack_id/rule_id
  std::map<std::string, Tally> per_category;
  // Category -> target language, the layout of the printed table.
  std::map<std::string, std::map<std::string, Tally>> per_category_language;
  // Antecedent distance; examples without one go under "none".
  std::map<std::string, Tally> per_distance_bucket;
  Tally overall;
  std::size_t examples_without_hypothesis = 0;
};

// Throws UnknownExampleError for a hypothesis naming no known example.
ScoreReport score(std::span<const ExtractedExample> examples,
                  std::span<const Hypothesis> hypotheses,
                  const ScoreOptions& options = {});

nlohmann::json report_to_json(const ScoreReport& report);
// Categories as rows, target languages as columns, plus an overall line.
std::string report_to_table(const ScoreReport& report);

struct ExportCounts {
  std::size_t written = 0;
  std::size_t skipped = 0;  // examples with no hypothesis
};

// One line per covered example: src_sentence, tgt_sentence and the scored
// part of the hypothesis, tab-separated, in example order. Tabs and line
// breaks inside fields become spaces.
ExportCounts export_pairs(std::span<const ExtractedExample> examples,
                          std::span<const Hypothesis> hypotheses, std::ostream& out,
                          const ScoreOptions& options = {});

}  // namespace ctxmine

#endif  // CTXMINE_SCORER_H_
