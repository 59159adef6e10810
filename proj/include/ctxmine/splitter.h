// Dev / devtest / test assignment per label.
#ifndef CTXMINE_SPLITTER_H_
#define CTXMINE_SPLITTER_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxmine/extractor.h"
#include "json.hpp"

namespace ctxmine {

enum class Split { kDev, kDevtest, kTest, kUnassigned };

std::string_view to_string(Split s);
std::optional<Split> split_from_string(std::string_view s);

struct SplitConfig {
  std::size_t dev_ratio = 1;
  std::size_t devtest_ratio = 1;
  std::size_t test_ratio = 5;
  std::size_t min_label_count = 100;
  std::size_t test_cap_per_label = 5000;

  // Dev and devtest caps follow from the test cap and the ratio.
  std::size_t dev_cap() const { return test_cap_per_label * dev_ratio / test_ratio; }
  std::size_t devtest_cap() const {
    return test_cap_per_label * devtest_ratio / test_ratio;
  }
  void validate() const;  // throws std::invalid_argument
};

struct SplitAssignment {
  std::string example_id;
  std::string label;
  Split split = Split::kUnassigned;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

// One assignment per input example, in input order. Within a label at or
// above the minimum, examples are ordered newest year first (missing year
// counts as 0), then by doc_id, sentence and token, and dealt out in the
// repeating pattern test x5, dev, devtest (scaled by the ratio).
std::vector<SplitAssignment> split(std::span<const ExtractedExample> examples,
                                   const SplitConfig& config = {});

struct SplitCounts {
  std::size_t dev = 0;
  std::size_t devtest = 0;
  std::size_t test = 0;
  std::size_t unassigned = 0;

  std::size_t total() const { return dev + devtest + test + unassigned; }
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

// Counts keyed by label.
std::map<std::string, SplitCounts> count_splits(
    std::span<const SplitAssignment> assignments);

// `<pack_id>.<rule_id>.<split>.jsonl`
std::string split_file_name(const ExtractedExample& e, Split s);

// Writes one JSONL file per non-empty (label, split) plus manifest.json and
// returns the manifest. Unassigned examples are not written. Throws IoError.
nlohmann::json write_splits(std::span<const SplitAssignment> assignments,
                            std::span<const ExtractedExample> examples,
                            const std::filesystem::path& out_dir,
                            const SplitConfig& config = {});

}  // namespace ctxmine

#endif  // CTXMINE_SPLITTER_H_
