// Mining of context-dependent examples from annotated parallel documents.
//
// For every aligned (T_src, T_tgt) pair and every rule of every pack that
// applies to the document's language pair, the extractor checks the T
// criteria, runs the rule's solver to find C_src / C_tgt, checks the C
// criteria and emits one ExtractedExample per surviving (pair, rule).
#ifndef CTXMINE_EXTRACTOR_H_
#define CTXMINE_EXTRACTOR_H_

#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ctxmine/annotation.h"
#include "ctxmine/rules.h"
#include "ctxmine/solvers.h"
#include "json.hpp"

namespace ctxmine {

struct KeyToken {
  TokenRef ref;
  std::string form;

  friend bool operator==(const KeyToken&, const KeyToken&) = default;
};

struct ExtractedExample {
  std::string example_id;
  std::string corpus;
  std::string doc_id;
  std::optional<int> year;
  Category category = Category::kGender;
  std::string pack_id;
  std::string rule_id;
  std::string src_lang;
  std::string tgt_lang;
  std::vector<std::string> src_context;
  std::vector<std::string> tgt_context;
  std::string src_sentence;
  std::string tgt_sentence;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  KeyToken t_src;
  KeyToken t_tgt;
  std::optional<KeyToken> c_src;
  std::optional<KeyToken> c_tgt;
  std::optional<int> antecedent_distance;
  std::vector<std::string> expected_forms;
  bool expected_case_sensitive = false;

  int sentence_index() const { return t_src.ref.pos.sentence; }
  // Split/score label: one rule of one pack.
  std::string label() const { return pack_id + "/" + rule_id; }

  friend bool operator==(const ExtractedExample&, const ExtractedExample&) = default;
};

nlohmann::json example_to_json(const ExtractedExample& e);
ExtractedExample example_from_json(const nlohmann::json& j);
// Reads a JSONL file of examples. Throws IoError / CorpusError.
std::vector<ExtractedExample> read_examples(const std::string& path);

// True when every expected form occurs as whole words in tgt_sentence.
bool expected_forms_present(const ExtractedExample& e);

struct ExtractionStats {
  std::size_t documents = 0;
  std::size_t lines = 0;  // sentence pairs seen
  std::size_t skipped_records = 0;
  std::size_t examples = 0;
  std::size_t dropped_examples = 0;  // expected form missing from tgt_sentence
  std::size_t extracted_lines = 0;
  std::size_t coreference_lines = 0;
  std::map<std::string, std::size_t> per_category;
  std::map<std::string, std::size_t> per_rule;
  std::map<int, std::size_t> distance_histogram;

  double percent_extracted() const;
  double percent_coreference() const;
  void merge(const ExtractionStats& other);
};

nlohmann::json stats_to_json(const ExtractionStats& stats);

// Counts examples over a corpus of `total_lines` sentence pairs. A line
// yielding several examples counts once toward the line percentages;
// coreference lines are those with a Gender or Auxiliary example.
ExtractionStats compute_stats(std::span<const ExtractedExample> examples,
                              std::size_t total_lines);

struct ExtractOptions {
  int max_distance = kDefaultMaxDistance;
  std::string corpus;
};

// Applies one pack. Throws LanguageMismatchError when the document's
// language pair differs from the pack's.
std::vector<ExtractedExample> extract_from_document(
    const AnnotatedDocumentPair& doc, const RulePack& pack,
    const ExtractOptions& options = {});

// Applies every pack in `packs` that matches the document's language pair,
// in pack order. Throws LanguageMismatchError when none matches.
std::vector<ExtractedExample> extract_from_document(
    const AnnotatedDocumentPair& doc, std::span<const RulePack> packs,
    const ExtractOptions& options = {}, std::size_t* dropped = nullptr);

struct StreamOptions {
  ExtractOptions extract;
  unsigned jobs = 1;
  bool continue_on_error = false;
  std::size_t batch_size = 512;
  // Called on the producing thread after every batch with the number of
  // records read so far.
  std::function<void(std::size_t)> progress;
};

using ExampleSink = std::function<void(const ExtractedExample&)>;

// Reads JSONL documents from `in` and feeds their examples to `sink` in input
// order regardless of `jobs`. Bad records (malformed, invalid, duplicate
// doc_id, no matching pack) throw CorpusError unless continue_on_error is
// set, in which case they are skipped and counted.
ExtractionStats extract_stream(std::istream& in, std::span<const RulePack> packs,
                               const StreamOptions& options,
                               const ExampleSink& sink);

// Uniform sample of `capacity` examples from a stream of unknown length, for
// manual audit. Deterministic for a given seed and input order.
class ReservoirSampler {
 public:
  explicit ReservoirSampler(std::size_t capacity, std::uint64_t seed = 20230601);

  void offer(const ExtractedExample& e);
  // Sampled examples in stream order.
  std::vector<ExtractedExample> take();

 private:
  std::size_t capacity_;
  std::size_t seen_ = 0;
  std::mt19937_64 rng_;
  std::vector<std::pair<std::size_t, ExtractedExample>> kept_;
};

}  // namespace ctxmine

#endif  // CTXMINE_EXTRACTOR_H_
