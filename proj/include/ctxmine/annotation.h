// Annotated parallel-document model and its JSONL interchange format.
//
// One line of a corpus file holds one AnnotatedDocumentPair: sentence-aligned
// source and target sentences with per-token morphology, source-side
// coreference chains and intra-sentence word alignments. Documents are
// validated completely on parse and are immutable afterwards.
#ifndef CTXMINE_ANNOTATION_H_
#define CTXMINE_ANNOTATION_H_

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ctxmine {

enum class Side { kSource, kTarget };

std::string_view to_string(Side side);

// (sentence, token) address inside one side of a document.
struct Position {
  int sentence = 0;
  int token = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

// Feature name -> value, kept sorted by name.
class MorphFeatures {
 public:
  using Entry = std::pair<std::string, std::string>;

  MorphFeatures() = default;
  MorphFeatures(std::initializer_list<Entry> entries);

  // Returns false if `name` is already present.
  bool insert(std::string name, std::string value);
  std::optional<std::string_view> get(std::string_view name) const;
  bool contains(std::string_view name) const { return get(name).has_value(); }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const MorphFeatures&, const MorphFeatures&) = default;

 private:
  std::vector<Entry> entries_;
};

struct Token {
  int index = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  MorphFeatures feats;
  // Index of the dependency head in the same sentence. A token whose head is
  // its own index is the sentence root.
  std::optional<int> head;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  int index = 0;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Token span [start, end) of one source sentence.
struct Mention {
  int sentence = 0;
  int start = 0;
  int end = 0;

  bool covers(Position pos) const {
    return pos.sentence == sentence && pos.token >= start && pos.token < end;
  }
  friend auto operator<=>(const Mention&, const Mention&) = default;
};

struct CorefChain {
  int chain_id = 0;
  std::vector<Mention> mentions;  // sorted by (sentence, start)

  friend bool operator==(const CorefChain&, const CorefChain&) = default;
};

// Links source token (sentence, source_token) to target token
// (sentence, target_token); alignment never crosses sentence pairs.
struct AlignmentLink {
  int sentence = 0;
  int source_token = 0;
  int target_token = 0;

  Position source() const { return {sentence, source_token}; }
  Position target() const { return {sentence, target_token}; }
  friend auto operator<=>(const AlignmentLink&, const AlignmentLink&) = default;
};

struct AnnotatedDocumentPair {
  std::string doc_id;
  std::optional<int> year;
  std::string source_lang;
  std::string target_lang;
  std::vector<Sentence> source;
  std::vector<Sentence> target;
  std::vector<CorefChain> source_coref;
  std::vector<AlignmentLink> alignments;  // sorted, unique

  const std::vector<Sentence>& side(Side s) const {
    return s == Side::kSource ? source : target;
  }
  int sentence_count() const { return static_cast<int>(source.size()); }

  friend bool operator==(const AnnotatedDocumentPair&,
                         const AnnotatedDocumentPair&) = default;
};

// Feature names whose values are restricted to a closed set.
bool is_recognized_feature(std::string_view name);
bool is_valid_feature_value(std::string_view name, std::string_view value);

// Parses and validates one JSONL record. Throws SchemaError or RangeError.
//
// Coreference mentions and alignment links are canonicalized (sorted) on
// parse; everything else is kept as written.
AnnotatedDocumentPair parse_document(std::string_view line);
AnnotatedDocumentPair document_from_json(const nlohmann::json& record);

// Checks every invariant of an already-built document (used by parse and by
// programmatic builders). Throws SchemaError or RangeError.
void validate_document(AnnotatedDocumentPair& doc);

nlohmann::json document_to_json(const AnnotatedDocumentPair& doc);
std::string serialize_document(const AnnotatedDocumentPair& doc);

// Throws RangeError when `pos` is outside the chosen side.
const Token& token_at(const AnnotatedDocumentPair& doc, Side side,
                      Position pos);

// Target positions linked to source position `pos`, ordered by target token
// index; empty when unaligned. Throws RangeError for an invalid `pos`.
std::vector<Position> aligned_targets(const AnnotatedDocumentPair& doc,
                                      Position pos);
// Source positions linked to target position `pos`, ordered by source index.
std::vector<Position> aligned_sources(const AnnotatedDocumentPair& doc,
                                      Position pos);

}  // namespace ctxmine

#endif  // CTXMINE_ANNOTATION_H_
