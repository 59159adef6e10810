#include "ctxmine/extractor.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>
#include <unordered_set>

#include "ctxmine/errors.h"
#include "ctxmine/text.h"

namespace ctxmine {

using nlohmann::json;

namespace {

std::string sentence_text(const Sentence& s) {
  std::vector<std::string_view> forms;
  forms.reserve(s.tokens.size());
  for (const Token& t : s.tokens) forms.push_back(t.form);
  return text::detokenize(forms);
}

std::vector<std::string> sentence_forms(const Sentence& s) {
  std::vector<std::string> out;
  out.reserve(s.tokens.size());
  for (const Token& t : s.tokens) out.push_back(t.form);
  return out;
}

bool is_verb(const Token& t) { return t.upos == "VERB" || t.upos == "AUX"; }

bool has_verb(const Sentence& s) {
  return std::any_of(s.tokens.begin(), s.tokens.end(), is_verb);
}

bool counts_as_coreference(Category c) {
  return c == Category::kGender || c == Category::kAuxiliary;
}

// Per-link solver results, computed at most once whichever rules ask.
class LinkContext {
 public:
  LinkContext(const AnnotatedDocumentPair& doc, Position src, Position tgt,
              int max_distance)
      : doc_(doc), src_(src), tgt_(tgt), max_distance_(max_distance) {}

  const std::optional<SolverResult>& coref() {
    if (!coref_done_) {
      coref_ = solve_coref(doc_, src_, max_distance_);
      coref_done_ = true;
    }
    return coref_;
  }
  const std::optional<SolverResult>& verb() {
    if (!verb_done_) {
      verb_ = solve_target_verb(doc_, tgt_, max_distance_);
      verb_done_ = true;
    }
    return verb_;
  }
  const std::optional<SolverResult>& noun_case() {
    if (!case_done_) {
      case_ = solve_target_case(doc_, tgt_, max_distance_);
      case_done_ = true;
    }
    return case_;
  }

 private:
  const AnnotatedDocumentPair& doc_;
  Position src_;
  Position tgt_;
  int max_distance_;
  bool coref_done_ = false;
  bool verb_done_ = false;
  bool case_done_ = false;
  std::optional<SolverResult> coref_;
  std::optional<SolverResult> verb_;
  std::optional<SolverResult> case_;
};

bool context_matches(const AnnotatedDocumentPair& doc, const Rule& rule,
                     const SolverResult& r) {
  if (rule.c_src) {
    if (!r.c_src) return false;
    if (!matches(*rule.c_src, doc.source[r.c_src->pos.sentence], r.c_src->pos.token))
      return false;
  }
  if (rule.c_tgt) {
    if (!r.c_tgt) return false;
    if (!matches(*rule.c_tgt, doc.target[r.c_tgt->pos.sentence], r.c_tgt->pos.token))
      return false;
  }
  return true;
}

// Runs the rule's solver for one link; empty when the rule does not fire.
std::optional<SolverResult> apply_solver(const AnnotatedDocumentPair& doc,
                                         const Rule& rule, LinkContext& link,
                                         Position tgt) {
  switch (rule.solver) {
    case SolverKind::kNone:
      return solve_none();
    case SolverKind::kCoref: {
      const auto& r = link.coref();
      if (!r || !context_matches(doc, rule, *r)) return std::nullopt;
      return r;
    }
    case SolverKind::kTargetVerbEllipsis: {
      if (!is_verb(doc.target[tgt.sentence].tokens[tgt.token])) return std::nullopt;
      const auto& r = link.verb();
      if (!r || !context_matches(doc, rule, *r)) return std::nullopt;
      return r;
    }
    case SolverKind::kTargetCaseMatch: {
      if (has_verb(doc.target[tgt.sentence])) return std::nullopt;
      const auto& r = link.noun_case();
      if (!r || !context_matches(doc, rule, *r)) return std::nullopt;
      return r;
    }
  }
  return std::nullopt;
}

KeyToken key_token(const AnnotatedDocumentPair& doc, TokenRef ref) {
  return {ref, token_at(doc, ref.side, ref.pos).form};
}

ExtractedExample make_example(const AnnotatedDocumentPair& doc,
                              const RulePack& pack, const Rule& rule,
                              Position src, Position tgt, const SolverResult& r,
                              const ExtractOptions& options) {
  ExtractedExample e;
  const int s = src.sentence;
  e.example_id = doc.doc_id + "#" + std::to_string(s) + "#" + pack.pack_id + "/" +
                 rule.rule_id + "#" + std::to_string(src.token) + "." +
                 std::to_string(tgt.token);
  e.corpus = options.corpus;
  e.doc_id = doc.doc_id;
  e.year = doc.year;
  e.category = rule.category;
  e.pack_id = pack.pack_id;
  e.rule_id = rule.rule_id;
  e.src_lang = doc.source_lang;
  e.tgt_lang = doc.target_lang;
  for (int c = std::max(0, s - options.max_distance); c < s; ++c) {
    e.src_context.push_back(sentence_text(doc.source[c]));
    e.tgt_context.push_back(sentence_text(doc.target[c]));
  }
  e.src_sentence = sentence_text(doc.source[s]);
  e.tgt_sentence = sentence_text(doc.target[s]);
  e.src_tokens = sentence_forms(doc.source[s]);
  e.tgt_tokens = sentence_forms(doc.target[s]);
  e.t_src = key_token(doc, {Side::kSource, src});
  e.t_tgt = key_token(doc, {Side::kTarget, tgt});
  if (r.c_src) e.c_src = key_token(doc, *r.c_src);
  if (r.c_tgt) e.c_tgt = key_token(doc, *r.c_tgt);
  e.antecedent_distance = r.antecedent_distance;
  if (rule.expected_from == ExpectedFrom::kTargetToken) {
    e.expected_forms = {e.t_tgt.form};
  } else {
    e.expected_forms = rule.expected_forms;
  }
  e.expected_case_sensitive = rule.expected_case_sensitive;
  return e;
}

bool same_pair(const AnnotatedDocumentPair& doc, const RulePack& pack) {
  return doc.source_lang == pack.source_lang && doc.target_lang == pack.target_lang;
}

json key_token_to_json(const KeyToken& k) {
  return {{"side", std::string(to_string(k.ref.side))},
          {"sent", k.ref.pos.sentence},
          {"tok", k.ref.pos.token},
          {"form", k.form}};
}

KeyToken key_token_from_json(const json& j) {
  KeyToken k;
  const std::string side = j.at("side").get<std::string>();
  if (side != "source" && side != "target")
    throw SchemaError("", "/side", "side must be source or target");
  k.ref.side = side == "source" ? Side::kSource : Side::kTarget;
  k.ref.pos = {j.at("sent").get<int>(), j.at("tok").get<int>()};
  k.form = j.at("form").get<std::string>();
  return k;
}

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

struct RecordResult {
  bool ok = false;
  std::string error;
  std::string doc_id;
  std::size_t sentences = 0;
  std::size_t dropped = 0;
  std::vector<ExtractedExample> examples;
};

RecordResult process_record(const std::string& line, std::span<const RulePack> packs,
                            const ExtractOptions& options) {
  RecordResult out;
  try {
    AnnotatedDocumentPair doc = parse_document(line);
    out.doc_id = doc.doc_id;
    out.sentences = doc.source.size();
    out.examples = extract_from_document(doc, packs, options, &out.dropped);
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

void count_document(ExtractionStats& stats, const RecordResult& r) {
  stats.documents += 1;
  stats.lines += r.sentences;
  stats.dropped_examples += r.dropped;
  std::set<int> lines;
  std::set<int> coref_lines;
  for (const ExtractedExample& e : r.examples) {
    stats.examples += 1;
    stats.per_category[std::string(to_string(e.category))] += 1;
    stats.per_rule[e.label()] += 1;
    if (e.antecedent_distance) stats.distance_histogram[*e.antecedent_distance] += 1;
    lines.insert(e.sentence_index());
    if (counts_as_coreference(e.category)) coref_lines.insert(e.sentence_index());
  }
  stats.extracted_lines += lines.size();
  stats.coreference_lines += coref_lines.size();
}

}  // namespace

bool expected_forms_present(const ExtractedExample& e) {
  if (e.expected_forms.empty()) return false;
  const std::vector<std::string> hay = text::words(e.tgt_sentence);
  for (const std::string& form : e.expected_forms) {
    const std::vector<std::string> needle = text::words(form);
    if (!text::contains_words(hay, needle, e.expected_case_sensitive)) return false;
  }
  return true;
}

std::vector<ExtractedExample> extract_from_document(
    const AnnotatedDocumentPair& doc, std::span<const RulePack> packs,
    const ExtractOptions& options, std::size_t* dropped) {
  std::vector<const RulePack*> applicable;
  for (const RulePack& p : packs)
    if (same_pair(doc, p)) applicable.push_back(&p);
  if (applicable.empty())
    throw LanguageMismatchError("doc '" + doc.doc_id + "' is " + doc.source_lang +
                                "-" + doc.target_lang +
                                " but no rule pack covers that pair");

  std::vector<ExtractedExample> out;
  for (const AlignmentLink& link : doc.alignments) {
    const Position src = link.source();
    const Position tgt = link.target();
    const Sentence& src_sentence = doc.source[src.sentence];
    const Sentence& tgt_sentence = doc.target[tgt.sentence];
    LinkContext ctx(doc, src, tgt, options.max_distance);
    for (const RulePack* pack : applicable) {
      for (const Rule& rule : pack->rules) {
        if (!matches(rule.t_src, src_sentence, src.token)) continue;
        if (!matches(rule.t_tgt, tgt_sentence, tgt.token)) continue;
        auto result = apply_solver(doc, rule, ctx, tgt);
        if (!result) continue;
        ExtractedExample e = make_example(doc, *pack, rule, src, tgt, *result, options);
        if (!expected_forms_present(e)) {
          if (dropped) ++*dropped;
          continue;
        }
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

std::vector<ExtractedExample> extract_from_document(
    const AnnotatedDocumentPair& doc, const RulePack& pack,
    const ExtractOptions& options) {
  if (!same_pair(doc, pack))
    throw LanguageMismatchError("doc '" + doc.doc_id + "' is " + doc.source_lang +
                                "-" + doc.target_lang + " but pack '" +
                                pack.pack_id + "' is " + pack.source_lang + "-" +
                                pack.target_lang);
  return extract_from_document(doc, std::span<const RulePack>(&pack, 1), options);
}

ExtractionStats extract_stream(std::istream& in, std::span<const RulePack> packs,
                               const StreamOptions& options,
                               const ExampleSink& sink) {
  ExtractionStats stats;
  std::unordered_set<std::string> seen_ids;
  std::size_t line_no = 0;
  std::size_t records = 0;
  const unsigned jobs = std::max(1u, options.jobs);
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);

  std::vector<std::string> batch;
  std::vector<std::size_t> batch_lines;
  std::vector<RecordResult> results;
  bool done = false;
  while (!done) {
    batch.clear();
    batch_lines.clear();
    std::string line;
    while (batch.size() < batch_size) {
      if (!std::getline(in, line)) {
        done = true;
        break;
      }
      ++line_no;
      if (text::trim(line).empty()) continue;
      batch.push_back(std::move(line));
      batch_lines.push_back(line_no);
    }
    if (batch.empty()) break;

    results.assign(batch.size(), RecordResult{});
    if (jobs == 1 || batch.size() == 1) {
      for (std::size_t i = 0; i < batch.size(); ++i)
        results[i] = process_record(batch[i], packs, options.extract);
    } else {
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < batch.size(); i = next++)
          results[i] = process_record(batch[i], packs, options.extract);
      };
      std::vector<std::jthread> pool;
      const unsigned n = static_cast<unsigned>(
          std::min<std::size_t>(jobs, batch.size()));
      for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < batch.size(); ++i) {
      RecordResult& r = results[i];
      if (r.ok && !seen_ids.insert(r.doc_id).second) {
        r.ok = false;
        r.error = "duplicate doc_id '" + r.doc_id + "'";
      }
      if (!r.ok) {
        if (!options.continue_on_error) throw CorpusError(batch_lines[i], r.error);
        stats.skipped_records += 1;
        continue;
      }
      count_document(stats, r);
      for (const ExtractedExample& e : r.examples) sink(e);
    }
    records += batch.size();
    if (options.progress) options.progress(records);
  }
  return stats;
}

ExtractionStats compute_stats(std::span<const ExtractedExample> examples,
                              std::size_t total_lines) {
  ExtractionStats stats;
  stats.lines = total_lines;
  std::set<std::pair<std::string, int>> lines;
  std::set<std::pair<std::string, int>> coref_lines;
  std::set<std::string> docs;
  for (const ExtractedExample& e : examples) {
    stats.examples += 1;
    stats.per_category[std::string(to_string(e.category))] += 1;
    stats.per_rule[e.label()] += 1;
    if (e.antecedent_distance) stats.distance_histogram[*e.antecedent_distance] += 1;
    lines.emplace(e.doc_id, e.sentence_index());
    if (counts_as_coreference(e.category)) coref_lines.emplace(e.doc_id, e.sentence_index());
    docs.insert(e.doc_id);
  }
  stats.documents = docs.size();
  stats.extracted_lines = lines.size();
  stats.coreference_lines = coref_lines.size();
  return stats;
}

double ExtractionStats::percent_extracted() const {
  return lines == 0 ? 0.0 : 100.0 * static_cast<double>(extracted_lines) /
                                static_cast<double>(lines);
}

double ExtractionStats::percent_coreference() const {
  return lines == 0 ? 0.0 : 100.0 * static_cast<double>(coreference_lines) /
                                static_cast<double>(lines);
}

void ExtractionStats::merge(const ExtractionStats& o) {
  documents += o.documents;
  lines += o.lines;
  skipped_records += o.skipped_records;
  examples += o.examples;
  dropped_examples += o.dropped_examples;
  extracted_lines += o.extracted_lines;
  coreference_lines += o.coreference_lines;
  for (const auto& [k, v] : o.per_category) per_category[k] += v;
  for (const auto& [k, v] : o.per_rule) per_rule[k] += v;
  for (const auto& [k, v] : o.distance_histogram) distance_histogram[k] += v;
}

json stats_to_json(const ExtractionStats& s) {
  json categories = json::object();
  for (Category c : kAllCategories) {
    auto it = s.per_category.find(std::string(to_string(c)));
    categories[std::string(to_string(c))] = it == s.per_category.end() ? 0 : it->second;
  }
  json histogram = json::object();
  for (const auto& [d, n] : s.distance_histogram) histogram[std::to_string(d)] = n;
  return {{"documents", s.documents},
          {"lines", s.lines},
          {"skipped_records", s.skipped_records},
          {"examples", s.examples},
          {"dropped_examples", s.dropped_examples},
          {"extracted_lines", s.extracted_lines},
          {"coreference_lines", s.coreference_lines},
          {"percent_extracted", s.percent_extracted()},
          {"percent_coreference", s.percent_coreference()},
          {"per_category", std::move(categories)},
          {"per_rule", s.per_rule},
          {"distance_histogram", std::move(histogram)}};
}

json example_to_json(const ExtractedExample& e) {
  json out = json::object();
  out["example_id"] = e.example_id;
  out["corpus"] = e.corpus;
  out["doc_id"] = e.doc_id;
  out["year"] = optional_to_json(e.year);
  out["category"] = std::string(to_string(e.category));
  out["pack_id"] = e.pack_id;
  out["rule_id"] = e.rule_id;
  out["src_lang"] = e.src_lang;
  out["tgt_lang"] = e.tgt_lang;
  out["src_context"] = e.src_context;
  out["tgt_context"] = e.tgt_context;
  out["src_sentence"] = e.src_sentence;
  out["tgt_sentence"] = e.tgt_sentence;
  out["src_tokens"] = e.src_tokens;
  out["tgt_tokens"] = e.tgt_tokens;
  out["t_src"] = key_token_to_json(e.t_src);
  out["t_tgt"] = key_token_to_json(e.t_tgt);
  out["c_src"] = e.c_src ? key_token_to_json(*e.c_src) : json(nullptr);
  out["c_tgt"] = e.c_tgt ? key_token_to_json(*e.c_tgt) : json(nullptr);
  out["antecedent_distance"] = optional_to_json(e.antecedent_distance);
  out["expected_forms"] = e.expected_forms;
  out["expected_case_sensitive"] = e.expected_case_sensitive;
  return out;
}

ExtractedExample example_from_json(const json& j) {
  ExtractedExample e;
  try {
    e.example_id = j.at("example_id").get<std::string>();
    e.corpus = j.value("corpus", "");
    e.doc_id = j.at("doc_id").get<std::string>();
    if (j.contains("year") && !j.at("year").is_null()) e.year = j.at("year").get<int>();
    auto cat = category_from_string(j.at("category").get<std::string>());
    if (!cat) throw SchemaError(e.doc_id, "/category", "unknown category");
    e.category = *cat;
    e.pack_id = j.at("pack_id").get<std::string>();
    e.rule_id = j.at("rule_id").get<std::string>();
    e.src_lang = j.at("src_lang").get<std::string>();
    e.tgt_lang = j.at("tgt_lang").get<std::string>();
    e.src_context = j.at("src_context").get<std::vector<std::string>>();
    e.tgt_context = j.at("tgt_context").get<std::vector<std::string>>();
    e.src_sentence = j.at("src_sentence").get<std::string>();
    e.tgt_sentence = j.at("tgt_sentence").get<std::string>();
    e.src_tokens = j.value("src_tokens", std::vector<std::string>{});
    e.tgt_tokens = j.value("tgt_tokens", std::vector<std::string>{});
    e.t_src = key_token_from_json(j.at("t_src"));
    e.t_tgt = key_token_from_json(j.at("t_tgt"));
    if (j.contains("c_src") && !j.at("c_src").is_null())
      e.c_src = key_token_from_json(j.at("c_src"));
    if (j.contains("c_tgt") && !j.at("c_tgt").is_null())
      e.c_tgt = key_token_from_json(j.at("c_tgt"));
    if (j.contains("antecedent_distance") && !j.at("antecedent_distance").is_null())
      e.antecedent_distance = j.at("antecedent_distance").get<int>();
    e.expected_forms = j.at("expected_forms").get<std::vector<std::string>>();
    e.expected_case_sensitive = j.value("expected_case_sensitive", false);
  } catch (const json::exception& ex) {
    throw SchemaError(e.doc_id, "", std::string("bad example record: ") + ex.what());
  }
  if (e.expected_forms.empty())
    throw SchemaError(e.doc_id, "/expected_forms", "must be nonempty");
  return e;
}

std::vector<ExtractedExample> read_examples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open examples file");
  std::vector<ExtractedExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(example_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw CorpusError(line_no, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
      throw CorpusError(line_no, e.what());
    }
  }
  return out;
}

ReservoirSampler::ReservoirSampler(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {}

void ReservoirSampler::offer(const ExtractedExample& e) {
  const std::size_t index = seen_++;
  if (capacity_ == 0) return;
  if (kept_.size() < capacity_) {
    kept_.emplace_back(index, e);
    return;
  }
  std::uniform_int_distribution<std::size_t> pick(0, index);
  const std::size_t slot = pick(rng_);
  if (slot < capacity_) kept_[slot] = {index, e};
}

std::vector<ExtractedExample> ReservoirSampler::take() {
  std::sort(kept_.begin(), kept_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ExtractedExample> out;
  out.reserve(kept_.size());
  for (auto& [index, e] : kept_) out.push_back(std::move(e));
  kept_.clear();
  return out;
}

}  // namespace ctxmine
