#include "ctxmine/solvers.h"

#include <tuple>

#include "ctxmine/text.h"

namespace ctxmine {
namespace {

bool is_verb(const Token& t) { return t.upos == "VERB" || t.upos == "AUX"; }

bool is_nominal(const Token& t) {
  return t.upos == "NOUN" || t.upos == "PROPN" || t.upos == "PRON";
}

// Walks target tokens before `from`, nearest first, within `max_distance`
// sentences, and returns the first one satisfying `pred`.
template <typename Pred>
std::optional<Position> scan_target_backwards(const AnnotatedDocumentPair& doc,
                                              Position from, int max_distance,
                                              Pred pred) {
  for (int s = from.sentence; s >= 0 && from.sentence - s <= max_distance; --s) {
    const Sentence& sentence = doc.target[s];
    const int last = s == from.sentence ? from.token - 1 : sentence.size() - 1;
    for (int i = last; i >= 0; --i)
      if (pred(sentence.tokens[i])) return Position{s, i};
  }
  return std::nullopt;
}

SolverResult target_side_result(const AnnotatedDocumentPair& doc, Position t_tgt,
                                Position c_tgt) {
  SolverResult r;
  r.c_tgt = TokenRef{Side::kTarget, c_tgt};
  auto sources = aligned_sources(doc, c_tgt);
  if (!sources.empty()) r.c_src = TokenRef{Side::kSource, sources.front()};
  r.antecedent_distance = t_tgt.sentence - c_tgt.sentence;
  return r;
}

}  // namespace

TokenRef head_of_span(const AnnotatedDocumentPair& doc, const Mention& m) {
  const Sentence& s = doc.source[m.sentence];
  int found = -1;
  int count = 0;
  bool complete = true;
  for (int i = m.start; i < m.end; ++i) {
    const auto& head = s.tokens[i].head;
    if (!head) {
      complete = false;
      break;
    }
    if (*head == i || *head < m.start || *head >= m.end) {
      found = i;
      ++count;
    }
  }
  if (complete && count == 1) return {Side::kSource, {m.sentence, found}};
  for (int i = m.end - 1; i >= m.start; --i)
    if (is_nominal(s.tokens[i])) return {Side::kSource, {m.sentence, i}};
  return {Side::kSource, {m.sentence, m.end - 1}};
}

std::optional<SolverResult> solve_coref(const AnnotatedDocumentPair& doc,
                                        Position t_src, int max_distance) {
  // Best candidate so far, keyed by (sentence, start, end, -chain_id) so the
  // choice does not depend on the order chains are listed in.
  std::optional<std::tuple<int, int, int, int>> best_key;
  const Mention* best = nullptr;
  for (const CorefChain& chain : doc.source_coref) {
    const Mention* cover = nullptr;
    for (const Mention& m : chain.mentions) {
      if (m.covers(t_src)) {
        cover = &m;
        break;
      }
    }
    if (cover == nullptr) continue;
    for (const Mention& m : chain.mentions) {
      if (std::tie(m.sentence, m.start) >= std::tie(cover->sentence, cover->start))
        break;
      if (m.covers(t_src)) continue;
      auto key = std::make_tuple(m.sentence, m.start, m.end, -chain.chain_id);
      if (!best_key || key > *best_key) {
        best_key = key;
        best = &m;
      }
    }
  }
  if (best == nullptr) return std::nullopt;
  const int distance = t_src.sentence - best->sentence;
  if (distance > max_distance) return std::nullopt;
  const TokenRef c_src = head_of_span(doc, *best);
  auto targets = aligned_targets(doc, c_src.pos);
  if (targets.empty()) return std::nullopt;
  SolverResult r;
  r.c_src = c_src;
  r.c_tgt = TokenRef{Side::kTarget, targets.front()};
  r.antecedent_distance = distance;
  return r;
}

std::optional<SolverResult> solve_target_verb(const AnnotatedDocumentPair& doc,
                                              Position t_tgt, int max_distance) {
  const Token& t = token_at(doc, Side::kTarget, t_tgt);
  if (t.lemma.empty()) return std::nullopt;
  auto c = scan_target_backwards(doc, t_tgt, max_distance, [&](const Token& cand) {
    return is_verb(cand) && text::equals_ignore_case(cand.lemma, t.lemma);
  });
  if (!c) return std::nullopt;
  return target_side_result(doc, t_tgt, *c);
}

std::optional<SolverResult> solve_target_case(const AnnotatedDocumentPair& doc,
                                              Position t_tgt, int max_distance) {
  const Token& t = token_at(doc, Side::kTarget, t_tgt);
  auto wanted = t.feats.get("Case");
  if (!wanted) return std::nullopt;
  auto c = scan_target_backwards(doc, t_tgt, max_distance, [&](const Token& cand) {
    auto have = cand.feats.get("Case");
    return cand.upos == "NOUN" && have && *have == *wanted;
  });
  if (!c) return std::nullopt;
  return target_side_result(doc, t_tgt, *c);
}

SolverResult solve_none() { return {}; }

}  // namespace ctxmine
