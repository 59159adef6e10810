#include "oracle.h"

#include <algorithm>
#include <tuple>

#include "ctxmine/text.h"

namespace ctxmine::testing {

namespace {

std::string fold(const std::string& s) { return text::fold_case(s); }

bool verbal(const Token& t) { return t.upos == "VERB" || t.upos == "AUX"; }

// Lowest-index partner of `pos` on the other side, if any.
std::optional<Position> first_partner(const AnnotatedDocumentPair& doc, Position pos,
                                      bool from_source) {
  std::optional<Position> best;
  for (const AlignmentLink& l : doc.alignments) {
    if (l.sentence != pos.sentence) continue;
    const int mine = from_source ? l.source_token : l.target_token;
    const int other = from_source ? l.target_token : l.source_token;
    if (mine != pos.token) continue;
    if (!best || other < best->token) best = Position{l.sentence, other};
  }
  return best;
}

// Every target token before `t` within range satisfying `pred`; the latest
// one wins.
template <typename Pred>
std::optional<SolverResult> oracle_target_scan(const AnnotatedDocumentPair& doc,
                                               Position t, int max_distance, Pred pred) {
  std::vector<Position> candidates;
  for (int s = 0; s < doc.sentence_count(); ++s)
    for (int i = 0; i < doc.target[s].size(); ++i) {
      const Position p{s, i};
      if (!(p < t)) continue;
      if (t.sentence - s > max_distance) continue;
      if (pred(doc.target[s].tokens[i])) candidates.push_back(p);
    }
  if (candidates.empty()) return std::nullopt;
  const Position c = *std::max_element(candidates.begin(), candidates.end());
  SolverResult r;
  r.c_tgt = TokenRef{Side::kTarget, c};
  if (auto src = first_partner(doc, c, false)) r.c_src = TokenRef{Side::kSource, *src};
  r.antecedent_distance = t.sentence - c.sentence;
  return r;
}

std::string render(const Sentence& s) {
  std::vector<std::string_view> forms;
  for (const Token& t : s.tokens) forms.push_back(t.form);
  return text::detokenize(forms);
}

// Whole-token presence of `form` (space separated words) in the sentence.
bool present(const Sentence& s, const std::string& form, bool case_sensitive) {
  std::vector<std::string> want;
  std::string cur;
  for (char c : form) {
    if (c == ' ') {
      if (!cur.empty()) want.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) want.push_back(cur);
  if (want.empty()) return false;
  auto same = [&](const std::string& have, const std::string& w) {
    const std::string a = case_sensitive ? have : fold(have);
    const std::string b = case_sensitive ? w : fold(w);
    if (!b.empty() && b.back() == '\'') return a.rfind(b, 0) == 0;
    return a == b;
  };
  for (int i = 0; i + static_cast<int>(want.size()) <= s.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < want.size() && ok; ++k)
      ok = same(s.tokens[i + k].form, want[k]);
    if (ok) return true;
  }
  return false;
}

KeyToken key(const AnnotatedDocumentPair& doc, TokenRef r) {
  const auto& side = r.side == Side::kSource ? doc.source : doc.target;
  return {r, side[r.pos.sentence].tokens[r.pos.token].form};
}

}  // namespace

bool oracle_matches(const TokenCriterion& c, const Sentence& s, int index) {
  if (c.wildcard) return true;
  const Token& t = s.tokens[index];
  const int n = static_cast<int>(c.form.size());
  if (n > 0) {
    if (index + 1 < n) return false;
    for (int k = 0; k < n; ++k) {
      const std::string& have = s.tokens[index - n + 1 + k].form;
      const bool eq = c.form_case_sensitive ? have == c.form[k] : fold(have) == fold(c.form[k]);
      if (!eq) return false;
    }
  }
  if (c.lemma && fold(*c.lemma) != fold(t.lemma)) return false;
  if (c.upos && *c.upos != t.upos) return false;
  for (const auto& [name, value] : c.required_feats.entries()) {
    auto have = t.feats.get(name);
    if (!have || *have != value) return false;
  }
  for (const auto& [name, value] : c.forbidden_feats.entries()) {
    auto have = t.feats.get(name);
    if (have && *have == value) return false;
  }
  for (const std::string& l : c.forbidden_lemmas)
    if (fold(l) == fold(t.lemma)) return false;
  return true;
}

TokenRef oracle_head(const AnnotatedDocumentPair& doc, const Mention& m) {
  const Sentence& s = doc.source[m.sentence];
  std::vector<int> outside;
  bool all_headed = true;
  for (int i = m.start; i < m.end; ++i) {
    const auto& h = s.tokens[i].head;
    if (!h) all_headed = false;
    else if (*h == i || *h < m.start || *h >= m.end) outside.push_back(i);
  }
  if (all_headed && outside.size() == 1) return {Side::kSource, {m.sentence, outside[0]}};
  int pick = m.end - 1;
  for (int i = m.start; i < m.end; ++i) {
    const std::string& u = s.tokens[i].upos;
    if (u == "NOUN" || u == "PROPN" || u == "PRON") pick = i;
  }
  return {Side::kSource, {m.sentence, pick}};
}

std::optional<SolverResult> oracle_coref(const AnnotatedDocumentPair& doc, Position t,
                                         int max_distance) {
  using Key = std::tuple<int, int, int, int>;
  std::vector<std::pair<Key, Mention>> candidates;
  for (const CorefChain& chain : doc.source_coref) {
    std::vector<Mention> covers;
    for (const Mention& m : chain.mentions)
      if (m.covers(t)) covers.push_back(m);
    if (covers.empty()) continue;
    const Mention first_cover = *std::min_element(
        covers.begin(), covers.end(), [](const Mention& a, const Mention& b) {
          return std::tie(a.sentence, a.start) < std::tie(b.sentence, b.start);
        });
    for (const Mention& m : chain.mentions) {
      if (m.covers(t)) continue;
      if (std::tie(m.sentence, m.start) >= std::tie(first_cover.sentence, first_cover.start))
        continue;
      candidates.push_back({Key{m.sentence, m.start, m.end, -chain.chain_id}, m});
    }
  }
  if (candidates.empty()) return std::nullopt;
  const Mention best = std::max_element(candidates.begin(), candidates.end(),
                                        [](const auto& a, const auto& b) {
                                          return a.first < b.first;
                                        })->second;
  if (t.sentence - best.sentence > max_distance) return std::nullopt;
  const TokenRef c_src = oracle_head(doc, best);
  auto c_tgt = first_partner(doc, c_src.pos, true);
  if (!c_tgt) return std::nullopt;
  SolverResult r;
  r.c_src = c_src;
  r.c_tgt = TokenRef{Side::kTarget, *c_tgt};
  r.antecedent_distance = t.sentence - best.sentence;
  return r;
}

std::optional<SolverResult> oracle_target_verb(const AnnotatedDocumentPair& doc,
                                               Position t, int max_distance) {
  const Token& tt = doc.target[t.sentence].tokens[t.token];
  if (tt.lemma.empty()) return std::nullopt;
  return oracle_target_scan(doc, t, max_distance, [&](const Token& c) {
    return verbal(c) && fold(c.lemma) == fold(tt.lemma);
  });
}

std::optional<SolverResult> oracle_target_case(const AnnotatedDocumentPair& doc,
                                               Position t, int max_distance) {
  const Token& tt = doc.target[t.sentence].tokens[t.token];
  auto wanted = tt.feats.get("Case");
  if (!wanted) return std::nullopt;
  return oracle_target_scan(doc, t, max_distance, [&](const Token& c) {
    return c.upos == "NOUN" && c.feats.get("Case") == wanted;
  });
}

std::vector<ExtractedExample> oracle_extract(const AnnotatedDocumentPair& doc,
                                             std::span<const RulePack> packs,
                                             int max_distance, const std::string& corpus) {
  using Order = std::tuple<int, int, int, std::size_t, std::size_t>;
  std::vector<std::pair<Order, ExtractedExample>> found;
  for (std::size_t p = 0; p < packs.size(); ++p) {
    const RulePack& pack = packs[p];
    if (pack.source_lang != doc.source_lang || pack.target_lang != doc.target_lang) continue;
    for (std::size_t r = 0; r < pack.rules.size(); ++r) {
      const Rule& rule = pack.rules[r];
      for (const AlignmentLink& link : doc.alignments) {
        const Position ts = link.source();
        const Position tt = link.target();
        if (!oracle_matches(rule.t_src, doc.source[ts.sentence], ts.token)) continue;
        if (!oracle_matches(rule.t_tgt, doc.target[tt.sentence], tt.token)) continue;
        std::optional<SolverResult> res;
        const Sentence& tgt_sentence = doc.target[tt.sentence];
        switch (rule.solver) {
          case SolverKind::kNone:
            res = SolverResult{};
            break;
          case SolverKind::kCoref:
            res = oracle_coref(doc, ts, max_distance);
            break;
          case SolverKind::kTargetVerbEllipsis:
            if (verbal(tgt_sentence.tokens[tt.token]))
              res = oracle_target_verb(doc, tt, max_distance);
            break;
          case SolverKind::kTargetCaseMatch: {
            bool any_verb = false;
            for (const Token& x : tgt_sentence.tokens) any_verb = any_verb || verbal(x);
            if (!any_verb) res = oracle_target_case(doc, tt, max_distance);
            break;
          }
        }
        if (!res) continue;
        if (rule.c_src && (!res->c_src || !oracle_matches(*rule.c_src,
                                                          doc.source[res->c_src->pos.sentence],
                                                          res->c_src->pos.token)))
          continue;
        if (rule.c_tgt && (!res->c_tgt || !oracle_matches(*rule.c_tgt,
                                                          doc.target[res->c_tgt->pos.sentence],
                                                          res->c_tgt->pos.token)))
          continue;

        ExtractedExample e;
        const int s = ts.sentence;
        e.example_id = doc.doc_id + "#" + std::to_string(s) + "#" + pack.pack_id + "/" +
                       rule.rule_id + "#" + std::to_string(ts.token) + "." +
                       std::to_string(tt.token);
        e.corpus = corpus;
        e.doc_id = doc.doc_id;
        e.year = doc.year;
        e.category = rule.category;
        e.pack_id = pack.pack_id;
        e.rule_id = rule.rule_id;
        e.src_lang = doc.source_lang;
        e.tgt_lang = doc.target_lang;
        for (int c = std::max(0, s - max_distance); c < s; ++c) {
          e.src_context.push_back(render(doc.source[c]));
          e.tgt_context.push_back(render(doc.target[c]));
        }
        e.src_sentence = render(doc.source[s]);
        e.tgt_sentence = render(tgt_sentence);
        for (const Token& x : doc.source[s].tokens) e.src_tokens.push_back(x.form);
        for (const Token& x : tgt_sentence.tokens) e.tgt_tokens.push_back(x.form);
        e.t_src = key(doc, {Side::kSource, ts});
        e.t_tgt = key(doc, {Side::kTarget, tt});
        if (res->c_src) e.c_src = key(doc, *res->c_src);
        if (res->c_tgt) e.c_tgt = key(doc, *res->c_tgt);
        e.antecedent_distance = res->antecedent_distance;
        e.expected_forms = rule.expected_from == ExpectedFrom::kTargetToken
                               ? std::vector<std::string>{e.t_tgt.form}
                               : rule.expected_forms;
        e.expected_case_sensitive = rule.expected_case_sensitive;
        bool all_present = !e.expected_forms.empty();
        for (const std::string& f : e.expected_forms)
          all_present = all_present && present(tgt_sentence, f, e.expected_case_sensitive);
        if (!all_present) continue;
        found.push_back({Order{s, ts.token, tt.token, p, r}, std::move(e)});
      }
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ExtractedExample> out;
  for (auto& [k, e] : found) out.push_back(std::move(e));
  return out;
}

}  // namespace ctxmine::testing
