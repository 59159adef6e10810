// Contextual-relationship solvers: given a matched ambiguous token, locate
// the preceding context tokens C_src / C_tgt that resolve it.
//
// Every solver only returns positions strictly before the ambiguous token
// and never further back than `max_distance` sentences.
#ifndef CTXMINE_SOLVERS_H_
#define CTXMINE_SOLVERS_H_

#include <optional>

#include "ctxmine/annotation.h"

namespace ctxmine {

inline constexpr int kDefaultMaxDistance = 5;

struct TokenRef {
  Side side = Side::kSource;
  Position pos;

  friend bool operator==(const TokenRef&, const TokenRef&) = default;
};

struct SolverResult {
  std::optional<TokenRef> c_src;
  std::optional<TokenRef> c_tgt;
  // Sentence index of T minus sentence index of C (C_src for coreference,
  // C_tgt for the target-side solvers).
  std::optional<int> antecedent_distance;

  friend bool operator==(const SolverResult&, const SolverResult&) = default;
};

// Head of a mention span: the only span token whose dependency head is
// outside the span (or that is the root). Without usable head links, the
// last NOUN/PROPN/PRON of the span, else the last token.
TokenRef head_of_span(const AnnotatedDocumentPair& doc, const Mention& mention);

// Nearest mention preceding the mention that covers `t_src`, across all
// chains covering it. C_src is that mention's head, C_tgt its first aligned
// target token. Empty when there is no covering chain, no prior mention, the
// antecedent is too far away or C_src is unaligned.
std::optional<SolverResult> solve_coref(const AnnotatedDocumentPair& doc,
                                        Position t_src, int max_distance);

// Most recent earlier target VERB/AUX token sharing T_tgt's lemma. Scan order
// is the current sentence leftward, then previous sentences right to left.
std::optional<SolverResult> solve_target_verb(const AnnotatedDocumentPair& doc,
                                              Position t_tgt, int max_distance);

// Most recent earlier target NOUN carrying the same Case value as T_tgt.
// Same scan order as solve_target_verb; empty when T_tgt has no Case.
std::optional<SolverResult> solve_target_case(const AnnotatedDocumentPair& doc,
                                              Position t_tgt, int max_distance);

SolverResult solve_none();

}  // namespace ctxmine

#endif  // CTXMINE_SOLVERS_H_
