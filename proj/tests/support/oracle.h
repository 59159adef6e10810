// Brute-force reference extractor. Shares no matching or solver code with
// the library: every candidate token is enumerated and filtered.
#ifndef CTXMINE_TESTS_ORACLE_H_
#define CTXMINE_TESTS_ORACLE_H_

#include <span>
#include <string>
#include <vector>

#include "ctxmine/extractor.h"

namespace ctxmine::testing {

bool oracle_matches(const TokenCriterion& c, const Sentence& s, int index);

// Returns nullopt when the solver finds nothing.
std::optional<SolverResult> oracle_coref(const AnnotatedDocumentPair& doc, Position t,
                                         int max_distance);
std::optional<SolverResult> oracle_target_verb(const AnnotatedDocumentPair& doc,
                                               Position t, int max_distance);
std::optional<SolverResult> oracle_target_case(const AnnotatedDocumentPair& doc,
                                               Position t, int max_distance);
TokenRef oracle_head(const AnnotatedDocumentPair& doc, const Mention& m);

std::vector<ExtractedExample> oracle_extract(const AnnotatedDocumentPair& doc,
                                             std::span<const RulePack> packs,
                                             int max_distance,
                                             const std::string& corpus = "");

}  // namespace ctxmine::testing

#endif  // CTXMINE_TESTS_ORACLE_H_
