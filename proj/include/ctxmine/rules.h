// Declarative criteria over the four key tokens of an ambiguity and the
// JSON rule-pack format that ships them.
#ifndef CTXMINE_RULES_H_
#define CTXMINE_RULES_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxmine/annotation.h"
#include "json.hpp"

namespace ctxmine {

enum class Category { kGender, kAnimacy, kFormality, kAuxiliary, kInflection };

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);
inline constexpr Category kAllCategories[] = {
    Category::kGender, Category::kAnimacy, Category::kFormality,
    Category::kAuxiliary, Category::kInflection};

// Contextual relationship used to find C_src / C_tgt.
enum class SolverKind { kCoref, kNone, kTargetVerbEllipsis, kTargetCaseMatch };

std::string_view to_string(SolverKind s);
std::optional<SolverKind> solver_from_string(std::string_view s);

// Constraints on one token. Empty optional / empty list means "not
// constrained". A criterion with no constraint at all must be the explicit
// wildcard (written "*" in rule files).
struct TokenCriterion {
  bool wildcard = false;
  // Surface form; more than one entry is a multi-word form that must match
  // the tokens ending at the anchor token.
  std::vector<std::string> form;
  bool form_case_sensitive = false;
  std::optional<std::string> lemma;
  std::optional<std::string> upos;
  MorphFeatures required_feats;
  MorphFeatures forbidden_feats;
  std::vector<std::string> forbidden_lemmas;

  bool has_constraints() const;
  friend bool operator==(const TokenCriterion&, const TokenCriterion&) = default;
};

// Where the surface forms counted correct at scoring time come from.
enum class ExpectedFrom {
  kRule,         // the rule's expected_forms list
  kTargetToken,  // the surface form of the matched T_tgt token
};

struct Rule {
  std::string rule_id;
  Category category = Category::kGender;
  std::string source_lang;
  std::string target_lang;
  TokenCriterion t_src;
  TokenCriterion t_tgt;
  std::optional<TokenCriterion> c_src;
  std::optional<TokenCriterion> c_tgt;
  SolverKind solver = SolverKind::kNone;
  std::vector<std::string> expected_forms;
  bool expected_case_sensitive = false;
  ExpectedFrom expected_from = ExpectedFrom::kRule;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RulePack {
  std::string pack_id;
  std::string source_lang;
  std::string target_lang;
  Category category = Category::kGender;
  std::vector<Rule> rules;

  friend bool operator==(const RulePack&, const RulePack&) = default;
};

// Loads one pack file. Throws IoError, RuleSyntaxError, DuplicateRuleError.
RulePack load_rule_pack(const std::filesystem::path& path);
RulePack parse_rule_pack(const nlohmann::json& doc);
// Expands directories to the *.json files they contain (sorted by name).
std::vector<RulePack> load_rule_packs(
    const std::vector<std::filesystem::path>& paths);

// Canonical JSON form (PRON instead of PNOUN, defaults made explicit).
nlohmann::json rule_pack_to_json(const RulePack& pack);
nlohmann::json criterion_to_json(const TokenCriterion& c);

// True iff every constraint present in `criterion` holds for the token at
// `index` of `sentence`. Multi-word forms are compared against the tokens
// ending at `index`; all other constraints apply to that final token.
bool matches(const TokenCriterion& criterion, const Sentence& sentence,
             int index);
// Single-token convenience; a multi-word form never matches here.
bool matches(const TokenCriterion& criterion, const Token& token);

struct Diagnostic {
  std::string rule_id;
  std::string message;
};

// Non-fatal findings: rules identical in everything but rule_id, expected
// forms the T_tgt criterion can never produce, rules without expected forms
// and empty packs.
std::vector<Diagnostic> validate_pack(const RulePack& pack);

}  // namespace ctxmine

#endif  // CTXMINE_RULES_H_
