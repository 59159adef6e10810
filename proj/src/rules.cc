#include "ctxmine/rules.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ctxmine/errors.h"
#include "ctxmine/text.h"

namespace ctxmine {

using nlohmann::json;

namespace {

constexpr std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::kGender, "Gender"},
    {Category::kAnimacy, "Animacy"},
    {Category::kFormality, "Formality"},
    {Category::kAuxiliary, "Auxiliary"},
    {Category::kInflection, "Inflection"},
};

constexpr std::pair<SolverKind, std::string_view> kSolverNames[] = {
    {SolverKind::kCoref, "coref"},
    {SolverKind::kNone, "none"},
    {SolverKind::kTargetVerbEllipsis, "target_verb_ellipsis"},
    {SolverKind::kTargetCaseMatch, "target_case_match"},
};

std::string normalize_upos(std::string upos) {
  if (upos == "PNOUN") return "PRON";
  return upos;
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  return out;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& rule_id, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw RuleSyntaxError(rule_id, where.empty() ? key : where + "." + key,
                            "unknown key");
  }
}

std::string get_string(const json& v, const std::string& rule_id,
                       const std::string& field) {
  if (!v.is_string()) throw RuleSyntaxError(rule_id, field, "expected a string");
  return v.get<std::string>();
}

MorphFeatures parse_feats(const json& v, const std::string& rule_id,
                          const std::string& field) {
  if (!v.is_object()) throw RuleSyntaxError(rule_id, field, "expected an object");
  MorphFeatures out;
  for (const auto& [name, value] : v.items()) {
    if (name.empty()) throw RuleSyntaxError(rule_id, field, "empty feature name");
    std::string s = get_string(value, rule_id, field + "." + name);
    if (!is_valid_feature_value(name, s))
      throw RuleSyntaxError(rule_id, field + "." + name,
                            "value '" + s + "' is not allowed");
    out.insert(name, std::move(s));
  }
  return out;
}

TokenCriterion parse_criterion(const json& v, const std::string& rule_id,
                               const std::string& field) {
  TokenCriterion c;
  if (v.is_string()) {
    if (v.get<std::string>() != "*")
      throw RuleSyntaxError(rule_id, field,
                            "a string criterion must be the wildcard \"*\"");
    c.wildcard = true;
    return c;
  }
  if (!v.is_object())
    throw RuleSyntaxError(rule_id, field, "expected an object or \"*\"");
  check_keys(v,
             {"form", "lemma", "upos", "feats", "not_feats", "forbidden_lemmas",
              "case_sensitive"},
             rule_id, field);
  if (auto it = v.find("form"); it != v.end()) {
    if (it->is_string()) {
      c.form = split_spaces(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& w : *it) {
        std::string s = get_string(w, rule_id, field + ".form");
        if (s.empty() || s.find(' ') != std::string::npos)
          throw RuleSyntaxError(rule_id, field + ".form",
                                "each form element must be one nonempty token");
        c.form.push_back(std::move(s));
      }
    } else {
      throw RuleSyntaxError(rule_id, field + ".form",
                            "expected a string or an array of strings");
    }
    if (c.form.empty())
      throw RuleSyntaxError(rule_id, field + ".form", "empty form");
  }
  if (auto it = v.find("lemma"); it != v.end()) {
    c.lemma = get_string(*it, rule_id, field + ".lemma");
    if (c.lemma->empty()) throw RuleSyntaxError(rule_id, field + ".lemma", "empty lemma");
  }
  if (auto it = v.find("upos"); it != v.end()) {
    c.upos = normalize_upos(get_string(*it, rule_id, field + ".upos"));
    if (c.upos->empty()) throw RuleSyntaxError(rule_id, field + ".upos", "empty upos");
  }
  if (auto it = v.find("feats"); it != v.end())
    c.required_feats = parse_feats(*it, rule_id, field + ".feats");
  if (auto it = v.find("not_feats"); it != v.end())
    c.forbidden_feats = parse_feats(*it, rule_id, field + ".not_feats");
  if (auto it = v.find("forbidden_lemmas"); it != v.end()) {
    if (!it->is_array())
      throw RuleSyntaxError(rule_id, field + ".forbidden_lemmas", "expected an array");
    for (const auto& w : *it)
      c.forbidden_lemmas.push_back(get_string(w, rule_id, field + ".forbidden_lemmas"));
  }
  if (auto it = v.find("case_sensitive"); it != v.end()) {
    if (!it->is_boolean())
      throw RuleSyntaxError(rule_id, field + ".case_sensitive", "expected a boolean");
    c.form_case_sensitive = it->get<bool>();
  }
  for (const auto& [name, value] : c.required_feats.entries()) {
    if (c.forbidden_feats.contains(name))
      throw RuleSyntaxError(rule_id, field,
                            "feature '" + name +
                                "' is both required and forbidden");
  }
  if (!c.has_constraints())
    throw RuleSyntaxError(rule_id, field,
                          "criterion has no constraints; write \"*\" for a wildcard");
  return c;
}

std::optional<TokenCriterion> parse_optional_criterion(
    const json& rule, const char* key, const std::string& rule_id) {
  auto it = rule.find(key);
  if (it == rule.end() || it->is_null()) return std::nullopt;
  return parse_criterion(*it, rule_id, key);
}

Rule parse_rule(const json& v, const RulePack& pack, std::size_t position) {
  if (!v.is_object())
    throw RuleSyntaxError("#" + std::to_string(position), "", "expected an object");
  auto id_it = v.find("rule_id");
  if (id_it == v.end())
    throw RuleSyntaxError("#" + std::to_string(position), "rule_id", "missing");
  Rule r;
  r.rule_id = get_string(*id_it, "#" + std::to_string(position), "rule_id");
  if (r.rule_id.empty())
    throw RuleSyntaxError("#" + std::to_string(position), "rule_id", "empty");
  const std::string& id = r.rule_id;
  check_keys(v,
             {"rule_id", "category", "solver", "t_src", "t_tgt", "c_src", "c_tgt",
              "expected_forms", "expected_case_sensitive", "expected_from"},
             id, "");
  r.source_lang = pack.source_lang;
  r.target_lang = pack.target_lang;
  r.category = pack.category;
  if (auto it = v.find("category"); it != v.end()) {
    auto cat = category_from_string(get_string(*it, id, "category"));
    if (!cat) throw RuleSyntaxError(id, "category", "unknown category");
    r.category = *cat;
  }
  auto solver_it = v.find("solver");
  if (solver_it == v.end()) throw RuleSyntaxError(id, "solver", "missing");
  auto solver = solver_from_string(get_string(*solver_it, id, "solver"));
  if (!solver) throw RuleSyntaxError(id, "solver", "unknown solver");
  r.solver = *solver;

  for (const char* key : {"t_src", "t_tgt"})
    if (v.find(key) == v.end()) throw RuleSyntaxError(id, key, "missing");
  r.t_src = parse_criterion(v.at("t_src"), id, "t_src");
  r.t_tgt = parse_criterion(v.at("t_tgt"), id, "t_tgt");
  r.c_src = parse_optional_criterion(v, "c_src", id);
  r.c_tgt = parse_optional_criterion(v, "c_tgt", id);

  if (r.solver == SolverKind::kNone && (r.c_src || r.c_tgt))
    throw RuleSyntaxError(id, "c_src", "solver 'none' takes no context criteria");
  if (r.solver == SolverKind::kCoref && !(r.c_src && r.c_tgt))
    throw RuleSyntaxError(id, r.c_src ? "c_tgt" : "c_src",
                          "solver 'coref' needs both context criteria");

  if (auto it = v.find("expected_from"); it != v.end()) {
    std::string from = get_string(*it, id, "expected_from");
    if (from == "rule") {
      r.expected_from = ExpectedFrom::kRule;
    } else if (from == "t_tgt") {
      r.expected_from = ExpectedFrom::kTargetToken;
    } else {
      throw RuleSyntaxError(id, "expected_from", "must be \"rule\" or \"t_tgt\"");
    }
  }
  if (auto it = v.find("expected_forms"); it != v.end()) {
    if (!it->is_array())
      throw RuleSyntaxError(id, "expected_forms", "expected an array");
    for (const auto& f : *it) {
      std::string s = get_string(f, id, "expected_forms");
      if (text::words(s).empty())
        throw RuleSyntaxError(id, "expected_forms", "form '" + s + "' has no words");
      r.expected_forms.push_back(std::move(s));
    }
    if (r.expected_from == ExpectedFrom::kTargetToken && !r.expected_forms.empty())
      throw RuleSyntaxError(id, "expected_forms",
                            "must be empty when expected_from is \"t_tgt\"");
  }
  if (r.expected_from == ExpectedFrom::kRule && r.expected_forms.empty() &&
      !r.t_tgt.form.empty())
    r.expected_forms.push_back(join(r.t_tgt.form));
  r.expected_case_sensitive = r.t_tgt.form_case_sensitive;
  if (auto it = v.find("expected_case_sensitive"); it != v.end()) {
    if (!it->is_boolean())
      throw RuleSyntaxError(id, "expected_case_sensitive", "expected a boolean");
    r.expected_case_sensitive = it->get<bool>();
  }
  return r;
}

json feats_to_json(const MorphFeatures& f) {
  json out = json::object();
  for (const auto& [name, value] : f.entries()) out[name] = value;
  return out;
}

bool same_constraints(const Rule& a, const Rule& b) {
  return a.category == b.category && a.t_src == b.t_src && a.t_tgt == b.t_tgt &&
         a.c_src == b.c_src && a.c_tgt == b.c_tgt && a.solver == b.solver &&
         a.expected_forms == b.expected_forms &&
         a.expected_case_sensitive == b.expected_case_sensitive &&
         a.expected_from == b.expected_from;
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [value, name] : kCategoryNames)
    if (value == c) return name;
  return "?";
}

std::optional<Category> category_from_string(std::string_view s) {
  for (const auto& [value, name] : kCategoryNames)
    if (name == s) return value;
  return std::nullopt;
}

std::string_view to_string(SolverKind s) {
  for (const auto& [value, name] : kSolverNames)
    if (value == s) return name;
  return "?";
}

std::optional<SolverKind> solver_from_string(std::string_view s) {
  for (const auto& [value, name] : kSolverNames)
    if (name == s) return value;
  return std::nullopt;
}

bool TokenCriterion::has_constraints() const {
  return !form.empty() || lemma || upos || !required_feats.empty() ||
         !forbidden_feats.empty() || !forbidden_lemmas.empty() || wildcard;
}

RulePack parse_rule_pack(const json& doc) {
  if (!doc.is_object()) throw RuleSyntaxError("", "", "pack must be a JSON object");
  check_keys(doc, {"pack_id", "source_lang", "target_lang", "category", "rules"},
             "", "");
  RulePack pack;
  for (const char* key : {"pack_id", "source_lang", "target_lang", "category", "rules"})
    if (doc.find(key) == doc.end()) throw RuleSyntaxError("", key, "missing");
  pack.pack_id = get_string(doc.at("pack_id"), "", "pack_id");
  pack.source_lang = get_string(doc.at("source_lang"), "", "source_lang");
  pack.target_lang = get_string(doc.at("target_lang"), "", "target_lang");
  if (pack.pack_id.empty() || pack.source_lang.empty() || pack.target_lang.empty())
    throw RuleSyntaxError("", "pack_id", "pack_id and languages must be nonempty");
  auto cat = category_from_string(get_string(doc.at("category"), "", "category"));
  if (!cat) throw RuleSyntaxError("", "category", "unknown category");
  pack.category = *cat;
  const json& rules = doc.at("rules");
  if (!rules.is_array()) throw RuleSyntaxError("", "rules", "expected an array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    Rule r = parse_rule(rules[i], pack, i);
    if (!seen.insert(r.rule_id).second)
      throw DuplicateRuleError(pack.pack_id, r.rule_id);
    pack.rules.push_back(std::move(r));
  }
  return pack;
}

RulePack load_rule_pack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open rule pack");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw RuleSyntaxError("", path.string(), std::string("malformed JSON: ") + e.what());
  }
  return parse_rule_pack(doc);
}

std::vector<RulePack> load_rule_packs(
    const std::vector<std::filesystem::path>& paths) {
  std::vector<RulePack> packs;
  for (const auto& p : paths) {
    std::error_code ec;
    if (std::filesystem::is_directory(p, ec)) {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
          files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) packs.push_back(load_rule_pack(f));
    } else {
      packs.push_back(load_rule_pack(p));
    }
  }
  return packs;
}

json criterion_to_json(const TokenCriterion& c) {
  if (c.wildcard) return "*";
  json out = json::object();
  if (c.form.size() == 1) out["form"] = c.form.front();
  if (c.form.size() > 1) out["form"] = c.form;
  if (c.form_case_sensitive) out["case_sensitive"] = true;
  if (c.lemma) out["lemma"] = *c.lemma;
  if (c.upos) out["upos"] = *c.upos;
  if (!c.required_feats.empty()) out["feats"] = feats_to_json(c.required_feats);
  if (!c.forbidden_feats.empty()) out["not_feats"] = feats_to_json(c.forbidden_feats);
  if (!c.forbidden_lemmas.empty()) out["forbidden_lemmas"] = c.forbidden_lemmas;
  return out;
}

json rule_pack_to_json(const RulePack& pack) {
  json rules = json::array();
  for (const Rule& r : pack.rules) {
    json jr = json::object();
    jr["rule_id"] = r.rule_id;
    jr["category"] = std::string(to_string(r.category));
    jr["solver"] = std::string(to_string(r.solver));
    jr["t_src"] = criterion_to_json(r.t_src);
    jr["t_tgt"] = criterion_to_json(r.t_tgt);
    jr["c_src"] = r.c_src ? criterion_to_json(*r.c_src) : json(nullptr);
    jr["c_tgt"] = r.c_tgt ? criterion_to_json(*r.c_tgt) : json(nullptr);
    jr["expected_from"] = r.expected_from == ExpectedFrom::kRule ? "rule" : "t_tgt";
    jr["expected_forms"] = r.expected_forms;
    jr["expected_case_sensitive"] = r.expected_case_sensitive;
    rules.push_back(std::move(jr));
  }
  return {{"pack_id", pack.pack_id},
          {"source_lang", pack.source_lang},
          {"target_lang", pack.target_lang},
          {"category", std::string(to_string(pack.category))},
          {"rules", std::move(rules)}};
}

bool matches(const TokenCriterion& c, const Sentence& sentence, int index) {
  if (index < 0 || index >= sentence.size()) return false;
  const Token& token = sentence.tokens[index];
  if (!c.form.empty()) {
    const int n = static_cast<int>(c.form.size());
    if (index + 1 < n) return false;
    for (int k = 0; k < n; ++k) {
      const std::string& have = sentence.tokens[index - n + 1 + k].form;
      const std::string& want = c.form[k];
      if (c.form_case_sensitive ? have != want
                                : !text::equals_ignore_case(have, want))
        return false;
    }
  }
  if (c.lemma && !text::equals_ignore_case(token.lemma, *c.lemma)) return false;
  if (c.upos && token.upos != *c.upos) return false;
  for (const auto& [name, value] : c.required_feats.entries()) {
    auto have = token.feats.get(name);
    if (!have || *have != value) return false;
  }
  for (const auto& [name, value] : c.forbidden_feats.entries()) {
    auto have = token.feats.get(name);
    if (have && *have == value) return false;
  }
  for (const std::string& lemma : c.forbidden_lemmas)
    if (text::equals_ignore_case(token.lemma, lemma)) return false;
  return true;
}

bool matches(const TokenCriterion& criterion, const Token& token) {
  Sentence single;
  single.tokens.push_back(token);
  single.tokens.back().index = 0;
  return matches(criterion, single, 0);
}

std::vector<Diagnostic> validate_pack(const RulePack& pack) {
  std::vector<Diagnostic> out;
  if (pack.rules.empty()) out.push_back({"", "pack '" + pack.pack_id + "' has no rules"});
  for (std::size_t i = 0; i < pack.rules.size(); ++i) {
    const Rule& r = pack.rules[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (same_constraints(pack.rules[j], r))
        out.push_back({r.rule_id, "overlaps rule '" + pack.rules[j].rule_id +
                                      "': identical criteria"});
    }
    if (r.expected_from == ExpectedFrom::kTargetToken) continue;
    if (r.expected_forms.empty()) {
      out.push_back({r.rule_id, "no expected forms"});
      continue;
    }
    if (r.t_tgt.form.empty()) {
      out.push_back({r.rule_id,
                     "t_tgt has no form constraint; expected forms are not "
                     "guaranteed to occur in extracted sentences"});
      continue;
    }
    const std::string tgt_form = join(r.t_tgt.form);
    for (const std::string& f : r.expected_forms) {
      const bool same = r.expected_case_sensitive
                            ? f == tgt_form
                            : text::equals_ignore_case(f, tgt_form);
      if (!same)
        out.push_back({r.rule_id, "expected form '" + f +
                                      "' differs from the t_tgt form '" +
                                      tgt_form + "'"});
    }
  }
  return out;
}

}  // namespace ctxmine
