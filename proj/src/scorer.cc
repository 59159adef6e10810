#include "ctxmine/scorer.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "ctxmine/errors.h"
#include "ctxmine/text.h"

namespace ctxmine {

using nlohmann::json;

namespace {

std::string scored_text(std::string_view hypothesis, const ScoreOptions& options) {
  return options.segment ? text::final_sentence(hypothesis) : text::trim(hypothesis);
}

std::unordered_map<std::string_view, const Hypothesis*> index_hypotheses(
    std::span<const ExtractedExample> examples, std::span<const Hypothesis> hypotheses) {
  std::unordered_map<std::string_view, const ExtractedExample*> known;
  known.reserve(examples.size());
  for (const ExtractedExample& e : examples) known.emplace(e.example_id, &e);
  std::unordered_map<std::string_view, const Hypothesis*> out;
  out.reserve(hypotheses.size());
  for (const Hypothesis& h : hypotheses) {
    if (!known.contains(h.example_id)) throw UnknownExampleError(h.example_id);
    out[h.example_id] = &h;
  }
  return out;
}

json tally_to_json(const Tally& t) {
  const auto acc = t.accuracy();
  return {{"correct", t.correct},
          {"total", t.total},
          {"accuracy", acc ? json(*acc) : json(nullptr)}};
}

std::string format_accuracy(const Tally& t) {
  const auto acc = t.accuracy();
  if (!acc) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *acc);
  return buf;
}

std::string tsv_field(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return out;
}

}  // namespace

std::optional<double> Tally::accuracy() const {
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<Hypothesis> read_hypotheses(std::istream& in) {
  std::vector<Hypothesis> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Hypothesis h;
    try {
      const json j = json::parse(line);
      h.example_id = j.at("example_id").get<std::string>();
      h.text = j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw CorpusError(line_no, std::string("bad hypothesis record: ") + e.what());
    }
    if (!seen.insert(h.example_id).second)
      throw CorpusError(line_no, "duplicate hypothesis for '" + h.example_id + "'");
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Hypothesis> read_hypotheses(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open hypotheses file");
  return read_hypotheses(in);
}

bool is_correct(const ExtractedExample& example, std::string_view hypothesis,
                const ScoreOptions& options) {
  const std::vector<std::string> hay = text::words(scored_text(hypothesis, options));
  for (const std::string& form : example.expected_forms) {
    if (text::contains_words(hay, text::words(form), example.expected_case_sensitive))
      return true;
  }
  return false;
}

ScoreReport score(std::span<const ExtractedExample> examples,
                  std::span<const Hypothesis> hypotheses, const ScoreOptions& options) {
  const auto by_id = index_hypotheses(examples, hypotheses);
  ScoreReport report;
  for (const ExtractedExample& e : examples) {
    auto it = by_id.find(e.example_id);
    if (it == by_id.end()) {
      report.examples_without_hypothesis += 1;
      continue;
    }
    const bool ok = is_correct(e, it->second->text, options);
    const std::string category(to_string(e.category));
    report.per_rule[e.label()].add(ok);
    report.per_category[category].add(ok);
    report.per_category_language[category][e.tgt_lang].add(ok);
    report.per_distance_bucket[e.antecedent_distance
                                   ? std::to_string(*e.antecedent_distance)
                                   : std::string("none")]
        .add(ok);
    report.overall.add(ok);
  }
  return report;
}

json report_to_json(const ScoreReport& r) {
  json rules = json::object();
  for (const auto& [k, t] : r.per_rule) rules[k] = tally_to_json(t);
  json categories = json::object();
  for (const auto& [k, t] : r.per_category) categories[k] = tally_to_json(t);
  json by_language = json::object();
  for (const auto& [c, langs] : r.per_category_language)
    for (const auto& [l, t] : langs) by_language[c][l] = tally_to_json(t);
  json distances = json::object();
  for (const auto& [k, t] : r.per_distance_bucket) distances[k] = tally_to_json(t);
  return {{"overall", tally_to_json(r.overall)},
          {"per_category", std::move(categories)},
          {"per_category_language", std::move(by_language)},
          {"per_rule", std::move(rules)},
          {"per_distance_bucket", std::move(distances)},
          {"examples_without_hypothesis", r.examples_without_hypothesis}};
}

std::string report_to_table(const ScoreReport& r) {
  std::set<std::string> languages;
  for (const auto& [c, langs] : r.per_category_language)
    for (const auto& [l, t] : langs) languages.insert(l);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"category"};
  for (const std::string& l : languages) header.push_back(l);
  header.push_back("all");
  header.push_back("n");
  rows.push_back(header);
  for (Category c : kAllCategories) {
    const std::string name(to_string(c));
    auto it = r.per_category.find(name);
    if (it == r.per_category.end()) continue;
    std::vector<std::string> row = {name};
    const auto& langs = r.per_category_language.at(name);
    for (const std::string& l : languages) {
      auto lt = langs.find(l);
      row.push_back(lt == langs.end() ? "-" : format_accuracy(lt->second));
    }
    row.push_back(format_accuracy(it->second));
    row.push_back(std::to_string(it->second.total));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> total(header.size(), "");
  total.front() = "overall";
  total[total.size() - 2] = format_accuracy(r.overall);
  total.back() = std::to_string(r.overall.total);
  rows.push_back(std::move(total));

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      width[i] = std::max(width[i], row[i].size());
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string& cell = row[i];
      const std::string pad(width[i] - cell.size(), ' ');
      if (i == 0) line += cell + pad;
      else line += "  " + pad + cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  if (r.overall.total == 0) out += "no hypotheses scored; accuracy undefined\n";
  if (r.examples_without_hypothesis > 0)
    out += std::to_string(r.examples_without_hypothesis) +
           " examples had no hypothesis and were excluded\n";
  return out;
}

ExportCounts export_pairs(std::span<const ExtractedExample> examples,
                          std::span<const Hypothesis> hypotheses, std::ostream& out,
                          const ScoreOptions& options) {
  const auto by_id = index_hypotheses(examples, hypotheses);
  ExportCounts counts;
  for (const ExtractedExample& e : examples) {
    auto it = by_id.find(e.example_id);
    if (it == by_id.end()) {
      counts.skipped += 1;
      continue;
    }
    out << tsv_field(e.src_sentence) << '\t' << tsv_field(e.tgt_sentence) << '\t'
        << tsv_field(scored_text(it->second->text, options)) << '\n';
    counts.written += 1;
  }
  return counts;
}

}  // namespace ctxmine
