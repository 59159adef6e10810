#include "ctxmine/splitter.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

#include "ctxmine/errors.h"

namespace ctxmine {

using nlohmann::json;

namespace {

constexpr Split kWritten[] = {Split::kDev, Split::kDevtest, Split::kTest};

bool newer_first(const ExtractedExample* a, const ExtractedExample* b) {
  const int ya = a->year.value_or(0);
  const int yb = b->year.value_or(0);
  if (ya != yb) return ya > yb;
  return std::tie(a->doc_id, a->t_src.ref.pos.sentence, a->t_src.ref.pos.token,
                  a->t_tgt.ref.pos.token, a->example_id) <
         std::tie(b->doc_id, b->t_src.ref.pos.sentence, b->t_src.ref.pos.token,
                  b->t_tgt.ref.pos.token, b->example_id);
}

std::string file_safe(std::string s) {
  for (char& c : s)
    if (c == '/' || c == '\\' || c == '\0') c = '_';
  return s;
}

std::size_t& slot(SplitCounts& c, Split s) {
  switch (s) {
    case Split::kDev: return c.dev;
    case Split::kDevtest: return c.devtest;
    case Split::kTest: return c.test;
    case Split::kUnassigned: break;
  }
  return c.unassigned;
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kDev: return "dev";
    case Split::kDevtest: return "devtest";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

std::optional<Split> split_from_string(std::string_view s) {
  for (Split v : {Split::kDev, Split::kDevtest, Split::kTest, Split::kUnassigned})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

void SplitConfig::validate() const {
  if (dev_ratio == 0 || devtest_ratio == 0 || test_ratio == 0)
    throw std::invalid_argument("split ratio parts must be positive");
  if (test_cap_per_label == 0) throw std::invalid_argument("test cap must be positive");
  if (dev_cap() == 0 || devtest_cap() == 0)
    throw std::invalid_argument("test cap too small for the ratio");
}

std::vector<SplitAssignment> split(std::span<const ExtractedExample> examples,
                                   const SplitConfig& config) {
  config.validate();
  std::vector<SplitAssignment> out(examples.size());
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out[i].example_id = examples[i].example_id;
    out[i].label = examples[i].label();
    groups[out[i].label].push_back(i);
  }

  std::vector<Split> pattern(config.test_ratio, Split::kTest);
  pattern.insert(pattern.end(), config.dev_ratio, Split::kDev);
  pattern.insert(pattern.end(), config.devtest_ratio, Split::kDevtest);

  for (auto& [label, members] : groups) {
    if (members.size() < config.min_label_count) {
      for (std::size_t i : members) out[i].split = Split::kTest;
      continue;
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return newer_first(&examples[a], &examples[b]);
    });
    SplitCounts filled;
    for (std::size_t k = 0; k < members.size(); ++k) {
      Split s = pattern[k % pattern.size()];
      const std::size_t cap = s == Split::kTest  ? config.test_cap_per_label
                              : s == Split::kDev ? config.dev_cap()
                                                 : config.devtest_cap();
      if (slot(filled, s) >= cap) s = Split::kUnassigned;
      slot(filled, s) += 1;
      out[members[k]].split = s;
    }
  }
  return out;
}

std::map<std::string, SplitCounts> count_splits(
    std::span<const SplitAssignment> assignments) {
  std::map<std::string, SplitCounts> out;
  for (const SplitAssignment& a : assignments) slot(out[a.label], a.split) += 1;
  return out;
}

std::string split_file_name(const ExtractedExample& e, Split s) {
  return file_safe(e.pack_id) + "." + file_safe(e.rule_id) + "." +
         std::string(to_string(s)) + ".jsonl";
}

json write_splits(std::span<const SplitAssignment> assignments,
                  std::span<const ExtractedExample> examples,
                  const std::filesystem::path& out_dir, const SplitConfig& config) {
  if (assignments.size() != examples.size())
    throw std::invalid_argument("assignments do not cover the examples");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), ec.message());

  // label -> split -> example indices in sorted split order
  std::map<std::string, std::map<Split, std::vector<std::size_t>>> files;
  std::map<std::string, const ExtractedExample*> first_of_label;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (assignments[i].example_id != examples[i].example_id)
      throw std::invalid_argument("assignment " + std::to_string(i) +
                                  " does not match its example");
    const std::string& label = assignments[i].label;
    first_of_label.emplace(label, &examples[i]);
    files[label][assignments[i].split].push_back(i);
  }

  json labels = json::object();
  SplitCounts totals;
  for (auto& [label, by_split] : files) {
    json entry = json::object();
    const ExtractedExample& any = *first_of_label.at(label);
    entry["pack_id"] = any.pack_id;
    entry["rule_id"] = any.rule_id;
    json written = json::array();
    json notes = json::array();
    SplitCounts counts;
    for (auto& [s, members] : by_split) slot(counts, s) = members.size();
    if (counts.total() < config.min_label_count)
      notes.push_back("fewer than " + std::to_string(config.min_label_count) +
                      " examples; all kept for test");
    for (Split s : kWritten) {
      auto it = by_split.find(s);
      if (it == by_split.end() || it->second.empty()) {
        notes.push_back(std::string(to_string(s)) + " is empty; no file written");
        continue;
      }
      std::vector<std::size_t>& members = it->second;
      std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return newer_first(&examples[a], &examples[b]);
      });
      const std::string name = split_file_name(any, s);
      const std::filesystem::path path = out_dir / name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError(path.string(), "cannot open for writing");
      for (std::size_t i : members) out << example_to_json(examples[i]).dump() << '\n';
      if (!out) throw IoError(path.string(), "write failed");
      written.push_back(name);
    }
    if (counts.unassigned > 0)
      notes.push_back(std::to_string(counts.unassigned) +
                      " examples over the caps left unassigned");
    entry["dev"] = counts.dev;
    entry["devtest"] = counts.devtest;
    entry["test"] = counts.test;
    entry["unassigned"] = counts.unassigned;
    entry["files"] = std::move(written);
    entry["notes"] = std::move(notes);
    labels[label] = std::move(entry);
    totals.dev += counts.dev;
    totals.devtest += counts.devtest;
    totals.test += counts.test;
    totals.unassigned += counts.unassigned;
  }

  json manifest = {
      {"config",
       {{"ratio", {config.dev_ratio, config.devtest_ratio, config.test_ratio}},
        {"min_label_count", config.min_label_count},
        {"test_cap_per_label", config.test_cap_per_label},
        {"dev_cap_per_label", config.dev_cap()},
        {"devtest_cap_per_label", config.devtest_cap()}}},
      {"labels", std::move(labels)},
      {"totals",
       {{"dev", totals.dev},
        {"devtest", totals.devtest},
        {"test", totals.test},
        {"unassigned", totals.unassigned},
        {"examples", totals.total()}}}};
  const std::filesystem::path path = out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
  return manifest;
}

}  // namespace ctxmine
