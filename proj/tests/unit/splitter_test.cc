#include "ctxmine/splitter.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ctxmine/errors.h"

namespace ctxmine {
namespace {

namespace fs = std::filesystem;

// `n` examples of one label with years drawn from 1990..2018 (some missing).
std::vector<ExtractedExample> label_examples(const std::string& pack, const std::string& rule,
                                             std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> year(1990, 2018);
  std::vector<ExtractedExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ExtractedExample e;
    e.doc_id = "d" + std::to_string(i / 10);
    e.pack_id = pack;
    e.rule_id = rule;
    const int sent = static_cast<int>(i % 10);
    e.t_src.ref = {Side::kSource, {sent, 1}};
    e.t_tgt.ref = {Side::kTarget, {sent, 1}};
    if (rng() % 17 != 0) e.year = year(rng);
    e.example_id = e.doc_id + "#" + std::to_string(sent) + "#" + e.label() + "#1.1";
    e.expected_forms = {"x"};
    out.push_back(std::move(e));
  }
  return out;
}

SplitCounts counts_for(std::size_t n) {
  const auto ex = label_examples("p", "R", n, n);
  return count_splits(split(ex)).at("p/R");
}

TEST(Split, UnderMinimumAllTest) {
  EXPECT_EQ(counts_for(80), (SplitCounts{0, 0, 80, 0}));
  EXPECT_EQ(counts_for(99), (SplitCounts{0, 0, 99, 0}));
}

TEST(Split, ExactRatio) {
  EXPECT_EQ(counts_for(700), (SplitCounts{100, 100, 500, 0}));
  EXPECT_EQ(counts_for(100), (SplitCounts{14, 14, 72, 0}));
}

TEST(Split, Caps) {
  EXPECT_EQ(counts_for(70000), (SplitCounts{1000, 1000, 5000, 63000}));
  EXPECT_EQ(counts_for(7000), (SplitCounts{1000, 1000, 5000, 0}));
  EXPECT_EQ(counts_for(7001), (SplitCounts{1000, 1000, 5000, 1}));
}

TEST(Split, PerLabelPartitionAndOrder) {
  auto a = label_examples("p", "A", 80, 1);
  auto b = label_examples("p", "B", 700, 2);
  auto c = label_examples("q", "A", 150, 3);
  std::vector<ExtractedExample> all;
  for (auto* v : {&a, &b, &c}) all.insert(all.end(), v->begin(), v->end());
  std::shuffle(all.begin(), all.end(), std::mt19937_64(4));
  const auto assignments = split(all);
  ASSERT_EQ(assignments.size(), all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(assignments[i].example_id, all[i].example_id);
    EXPECT_EQ(assignments[i].label, all[i].label());
  }
  const auto counts = count_splits(assignments);
  EXPECT_EQ(counts.size(), 3u);
  EXPECT_EQ(counts.at("p/A"), (SplitCounts{0, 0, 80, 0}));
  EXPECT_EQ(counts.at("p/B"), (SplitCounts{100, 100, 500, 0}));
  EXPECT_EQ(counts.at("q/A").total(), 150u);
}

TEST(Split, InputOrderDoesNotMatter) {
  auto ex = label_examples("p", "R", 900, 8);
  auto before = split(ex);
  std::map<std::string, Split> by_id;
  for (const auto& a : before) by_id[a.example_id] = a.split;
  std::shuffle(ex.begin(), ex.end(), std::mt19937_64(9));
  for (const auto& a : split(ex)) EXPECT_EQ(by_id.at(a.example_id), a.split);
}

TEST(Split, PartitionAndRatioBound) {
  // The pattern deals five test slots before the first dev slot, so before
  // the caps bind 5*|dev| - |test| stays within [-5, 0].
  for (std::size_t n = 100; n <= 7000; n += 37) {
    const SplitCounts c = counts_for(n);
    ASSERT_EQ(c.total(), n);
    ASSERT_EQ(c.unassigned, 0u);
    const long diff = 5 * static_cast<long>(c.dev) - static_cast<long>(c.test);
    ASSERT_GE(diff, -5) << n;
    ASSERT_LE(diff, 0) << n;
    ASSERT_LE(c.devtest, c.dev);
    ASSERT_GE(c.devtest + 1, c.dev);
  }
}

int year_of(const ExtractedExample& e) { return e.year.value_or(0); }

TEST(Split, Recency) {
  const auto ex = label_examples("p", "R", 20000, 5);
  const auto as = split(ex);
  int oldest_kept = 1 << 30;
  int newest_unassigned = -1;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    if (as[i].split == Split::kUnassigned)
      newest_unassigned = std::max(newest_unassigned, year_of(ex[i]));
    else if (as[i].split == Split::kTest)
      oldest_kept = std::min(oldest_kept, year_of(ex[i]));
  }
  ASSERT_GE(newest_unassigned, 0);
  EXPECT_GE(oldest_kept, newest_unassigned);
}

TEST(SplitConfig, Validate) {
  SplitConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.dev_cap(), 1000u);
  c.test_ratio = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.test_cap_per_label = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SplitNames, RoundTrip) {
  for (Split s : {Split::kDev, Split::kDevtest, Split::kTest, Split::kUnassigned})
    EXPECT_EQ(split_from_string(to_string(s)), s);
  EXPECT_FALSE(split_from_string("train"));
  ExtractedExample e;
  e.pack_id = "en-de-pronouns";
  e.rule_id = "NOM.FORM+PLUR";
  EXPECT_EQ(split_file_name(e, Split::kDevtest), "en-de-pronouns.NOM.FORM+PLUR.devtest.jsonl");
}

class WriteSplits : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ctxmine_splits_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::map<std::string, std::string> snapshot(const fs::path& d) const {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(d))
      out[entry.path().filename().string()] = slurp(entry.path());
    return out;
  }

  fs::path dir_;
};

TEST_F(WriteSplits, ThreeLabelsNineFiles) {
  std::vector<ExtractedExample> all;
  for (const char* r : {"A", "B", "C"}) {
    auto v = label_examples("p", r, 140, r[0]);
    all.insert(all.end(), v.begin(), v.end());
  }
  const auto as = split(all);
  const auto manifest = write_splits(as, all, dir_);
  const auto files = snapshot(dir_);
  EXPECT_EQ(files.size(), 10u);
  EXPECT_TRUE(files.count("manifest.json"));
  EXPECT_TRUE(files.count("p.B.devtest.jsonl"));
  EXPECT_EQ(manifest["labels"]["p/A"]["dev"], 20);
  EXPECT_EQ(manifest["labels"]["p/A"]["test"], 100);
  EXPECT_EQ(manifest["totals"]["examples"], 420);
  EXPECT_EQ(nlohmann::json::parse(files.at("manifest.json")), manifest);

  // Files hold the right examples, one JSON object per line.
  std::istringstream lines(files.at("p.C.dev.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto e = example_from_json(nlohmann::json::parse(line));
    EXPECT_EQ(e.rule_id, "C");
    ++n;
  }
  EXPECT_EQ(n, 20u);
}

TEST_F(WriteSplits, SmallLabelNoted) {
  const auto ex = label_examples("p", "Small", 12, 1);
  const auto manifest = write_splits(split(ex), ex, dir_);
  const auto& entry = manifest["labels"]["p/Small"];
  EXPECT_EQ(entry["test"], 12);
  EXPECT_EQ(entry["files"].size(), 1u);
  EXPECT_EQ(entry["notes"].size(), 3u);  // under minimum, dev and devtest empty
  EXPECT_EQ(snapshot(dir_).size(), 2u);
}

TEST_F(WriteSplits, UnassignedNotedNotWritten) {
  SplitConfig cfg;
  cfg.test_cap_per_label = 100;
  const auto ex = label_examples("p", "Big", 300, 1);
  const auto manifest = write_splits(split(ex, cfg), ex, dir_, cfg);
  EXPECT_EQ(manifest["labels"]["p/Big"]["unassigned"], 160);
  EXPECT_EQ(manifest["labels"]["p/Big"]["notes"].size(), 1u);
  EXPECT_EQ(snapshot(dir_).size(), 4u);
}

TEST_F(WriteSplits, RerunIsByteIdentical) {
  auto ex = label_examples("p", "R", 500, 1);
  write_splits(split(ex), ex, dir_ / "a");
  std::shuffle(ex.begin(), ex.end(), std::mt19937_64(3));
  write_splits(split(ex), ex, dir_ / "b");
  EXPECT_EQ(snapshot(dir_ / "a"), snapshot(dir_ / "b"));
}

TEST_F(WriteSplits, UnwritableDirectory) {
  const auto ex = label_examples("p", "R", 5, 1);
  { std::ofstream(dir_.string()) << "x"; }
  EXPECT_THROW(write_splits(split(ex), ex, dir_ / "sub"), IoError);
  fs::remove(dir_);
}

}  // namespace
}  // namespace ctxmine
