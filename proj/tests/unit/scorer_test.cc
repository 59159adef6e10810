#include "ctxmine/scorer.h"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ctxmine/errors.h"

namespace ctxmine {
namespace {

ExtractedExample example(const std::string& id, std::vector<std::string> forms,
                         std::optional<int> distance = 1, bool case_sensitive = false,
                         Category c = Category::kGender, const std::string& lang = "fr") {
  ExtractedExample e;
  e.example_id = id;
  e.doc_id = id;
  e.pack_id = "en-" + lang + "-p";
  e.rule_id = std::string(to_string(c));
  e.category = c;
  e.src_lang = "en";
  e.tgt_lang = lang;
  e.expected_forms = std::move(forms);
  e.expected_case_sensitive = case_sensitive;
  e.antecedent_distance = distance;
  e.src_sentence = "src " + id;
  e.tgt_sentence = "tgt " + id;
  return e;
}

TEST(IsCorrect, Examples) {
  EXPECT_TRUE(is_correct(example("a", {"sais"}),
                         "Je pensais que tu méritais de savoir. Et maintenant tu sais."));
  EXPECT_FALSE(is_correct(example("b", {"il"}), "Ils ne veulent pas."));
  EXPECT_FALSE(is_correct(example("c", {"Sie"}, std::nullopt, true), "sie kommt morgen."));
  EXPECT_TRUE(is_correct(example("c", {"Sie"}, std::nullopt, true), "Kommen Sie morgen?"));
  EXPECT_TRUE(is_correct(example("d", {"IL"}), "Il ne veut pas."));
}

TEST(IsCorrect, OnlyFinalSentenceUnlessDisabled) {
  const auto e = example("a", {"sais"});
  const std::string hyp = "Tu sais. Et maintenant tu comprends.";
  EXPECT_FALSE(is_correct(e, hyp));
  ScoreOptions raw;
  raw.segment = false;
  EXPECT_TRUE(is_correct(e, hyp, raw));
}

TEST(IsCorrect, AnyExpectedFormAndMultiWord) {
  const auto e = example("a", {"la nôtre", "le nôtre"});
  EXPECT_TRUE(is_correct(e, "C'est le nôtre."));
  EXPECT_FALSE(is_correct(e, "C'est nôtre."));
  EXPECT_TRUE(is_correct(example("t", {"t'"}), "Je t'aime."));
}

TEST(IsCorrect, InvariantUnderWhitespaceAndPunctuation) {
  const auto e = example("a", {"ihn"});
  const std::vector<std::string> variants = {"Ich sehe ihn.", "  Ich sehe ihn.  ",
                                             "Ich sehe ihn!", "Ich sehe ihn…",
                                             "\"Ich sehe ihn\"", "Ich  sehe\tihn ."};
  for (const auto& v : variants) EXPECT_TRUE(is_correct(e, v)) << v;
  for (const auto& v : {"Ich sehe ihnen.", " Ich sehe sie! "}) EXPECT_FALSE(is_correct(e, v));
}

TEST(Score, HalfCorrect) {
  const std::vector<ExtractedExample> ex{example("1", {"il"}), example("2", {"il"}),
                                         example("3", {"elle"}), example("4", {"elle"})};
  const std::vector<Hypothesis> hyp{
      {"1", "Il vient."}, {"2", "Ils viennent."}, {"3", "Elle vient."}, {"4", "Il vient."}};
  const ScoreReport r = score(ex, hyp);
  EXPECT_EQ(r.overall, (Tally{2, 4}));
  EXPECT_DOUBLE_EQ(*r.overall.accuracy(), 50.0);
  EXPECT_EQ(r.per_category.at("Gender"), (Tally{2, 4}));
  EXPECT_EQ(r.per_category_language.at("Gender").at("fr"), (Tally{2, 4}));
}

TEST(Score, EmptyHypotheses) {
  const std::vector<ExtractedExample> ex{example("1", {"il"})};
  const ScoreReport r = score(ex, {});
  EXPECT_EQ(r.overall.total, 0u);
  EXPECT_FALSE(r.overall.accuracy());
  EXPECT_EQ(r.examples_without_hypothesis, 1u);
  EXPECT_TRUE(report_to_json(r)["overall"]["accuracy"].is_null());
  EXPECT_NE(report_to_table(r).find("accuracy undefined"), std::string::npos);
}

TEST(Score, DistanceBuckets) {
  const std::vector<ExtractedExample> ex{
      example("a", {"il"}, 0), example("b", {"il"}, 0), example("c", {"il"}, 1),
      example("d", {"il"}, 1), example("e", {"tu"}, std::nullopt, false, Category::kFormality)};
  const std::vector<Hypothesis> hyp{
      {"a", "il"}, {"b", "Il."}, {"c", "il"}, {"d", "elle"}, {"e", "vous"}};
  const ScoreReport r = score(ex, hyp);
  EXPECT_DOUBLE_EQ(*r.per_distance_bucket.at("0").accuracy(), 100.0);
  EXPECT_DOUBLE_EQ(*r.per_distance_bucket.at("1").accuracy(), 50.0);
  EXPECT_EQ(r.per_distance_bucket.at("none"), (Tally{0, 1}));
  std::size_t sum = 0;
  for (const auto& [k, t] : r.per_distance_bucket) sum += t.total;
  EXPECT_EQ(sum, r.overall.total);
  sum = 0;
  for (const auto& [k, t] : r.per_rule) sum += t.total;
  EXPECT_EQ(sum, r.overall.total);
}

TEST(Score, UnknownExample) {
  const std::vector<ExtractedExample> ex{example("1", {"il"})};
  const std::vector<Hypothesis> hyp{{"nope", "il"}};
  try {
    score(ex, hyp);
    FAIL();
  } catch (const UnknownExampleError& e) {
    EXPECT_EQ(e.example_id(), "nope");
  }
}

TEST(Score, PermutationInvariant) {
  std::vector<ExtractedExample> ex;
  std::vector<Hypothesis> hyp;
  std::mt19937_64 rng(1);
  const std::vector<std::string> forms{"il", "elle", "ils"};
  for (int i = 0; i < 200; ++i) {
    const std::string id = std::to_string(i);
    ex.push_back(example(id, {forms[rng() % 3]}, static_cast<int>(rng() % 4)));
    hyp.push_back({id, "Alors " + forms[rng() % 3] + " vient."});
  }
  const auto a = report_to_json(score(ex, hyp));
  std::shuffle(hyp.begin(), hyp.end(), rng);
  EXPECT_EQ(report_to_json(score(ex, hyp)), a);
}

TEST(Table, CategoriesByLanguage) {
  const std::vector<ExtractedExample> ex{
      example("1", {"il"}), example("2", {"er"}, 1, false, Category::kGender, "de"),
      example("3", {"du"}, std::nullopt, false, Category::kFormality, "de")};
  const std::vector<Hypothesis> hyp{{"1", "il"}, {"2", "es"}, {"3", "du"}};
  const std::string table = report_to_table(score(ex, hyp));
  std::istringstream in(table);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("de"), std::string::npos);
  EXPECT_NE(header.find("fr"), std::string::npos);
  EXPECT_NE(table.find("Gender"), std::string::npos);
  EXPECT_NE(table.find("Formality"), std::string::npos);
  EXPECT_NE(table.find("overall"), std::string::npos);
  EXPECT_NE(table.find("66.7"), std::string::npos);
}

TEST(ReadHypotheses, ParsesAndRejectsDuplicates) {
  std::istringstream ok("{\"example_id\":\"a\",\"text\":\"x\"}\n\n{\"example_id\":\"b\",\"text\":\"y\"}\n");
  const auto h = read_hypotheses(ok);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[1].text, "y");
  std::istringstream dup("{\"example_id\":\"a\",\"text\":\"x\"}\n{\"example_id\":\"a\",\"text\":\"y\"}\n");
  EXPECT_THROW(read_hypotheses(dup), CorpusError);
  std::istringstream bad("{\"example_id\":\"a\"}\n");
  EXPECT_THROW(read_hypotheses(bad), CorpusError);
  EXPECT_THROW(read_hypotheses("/nonexistent/h.jsonl"), IoError);
}

TEST(ExportPairs, LinesAndSkips) {
  std::vector<ExtractedExample> ex{example("1", {"il"}), example("2", {"il"}),
                                   example("3", {"il"}), example("4", {"il"})};
  ex[0].tgt_sentence = "Il\test là.";
  const std::vector<Hypothesis> hyp{
      {"1", "Bon. Il est là."}, {"2", "il"}, {"4", "x\ny"}};
  std::ostringstream out;
  const ExportCounts c = export_pairs(ex, hyp, out);
  EXPECT_EQ(c.written, 3u);
  EXPECT_EQ(c.skipped, 1u);
  EXPECT_EQ(out.str(), "src 1\tIl est là.\tIl est là.\nsrc 2\ttgt 2\til\nsrc 4\ttgt 4\tx y\n");
}

TEST(ExportPairs, ReferenceIsVerbatim) {
  std::vector<ExtractedExample> ex{example("1", {"il"}), example("2", {"il"}),
                                   example("3", {"il"})};
  std::vector<Hypothesis> hyp;
  for (const auto& e : ex) hyp.push_back({e.example_id, e.tgt_sentence});
  std::ostringstream out;
  EXPECT_EQ(export_pairs(ex, hyp, out).written, 3u);
  std::istringstream lines(out.str());
  std::string line;
  std::size_t i = 0;
  while (std::getline(lines, line)) {
    const auto tab = line.find('\t');
    const auto tab2 = line.find('\t', tab + 1);
    EXPECT_EQ(line.substr(tab + 1, tab2 - tab - 1), ex[i++].tgt_sentence);
  }
  EXPECT_EQ(i, 3u);
}

}  // namespace
}  // namespace ctxmine
