#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "vulnrel/markov.hpp"

using namespace vulnrel;

namespace {

Bits parse(const std::string& s) {
  Bits b;
  for (char c : s) b.push_back(c == '1' ? 1 : 0);
  return b;
}

}  // namespace

TEST(Markov, UnconditionalProbability) {
  EXPECT_DOUBLE_EQ(unconditional_probability(parse("11110000")), 0.5);
  EXPECT_DOUBLE_EQ(unconditional_probability(parse("0001")), 0.25);
  EXPECT_THROW(unconditional_probability(Bits{}), InsufficientDataError);
}

TEST(Markov, TransitionTableExample) {
  auto t = transition_table(parse("1101000"));
  EXPECT_EQ(t.counts[1][1], 1u);
  EXPECT_EQ(t.counts[1][0], 2u);
  EXPECT_EQ(t.counts[0][1], 1u);
  EXPECT_EQ(t.counts[0][0], 2u);
  EXPECT_EQ(t.total(), 6u);
  auto m = transition_probabilities(t);
  EXPECT_DOUBLE_EQ(*m.p(1, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(*m.p(0, 0), 2.0 / 3.0);
}

TEST(Markov, UndefinedRowsAreReported) {
  auto m = transition_probabilities(transition_table(parse("1111")));
  EXPECT_DOUBLE_EQ(*m.p(1, 1), 1.0);
  EXPECT_FALSE(m.p(0, 0));
  auto rec = markov_record({"p", parse("0000")});
  EXPECT_FALSE(rec.p_11);
  EXPECT_DOUBLE_EQ(*rec.p_00, 1.0);
  EXPECT_THROW(transition_table(parse("1")), InsufficientDataError);
}

TEST(Markov, SmoothingFillsEmptyRows) {
  auto m = transition_probabilities(transition_table(parse("1111")), 1.0);
  EXPECT_DOUBLE_EQ(*m.p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(*m.p(1, 1), 4.0 / 5.0);
}

TEST(Markov, RowsSumToOne) {
  fuzz::Gen gen(51);
  for (int round = 0; round < 2000; ++round) {
    Bits w(2 + gen.below(80));
    double p = 0.05 + 0.9 * gen.chance(0.5);
    for (auto& x : w) x = gen.chance(p) ? 1 : 0;
    for (double alpha : {0.0, 0.5}) {
      auto m = transition_probabilities(transition_table(w), alpha);
      for (int from = 0; from < 2; ++from) {
        if (!m.p(from, 0)) continue;
        EXPECT_NEAR(*m.p(from, 0) + *m.p(from, 1), 1.0, 1e-12);
        EXPECT_GE(*m.p(from, 1), 0.0);
        EXPECT_LE(*m.p(from, 1), 1.0);
      }
    }
    auto t = transition_table(w);
    EXPECT_EQ(t.total(), w.size() - 1);
  }
}

TEST(Markov, ReversalTransposesCounts) {
  fuzz::Gen gen(52);
  for (int round = 0; round < 1000; ++round) {
    Bits w(2 + gen.below(60));
    for (auto& x : w) x = gen.chance(0.4) ? 1 : 0;
    Bits rev(w.rbegin(), w.rend());
    auto a = transition_table(w);
    auto b = transition_table(rev);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) EXPECT_EQ(a.counts[i][j], b.counts[j][i]);
    }
  }
}

TEST(Statistics, PercentileInterpolates) {
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(percentile({7}, 0.75), 7.0);
  auto d = describe({3, 1, 2});
  EXPECT_EQ(d.count, 3u);
  EXPECT_DOUBLE_EQ(d.mean, 2.0);
  EXPECT_DOUBLE_EQ(d.min, 1.0);
  EXPECT_DOUBLE_EQ(d.max, 3.0);
}

TEST(Statistics, HistogramEdges) {
  auto h = histogram({0.0, 0.1, 0.3, 0.7, 1.0}, 0.0, 1.0, 10);
  ASSERT_EQ(h.size(), 10u);
  EXPECT_EQ(h[0].count, 1u);
  EXPECT_EQ(h[1].count, 1u);
  EXPECT_EQ(h[3].count, 1u);
  EXPECT_EQ(h[7].count, 1u);
  EXPECT_EQ(h[9].count, 1u);
  EXPECT_DOUBLE_EQ(h[9].right, 1.0);
  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  EXPECT_EQ(total, 5u);
}

TEST(CorpusSummary, Example) {
  std::vector<BinarySeries> corpus = {{"a", parse("1100")}, {"b", parse("1111")}, {"c", parse("0101010101")}};
  auto s = corpus_summary(corpus);
  ASSERT_EQ(s.records.size(), 3u);
  EXPECT_EQ(s.p_uncond.count, 3u);
  EXPECT_EQ(s.p_11.count, 3u);
  EXPECT_EQ(s.p_00.count, 2u);
  EXPECT_DOUBLE_EQ(s.releases.median, 4.0);
  EXPECT_EQ(s.hist_releases.size(), 1u);
  EXPECT_EQ(s.hist_releases[0].count, 3u);
  EXPECT_DOUBLE_EQ(s.hist_releases[0].right, 10.0);
  EXPECT_THROW(corpus_summary(std::vector<BinarySeries>{}), InsufficientDataError);
}
