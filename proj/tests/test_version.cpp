#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "generators.hpp"
#include "vulnrel/version.hpp"

using namespace vulnrel;

TEST(ParseVersion, PlainRelease) {
  auto v = parse_version("1.4.18");
  EXPECT_EQ(v.epoch, 0u);
  EXPECT_EQ(v.release, (std::vector<std::uint64_t>{1, 4, 18}));
  EXPECT_FALSE(v.pre);
  EXPECT_FALSE(v.legacy);
}

TEST(ParseVersion, AlphaWithoutNumber) {
  auto v = parse_version("1.2.3-alpha");
  EXPECT_EQ(v.release, (std::vector<std::uint64_t>{1, 2, 3}));
  ASSERT_TRUE(v.pre);
  EXPECT_EQ(v.pre->kind, PreKind::alpha);
  EXPECT_EQ(v.pre->number, 0u);
}

TEST(ParseVersion, ReleaseCandidate) {
  auto v = parse_version("1.2.3-rc.0");
  EXPECT_EQ(v.release, (std::vector<std::uint64_t>{1, 2, 3}));
  ASSERT_TRUE(v.pre);
  EXPECT_EQ(v.pre->kind, PreKind::rc);
  EXPECT_EQ(v.pre->number, 0u);
}

TEST(ParseVersion, FullGrammar) {
  auto v = parse_version("  V2!1.0b3.post4.dev5+Ubuntu-1 ");
  EXPECT_EQ(v.epoch, 2u);
  EXPECT_EQ(v.release, (std::vector<std::uint64_t>{1, 0}));
  ASSERT_TRUE(v.pre);
  EXPECT_EQ(v.pre->kind, PreKind::beta);
  EXPECT_EQ(v.pre->number, 3u);
  EXPECT_EQ(v.post, 4u);
  EXPECT_EQ(v.dev, 5u);
  EXPECT_EQ(v.local, "ubuntu.1");
  EXPECT_EQ(canonical_string(v), "2!1.0-beta.3.post4.dev5+ubuntu.1");
}

TEST(ParseVersion, ImplicitPostRelease) {
  auto v = parse_version("1.0-1");
  EXPECT_EQ(v.post, 1u);
  EXPECT_FALSE(v.pre);
}

TEST(ParseVersion, EmptyIsAnError) {
  EXPECT_THROW(parse_version(""), ParseError);
  EXPECT_THROW(parse_version("   "), ParseError);
}

TEST(ParseVersion, UnparseableBecomesLegacy) {
  for (const char* s : {"final", "1.0.x", "2004d", "1.0+", "1..2", "99999999999999999999"}) {
    auto v = parse_version(s);
    EXPECT_TRUE(v.legacy) << s;
  }
  EXPECT_LT(parse_version("zzz"), parse_version("0.0.1.dev0"));
  EXPECT_LT(parse_version("abc"), parse_version("abd"));
}

TEST(Compare, NumericNotLexicographic) { EXPECT_LT(parse_version("1.6.2"), parse_version("1.6.10")); }

TEST(Compare, PreReleaseBeforeFinal) { EXPECT_LT(parse_version("1.2.3-alpha"), parse_version("1.2.3")); }

TEST(Compare, TrailingZerosInsignificant) {
  EXPECT_EQ(compare(parse_version("1.0"), parse_version("1.0.0")), std::strong_ordering::equal);
}

TEST(Compare, FullLadder) {
  const std::vector<std::string> ladder = {
      "1.0.dev1", "1.0a1.dev1", "1.0a1", "1.0a2", "1.0b1", "1.0rc1", "1.0rc1.post1",
      "1.0",      "1.0+local",  "1.0.post1.dev1", "1.0.post1", "1.0.1", "1.1.dev0", "1!0.1",
  };
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    EXPECT_LT(parse_version(ladder[i]), parse_version(ladder[i + 1])) << ladder[i] << " vs " << ladder[i + 1];
  }
}

TEST(CanonicalString, Normalization) {
  EXPECT_EQ(canonical_string(parse_version("1.0.0")), "1.0.0");
  EXPECT_EQ(canonical_string(parse_version("1_2")), "1.2");
  EXPECT_EQ(canonical_string(parse_version("1.2.3-RC.1")), "1.2.3-rc.1");
  EXPECT_EQ(canonical_string(parse_version("1.0c1")), "1.0-rc.1");
  EXPECT_EQ(equivalence_key(parse_version("1.0.0")), "1");
}

TEST(VersionProperties, RoundTripThroughCanonicalForm) {
  fuzz::Gen gen(11);
  for (int i = 0; i < 20000; ++i) {
    auto v = parse_version(gen.version_text());
    auto back = parse_version(canonical_string(v));
    EXPECT_EQ(compare(back, v), std::strong_ordering::equal) << v.raw;
    EXPECT_EQ(canonical_string(back), canonical_string(v)) << v.raw;
  }
}

TEST(VersionProperties, EqualityMatchesEquivalenceKey) {
  fuzz::Gen gen(12);
  for (int i = 0; i < 20000; ++i) {
    auto a = parse_version(gen.version_text());
    auto b = parse_version(gen.version_text());
    EXPECT_EQ(compare(a, b) == 0, equivalence_key(a) == equivalence_key(b)) << a.raw << " vs " << b.raw;
    if (canonical_string(a) == canonical_string(b)) {
      EXPECT_EQ(compare(a, b), std::strong_ordering::equal);
    }
  }
}

TEST(VersionProperties, TotalOrderLaws) {
  fuzz::Gen gen(13);
  for (int i = 0; i < 10000; ++i) {
    auto a = parse_version(gen.version_text());
    auto b = parse_version(gen.version_text());
    auto c = parse_version(gen.version_text());
    auto ab = compare(a, b);
    auto ba = compare(b, a);
    EXPECT_EQ(ab < 0, ba > 0);
    EXPECT_EQ(ab == 0, ba == 0);
    if (compare(a, b) <= 0 && compare(b, c) <= 0) {
      EXPECT_TRUE(compare(a, c) <= 0) << a.raw << " " << b.raw << " " << c.raw;
    }
    if (compare(a, b) == 0 && compare(b, c) == 0) {
      EXPECT_TRUE(compare(a, c) == 0);
    }
  }
}

TEST(VersionProperties, SortIsPermutationInvariant) {
  fuzz::Gen gen(14);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> texts;
    for (int i = 0; i < 40; ++i) texts.push_back(gen.version_text());
    auto sorted_keys = [](std::vector<std::string> t) {
      std::vector<Version> vs;
      for (auto& s : t) vs.push_back(parse_version(s));
      std::stable_sort(vs.begin(), vs.end(), [](const Version& x, const Version& y) { return compare(x, y) < 0; });
      std::vector<std::string> keys;
      for (auto& v : vs) keys.push_back(equivalence_key(v));
      return keys;
    };
    auto reference = sorted_keys(texts);
    std::shuffle(texts.begin(), texts.end(), gen.rng());
    EXPECT_EQ(sorted_keys(texts), reference);
  }
}
