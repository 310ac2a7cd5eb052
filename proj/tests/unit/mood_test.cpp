#include <set>

#include <gtest/gtest.h>

#include "moodtune/errors.hpp"
#include "moodtune/mood.hpp"
#include "moodtune/random.hpp"

using namespace moodtune;

TEST(MoodPoint, RejectsOutOfRangeCoordinates) {
  EXPECT_THROW(MoodPoint(-0.01, 0.5), ValidationError);
  EXPECT_THROW(MoodPoint(0.5, 1.01), ValidationError);
  EXPECT_THROW(MoodPoint(std::nan(""), 0.5), ValidationError);
  EXPECT_NO_THROW(MoodPoint(0.0, 1.0));
  EXPECT_THROW(FeatureVector(1.5, 0.0), ValidationError);
}

TEST(CategoryOf, Examples) {
  EXPECT_EQ(category_of(MoodPoint(1.0 / 6, 1.0 / 6)), MoodCategory::Sad);
  EXPECT_EQ(category_of(MoodPoint(0.5, 0.5)), MoodCategory::Neutral);
  EXPECT_EQ(category_of(MoodPoint(1.0, 1.0)), MoodCategory::Excited);
}

TEST(CategoryOf, BoundariesBelongToHigherCell) {
  EXPECT_EQ(category_of(MoodPoint(1.0 / 3, 0.0)), MoodCategory::Tired);
  EXPECT_EQ(category_of(MoodPoint(2.0 / 3, 0.0)), MoodCategory::Relaxed);
  EXPECT_EQ(category_of(MoodPoint(0.0, 1.0 / 3)), MoodCategory::Distressed);
  EXPECT_EQ(category_of(MoodPoint(0.0, 2.0 / 3)), MoodCategory::Angry);
  EXPECT_EQ(category_of(MoodPoint(0.0, 0.0)), MoodCategory::Sad);
  EXPECT_EQ(category_of(MoodPoint(1.0, 0.0)), MoodCategory::Relaxed);
  EXPECT_EQ(category_of(MoodPoint(0.0, 1.0)), MoodCategory::Angry);
}

TEST(TargetPoint, Examples) {
  EXPECT_EQ(target_point(MoodCategory::Relaxed), MoodPoint(5.0 / 6, 1.0 / 6));
  EXPECT_EQ(target_point(MoodCategory::Neutral), MoodPoint(0.5, 0.5));
  EXPECT_EQ(target_point(MoodCategory::Angry), MoodPoint(1.0 / 6, 5.0 / 6));
}

TEST(ParseMood, CaseInsensitive) {
  EXPECT_EQ(parse_mood("relaxed"), MoodCategory::Relaxed);
  EXPECT_EQ(parse_mood("NEUTRAL"), MoodCategory::Neutral);
  try {
    parse_mood("joyful");
    FAIL() << "expected UnknownMoodError";
  } catch (const UnknownMoodError& e) {
    EXPECT_EQ(e.label(), "joyful");
  }
}

TEST(ParseMood, LabelsRoundTrip) {
  for (MoodCategory c : kAllMoods) {
    EXPECT_EQ(parse_mood(to_label(c)), c);
    EXPECT_EQ(parse_mood(display_name(c)), c);
  }
  EXPECT_EQ(to_label(MoodCategory::Stimulated), "stimulated");
}

TEST(MoodModel, TargetRoundTrip) {
  for (MoodCategory c : kAllMoods) EXPECT_EQ(category_of(target_point(c)), c);
}

TEST(MoodModel, TilingOverRandomPoints) {
  Rng rng(11);
  std::array<int, 9> hits{};
  for (int i = 0; i < 10000; ++i) {
    const MoodPoint p(rng.uniform(), rng.uniform());
    const MoodCategory c = category_of(p);
    const MoodRegion r = region_of(c);
    int owners = 0;
    for (MoodCategory other : kAllMoods) {
      const MoodRegion o = region_of(other);
      const bool in_v = p.valence() >= o.valence.lo &&
                        (p.valence() < o.valence.hi || (o.valence.hi == 1.0 && p.valence() == 1.0));
      const bool in_e = p.energy() >= o.energy.lo &&
                        (p.energy() < o.energy.hi || (o.energy.hi == 1.0 && p.energy() == 1.0));
      owners += (in_v && in_e) ? 1 : 0;
    }
    ASSERT_EQ(owners, 1);
    ASSERT_GE(p.valence(), r.valence.lo);
    ASSERT_GE(p.energy(), r.energy.lo);
    ++hits[static_cast<std::size_t>(c)];
  }
  for (int h : hits) EXPECT_GT(h, 0);
}

TEST(MoodModel, CentersDistinctAndInterior) {
  std::set<std::pair<double, double>> seen;
  for (MoodCategory c : kAllMoods) {
    const MoodPoint p = target_point(c);
    EXPECT_GT(p.valence(), 0.0);
    EXPECT_LT(p.valence(), 1.0);
    EXPECT_GT(p.energy(), 0.0);
    EXPECT_LT(p.energy(), 1.0);
    seen.insert({p.valence(), p.energy()});
  }
  EXPECT_EQ(seen.size(), 9u);
}
