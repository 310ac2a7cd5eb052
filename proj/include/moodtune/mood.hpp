#pragma once

#include <array>
#include <string>
#include <string_view>

namespace moodtune {

/// A coordinate on the valence-energy plane. Both axes are unitless and
/// confined to [0, 1]; the constructor rejects anything else.
class MoodPoint {
 public:
  MoodPoint(double valence, double energy);

  double valence() const noexcept { return valence_; }
  double energy() const noexcept { return energy_; }

  friend bool operator==(const MoodPoint&, const MoodPoint&) = default;

 private:
  double valence_;
  double energy_;
};

/// Per-track audio features as reported by the feature provider.
class FeatureVector {
 public:
  FeatureVector(double valence, double energy);

  double valence() const noexcept { return valence_; }
  double energy() const noexcept { return energy_; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  double valence_;
  double energy_;
};

enum class MoodCategory {
  Sad,
  Distressed,
  Angry,
  Tired,
  Neutral,
  Stimulated,
  Relaxed,
  Happy,
  Excited,
};

inline constexpr std::array<MoodCategory, 9> kAllMoods = {
    MoodCategory::Sad,     MoodCategory::Distressed, MoodCategory::Angry,
    MoodCategory::Tired,   MoodCategory::Neutral,    MoodCategory::Stimulated,
    MoodCategory::Relaxed, MoodCategory::Happy,      MoodCategory::Excited,
};

/// Half-open interval [lo, hi), closed at 1 for the last cell on an axis.
struct Interval {
  double lo;
  double hi;
};

struct MoodRegion {
  MoodCategory category;
  Interval valence;
  Interval energy;
};

/// The 3x3 partition cell owned by a category. Valence selects the column
/// (low, mid, high) and energy selects the row.
MoodRegion region_of(MoodCategory category);

/// Category of the cell containing `point`. Points on an interior boundary
/// (1/3 or 2/3) belong to the higher cell.
MoodCategory category_of(const MoodPoint& point);

/// Center of the category's cell.
MoodPoint target_point(MoodCategory category);

/// Case-insensitive label lookup. Throws UnknownMoodError.
MoodCategory parse_mood(std::string_view label);

/// Lowercase wire label, e.g. "relaxed".
std::string_view to_label(MoodCategory category);

/// Capitalized display name, e.g. "Relaxed".
std::string_view display_name(MoodCategory category);

}  // namespace moodtune
