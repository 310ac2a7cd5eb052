#include "moodtune/mood.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "moodtune/errors.hpp"

namespace moodtune {

namespace {

void check_unit(double value, const char* axis) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(std::string(axis) + " " + std::to_string(value) +
                          " outside [0, 1]");
  }
}

// Column index of the cell for a coordinate: 0 for [0,1/3), 1 for
// [1/3,2/3), 2 for [2/3,1].
int cell_index(double value) {
  if (value >= 2.0 / 3.0) return 2;
  if (value >= 1.0 / 3.0) return 1;
  return 0;
}

// Row-major by energy (row) then valence (column), matching the grid layout
// with Sad in the lower-left and Excited in the upper-right.
constexpr MoodCategory kGrid[3][3] = {
    {MoodCategory::Sad, MoodCategory::Tired, MoodCategory::Relaxed},
    {MoodCategory::Distressed, MoodCategory::Neutral, MoodCategory::Happy},
    {MoodCategory::Angry, MoodCategory::Stimulated, MoodCategory::Excited},
};

struct Cell {
  int column;
  int row;
};

Cell cell_of(MoodCategory category) {
  for (int row = 0; row < 3; ++row) {
    for (int column = 0; column < 3; ++column) {
      if (kGrid[row][column] == category) return {column, row};
    }
  }
  throw ValidationError("invalid mood category");
}

Interval interval_of(int index) {
  return {index / 3.0, (index + 1) / 3.0};
}

}  // namespace

MoodPoint::MoodPoint(double valence, double energy)
    : valence_(valence), energy_(energy) {
  check_unit(valence, "valence");
  check_unit(energy, "energy");
}

FeatureVector::FeatureVector(double valence, double energy)
    : valence_(valence), energy_(energy) {
  check_unit(valence, "valence");
  check_unit(energy, "energy");
}

MoodRegion region_of(MoodCategory category) {
  const Cell cell = cell_of(category);
  return {category, interval_of(cell.column), interval_of(cell.row)};
}

MoodCategory category_of(const MoodPoint& point) {
  return kGrid[cell_index(point.energy())][cell_index(point.valence())];
}

MoodPoint target_point(MoodCategory category) {
  const Cell cell = cell_of(category);
  return {(2 * cell.column + 1) / 6.0, (2 * cell.row + 1) / 6.0};
}

MoodCategory parse_mood(std::string_view label) {
  std::string lowered(label);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (MoodCategory category : kAllMoods) {
    if (to_label(category) == lowered) return category;
  }
  throw UnknownMoodError(std::string(label));
}

std::string_view to_label(MoodCategory category) {
  switch (category) {
    case MoodCategory::Sad: return "sad";
    case MoodCategory::Distressed: return "distressed";
    case MoodCategory::Angry: return "angry";
    case MoodCategory::Tired: return "tired";
    case MoodCategory::Neutral: return "neutral";
    case MoodCategory::Stimulated: return "stimulated";
    case MoodCategory::Relaxed: return "relaxed";
    case MoodCategory::Happy: return "happy";
    case MoodCategory::Excited: return "excited";
  }
  return "unknown";
}

std::string_view display_name(MoodCategory category) {
  switch (category) {
    case MoodCategory::Sad: return "Sad";
    case MoodCategory::Distressed: return "Distressed";
    case MoodCategory::Angry: return "Angry";
    case MoodCategory::Tired: return "Tired";
    case MoodCategory::Neutral: return "Neutral";
    case MoodCategory::Stimulated: return "Stimulated";
    case MoodCategory::Relaxed: return "Relaxed";
    case MoodCategory::Happy: return "Happy";
    case MoodCategory::Excited: return "Excited";
  }
  return "Unknown";
}

}  // namespace moodtune
