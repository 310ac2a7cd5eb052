#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "moodtune/experiment.hpp"
#include "moodtune/mood.hpp"

namespace moodtune::stats {

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 5;

/// Ratings of the two arms, each value on the 1-5 scale.
struct RatingSample {
  std::vector<int> control;
  std::vector<int> treatment;

  /// Expands per-level counts (index 0 is rating 1) into a sample.
  static RatingSample from_counts(const std::array<int, 5>& control_counts,
                                  const std::array<int, 5>& treatment_counts);
};

/// How ranks are assigned to the combined sample.
///
/// `BestFirst` ranks best-first (rating 5 takes the smallest positions) and uses
/// the untied standard error. `Corrected` ranks in ascending order of rating
/// and applies the usual tie correction to the standard error.
enum class RankMode { BestFirst, Corrected };

using Histogram = std::array<int, 5>;

/// Midrank per rating level (index 0 is rating 1); empty for levels that do
/// not occur.
using MidrankTable = std::array<std::optional<double>, 5>;

struct RankSums {
  double control = 0.0;
  double treatment = 0.0;
};

struct UTestResult {
  double rank_sum_control = 0.0;
  double rank_sum_treatment = 0.0;
  /// Expected rank sum of the group holding the smaller rank sum.
  double mu_rank = 0.0;
  double sigma = 0.0;
  /// Standardized treatment rank sum, (R_t - n_t (N + 1) / 2) / sigma. Its
  /// magnitude always equals that of `z_min_rank_sum`.
  double z = 0.0;
  /// (min rank sum - mu_rank) / sigma, exactly as the worked analysis
  /// computes it.
  double z_min_rank_sum = 0.0;
  double p_two_tailed = 1.0;
};

/// Counts of ratings 1..5. Throws ValidationError on an out-of-range value.
Histogram histogram(std::span<const int> ratings);

/// Arithmetic mean. Throws ValidationError on empty input.
double mean_rating(std::span<const int> ratings);

MidrankTable midranks(const RatingSample& sample, RankMode mode = RankMode::BestFirst);

RankSums rank_sums(const RatingSample& sample, RankMode mode = RankMode::BestFirst);

/// Normal-approximation Mann-Whitney test without continuity correction.
/// Throws ValidationError when either group is empty.
UTestResult mann_whitney(const RatingSample& sample, RankMode mode = RankMode::BestFirst);

/// Two-tailed standard normal tail probability P(|Z| >= |z|).
double two_tailed_p(double z);

struct MoodMeans {
  MoodCategory mood;
  std::optional<double> control_mean;
  std::optional<double> treatment_mean;
};

/// Per-mood mean rating of each arm, in canonical mood order; moods with no
/// rows are omitted.
std::vector<MoodMeans> mean_by_mood(std::span<const ExportRow> rows);

/// Splits export rows into a RatingSample by arm.
RatingSample sample_from_rows(std::span<const ExportRow> rows);

}  // namespace moodtune::stats
