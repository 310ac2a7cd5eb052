#include "moodtune/stats.hpp"

#include <cmath>
#include <numeric>

#include "moodtune/errors.hpp"

namespace moodtune::stats {

namespace {

void check_rating(int rating) {
  if (rating < kMinRating || rating > kMaxRating) {
    throw ValidationError("rating " + std::to_string(rating) + " outside 1-5");
  }
}

void check_sample(const RatingSample& sample) {
  for (int r : sample.control) check_rating(r);
  for (int r : sample.treatment) check_rating(r);
}

// Order in which rating levels occupy rank positions.
std::array<int, 5> level_order(RankMode mode) {
  if (mode == RankMode::BestFirst) return {5, 4, 3, 2, 1};
  return {1, 2, 3, 4, 5};
}

double rank_sum_of(std::span<const int> ratings, const MidrankTable& table) {
  double total = 0.0;
  for (int r : ratings) total += *table[static_cast<std::size_t>(r - 1)];
  return total;
}

}  // namespace

RatingSample RatingSample::from_counts(const std::array<int, 5>& control_counts,
                                       const std::array<int, 5>& treatment_counts) {
  RatingSample sample;
  for (int level = kMinRating; level <= kMaxRating; ++level) {
    const auto i = static_cast<std::size_t>(level - 1);
    sample.control.insert(sample.control.end(),
                          static_cast<std::size_t>(control_counts[i]), level);
    sample.treatment.insert(sample.treatment.end(),
                            static_cast<std::size_t>(treatment_counts[i]), level);
  }
  return sample;
}

Histogram histogram(std::span<const int> ratings) {
  Histogram counts{};
  for (int r : ratings) {
    check_rating(r);
    ++counts[static_cast<std::size_t>(r - 1)];
  }
  return counts;
}

double mean_rating(std::span<const int> ratings) {
  if (ratings.empty()) throw ValidationError("mean of an empty rating list");
  const double total = std::accumulate(ratings.begin(), ratings.end(), 0.0);
  return total / static_cast<double>(ratings.size());
}

MidrankTable midranks(const RatingSample& sample, RankMode mode) {
  check_sample(sample);
  const Histogram c = histogram(sample.control);
  const Histogram t = histogram(sample.treatment);

  MidrankTable table{};
  int next_position = 1;
  for (int level : level_order(mode)) {
    const auto i = static_cast<std::size_t>(level - 1);
    const int count = c[i] + t[i];
    if (count == 0) continue;
    const int first = next_position;
    const int last = next_position + count - 1;
    table[i] = (first + last) / 2.0;
    next_position = last + 1;
  }
  return table;
}

RankSums rank_sums(const RatingSample& sample, RankMode mode) {
  const MidrankTable table = midranks(sample, mode);
  return {rank_sum_of(sample.control, table), rank_sum_of(sample.treatment, table)};
}

double two_tailed_p(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

UTestResult mann_whitney(const RatingSample& sample, RankMode mode) {
  if (sample.control.empty() || sample.treatment.empty()) {
    throw ValidationError("Mann-Whitney test needs ratings in both groups");
  }
  const RankSums sums = rank_sums(sample, mode);
  const double n_control = static_cast<double>(sample.control.size());
  const double n_treatment = static_cast<double>(sample.treatment.size());
  const double n_total = n_control + n_treatment;

  UTestResult result;
  result.rank_sum_control = sums.control;
  result.rank_sum_treatment = sums.treatment;

  double variance = n_control * n_treatment * (n_total + 1.0) / 12.0;
  if (mode == RankMode::Corrected) {
    const Histogram c = histogram(sample.control);
    const Histogram t = histogram(sample.treatment);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      const double ties = c[i] + t[i];
      tie_term += ties * ties * ties - ties;
    }
    if (n_total > 1.0) {
      variance = n_control * n_treatment / 12.0 *
                 ((n_total + 1.0) - tie_term / (n_total * (n_total - 1.0)));
    }
  }
  result.sigma = std::sqrt(std::max(variance, 0.0));

  const bool control_is_min = sums.control < sums.treatment;
  const double n_min = control_is_min ? n_control : n_treatment;
  const double min_sum = control_is_min ? sums.control : sums.treatment;
  result.mu_rank = n_min * (n_total + 1.0) / 2.0;

  const double mu_treatment = n_treatment * (n_total + 1.0) / 2.0;
  if (result.sigma > 0.0) {
    result.z = (sums.treatment - mu_treatment) / result.sigma;
    result.z_min_rank_sum = (min_sum - result.mu_rank) / result.sigma;
  }
  result.p_two_tailed = two_tailed_p(result.z);
  return result;
}

std::vector<MoodMeans> mean_by_mood(std::span<const ExportRow> rows) {
  std::vector<MoodMeans> out;
  for (MoodCategory mood : kAllMoods) {
    std::vector<int> control;
    std::vector<int> treatment;
    for (const ExportRow& row : rows) {
      if (row.mood != mood) continue;
      (row.arm == Arm::Control ? control : treatment).push_back(row.rating);
    }
    if (control.empty() && treatment.empty()) continue;
    MoodMeans means{mood, std::nullopt, std::nullopt};
    if (!control.empty()) means.control_mean = mean_rating(control);
    if (!treatment.empty()) means.treatment_mean = mean_rating(treatment);
    out.push_back(means);
  }
  return out;
}

RatingSample sample_from_rows(std::span<const ExportRow> rows) {
  RatingSample sample;
  for (const ExportRow& row : rows) {
    (row.arm == Arm::Control ? sample.control : sample.treatment).push_back(row.rating);
  }
  return sample;
}

}  // namespace moodtune::stats
