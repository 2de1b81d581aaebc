#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elm/datagen.hpp"
#include "elm/hypothesis.hpp"
#include "elm/smoothness.hpp"
#include "elm/solvers.hpp"
#include "elm/stats.hpp"
#include "elm/types.hpp"

namespace elm {

enum class Variant { plain, regularized };

std::string to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

/// Sample size, smoothness assumptions and the (sigma, n, lambda) they induce.
struct ScheduleParams {
  Index m = 0;
  double r = 1.0;
  int d = 1;
  double epsilon = 0.05;
  double sigma = 1.0;
  Index n = 1;
  std::optional<double> lambda;
  Variant variant = Variant::plain;
};

/// floor(v), except that a value within a few ulps below an integer counts
/// as that integer (pow(1000, 2/3.) evaluates to 99.99999999999997).
Index integer_part(double v);

/// Least-squares schedule: sigma = m^{(-1+eps)/(2r+2d)}, n = [m^{d/(r+d)}].
ScheduleParams schedule_plain(Index m, double r, int d, double epsilon);

/// Ridge schedule for d/2 <= r <= d: sigma = m^{-1/(2r+d)+eps},
/// n = [m^{2d/(2r+d)}], lambda = m^{-(2r-d)/(4r+2d)}.
ScheduleParams schedule_regularized(Index m, double r, int d, double epsilon);

ScheduleParams make_schedule(Variant v, Index m, double r, int d, double epsilon);

/// Squared-error decay exponent of the upper bounds: -r/(r+d) for plain
/// least squares and -2r/(2r+d) with coefficient regularization.
double theoretical_exponent(Variant v, double r, int d);

/// Knobs shared by every study that are not part of the schedule.
struct ElmSettings {
  double margin = 0.5;    // centers live in [-a, 1+a]^d
  int kernel_order = 0;   // s; 0 picks max(1, ceil(r))
  int threads = 1;        // 0 = hardware concurrency

  int order_for(double r) const;
};

struct TrialRecord {
  ScheduleParams schedule;
  std::uint64_t trial_seed = 0;
  double l2_error_sq = 0.0;       // |pi_M f_z - f_rho|^2, Monte Carlo
  double l2_standard_error = 0.0;
  double training_mse = 0.0;
  double coefficient_norm_sq = 0.0;
  Index effective_rank = 0;
  double wall_time = 0.0;         // seconds; excluded from every written output

  /// Equality of all deterministic fields (wall_time ignored).
  bool same_outcome(const TrialRecord& other) const;
};

/// A fitted model together with its diagnostics.
struct FittedElm {
  ElmModel<double> model;
  FitDiagnostics diagnostics;
};

/// Draw centers from `centers_seed`, build the design on `data` and fit by
/// the schedule's variant (ridge uses the m*lambda convention of fit_ridge).
/// The returned model carries truncation level data.M.
FittedElm fit_elm(const Dataset& data, const ScheduleParams& schedule, const ElmSettings& settings,
                  std::uint64_t centers_seed);

/// pi_M applied to model predictions at each row of X.
VectorXd predict_truncated(const ElmModel<double>& model, const MatrixXd& X);

/// Probe count used for test error: max(10 m, 1e5).
Index probe_count(Index m);

/// Fit on a given dataset and score the truncated predictor against f with
/// probe_count(data.size()) probes drawn from probe_seed.
TrialRecord run_trial_on(const Dataset& data, const TargetFunction& target, const ScheduleParams& schedule,
                         const ElmSettings& settings, std::uint64_t centers_seed, std::uint64_t probe_seed);

/// One end-to-end trial; data, centers and probes come from the "data",
/// "centers" and "probes" branches of trial_seed.
TrialRecord run_trial(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise,
                      const ElmSettings& settings, std::uint64_t trial_seed);

struct RateRow {
  Index m = 0;
  Index n = 0;
  double sigma = 0.0;
  std::optional<double> lambda;
  double q10 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q90 = 0.0;
};

struct RateStudyResult {
  Variant variant = Variant::plain;
  std::vector<RateRow> rows;            // sorted by m
  std::vector<TrialRecord> trials;      // sorted by (m, trial index)
  double fitted_exponent = 0.0;         // slope of log2 median squared error on log2 m
  double fitted_exponent_unsquared = 0.0;
  double intercept = 0.0;
  double fit_r2 = 0.0;
  double theoretical_exponent = 0.0;
};

struct RateStudyConfig {
  Variant variant = Variant::plain;
  std::vector<Index> m_list;
  int trials = 20;
  double epsilon = 0.05;
  NoiseSpec noise;
  std::uint64_t master_seed = 0;
  ElmSettings settings;
};

/// Seed of trial t at sample size m; independent of the variant so plain and
/// regularized studies see identical data and center draws.
std::uint64_t rate_trial_seed(std::uint64_t master_seed, Index m, int trial);

/// Sorts m internally; requires >= 4 distinct sizes and >= 5 trials.
RateStudyResult rate_study(const TargetFunction& target, const RateStudyConfig& config);

/// Slope fit of log2(error) on log2(m) for a given error table; rows are
/// sorted by m first. Errors must be positive.
LinearFit fit_rate_exponent(std::vector<Index> m_list, std::vector<double> errors);

struct UncertaintyRow {
  double sigma = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
  double relative_iqr = 0.0;   // iqr / median (0 when median is 0)
  double exceedance = 0.0;     // fraction of trials with sup error > threshold
  std::vector<double> errors;  // per trial index
};

struct UncertaintyStudyResult {
  Index n = 0;
  Index m = 0;
  double threshold = 0.0;
  std::vector<UncertaintyRow> rows;
};

struct UncertaintyStudyConfig {
  std::vector<double> sigma_list;
  Index n_fixed = 100;
  int trials = 50;
  double threshold = 0.1;
  int grid_points = 0;  // per dimension; 0 picks 1001 / 101 / 31 for d = 1 / 2 / 3
  std::uint64_t master_seed = 0;
  ElmSettings settings;
};

/// Noiseless fits with m = 20 n at every sigma over repeated center draws;
/// trial t uses the same data and centers at every sigma.
UncertaintyStudyResult uncertainty_study(const TargetFunction& target, const UncertaintyStudyConfig& config);

struct ApproxStudyResult {
  double sigma = 0.0;
  Index n = 0;
  Index m = 0;
  std::vector<double> errors;
  double median = 0.0;
};

/// Sup-norm approximation error of noiseless least-squares fits with n
/// centers. sigma defaults to n^{(-1+eps)/(2d)}.
ApproxStudyResult approximation_study(const TargetFunction& target, Index n, std::optional<double> sigma, double epsilon,
                                      int trials, int grid_points, std::uint64_t master_seed,
                                      const ElmSettings& settings);

struct RemedyResult {
  TrialRecord chosen;
  Index chosen_index = 0;
  std::vector<TrialRecord> records;
  std::vector<double> validation_mse;
};

/// Multiple training: one train/validation split, T center draws fitted on
/// the train part, keep the one with least validation MSE (truncated).
RemedyResult best_of_T(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise, int T,
                       double validation_fraction, std::uint64_t master_seed, const ElmSettings& settings);

/// Train split and seeds used by best_of_T, so callers can reproduce trials.
struct RemedySplit {
  Dataset train;
  Dataset validation;
  std::uint64_t probe_seed = 0;
};
RemedySplit remedy_split(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise,
                         double validation_fraction, std::uint64_t master_seed);
std::uint64_t remedy_centers_seed(std::uint64_t master_seed, int t);

struct RemedyStudyRow {
  int repetition = 0;
  Index chosen_index = 0;
  double best_validation_mse = 0.0;
  double best_error = 0.0;    // best-of-T test error
  double single_error = 0.0;  // best-of-1 test error, same seeds
};

struct RemedyStudyResult {
  int T = 1;
  std::vector<RemedyStudyRow> rows;
  double median_best = 0.0;
  double median_single = 0.0;
};

RemedyStudyResult remedy_study(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise,
                               int T, double validation_fraction, int repetitions, std::uint64_t master_seed,
                               const ElmSettings& settings);

}  // namespace elm
