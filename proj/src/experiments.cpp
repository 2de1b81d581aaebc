#include "elm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "elm/parallel.hpp"
#include "elm/rng.hpp"

namespace elm {

std::string to_string(Variant v) { return v == Variant::plain ? "plain" : "regularized"; }

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "plain") return Variant::plain;
  if (name == "regularized") return Variant::regularized;
  return std::nullopt;
}

Index integer_part(double v) {
  if (!std::isfinite(v) || v < 0.0) throw DomainError("integer_part: value must be finite and >= 0");
  const double down = std::floor(v);
  if ((down + 1.0) - v <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, v)) return Index(down) + 1;
  return Index(down);
}

namespace {

void check_schedule_args(Index m, double r, int d) {
  if (m < 2) throw DomainError("schedule: m must be >= 2");
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("schedule: r must be positive");
  if (d < 1) throw DomainError("schedule: d must be >= 1");
}

}  // namespace

ScheduleParams schedule_plain(Index m, double r, int d, double epsilon) {
  check_schedule_args(m, r, d);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("schedule_plain: epsilon must lie in (0, 1)");
  ScheduleParams p;
  p.m = m;
  p.r = r;
  p.d = d;
  p.epsilon = epsilon;
  p.variant = Variant::plain;
  const double mm = double(m);
  p.sigma = std::pow(mm, (-1.0 + epsilon) / (2.0 * r + 2.0 * d));
  p.n = std::max<Index>(1, integer_part(std::pow(mm, double(d) / (r + d))));
  return p;
}

ScheduleParams schedule_regularized(Index m, double r, int d, double epsilon) {
  check_schedule_args(m, r, d);
  if (r < 0.5 * d || r > double(d))
    throw DomainError("schedule_regularized: r must satisfy d/2 <= r <= d (regularized rate constraint)");
  const double eps_max = 1.0 / (2.0 * r + d);
  if (!(epsilon > 0.0 && epsilon < eps_max))
    throw DomainError("schedule_regularized: epsilon must lie in (0, 1/(2r+d)) so that sigma decreases in m");
  ScheduleParams p;
  p.m = m;
  p.r = r;
  p.d = d;
  p.epsilon = epsilon;
  p.variant = Variant::regularized;
  const double mm = double(m);
  p.sigma = std::pow(mm, -1.0 / (2.0 * r + d) + epsilon);
  p.n = std::max<Index>(1, integer_part(std::pow(mm, 2.0 * d / (2.0 * r + d))));
  p.lambda = std::pow(mm, -(2.0 * r - d) / (4.0 * r + 2.0 * d));
  return p;
}

ScheduleParams make_schedule(Variant v, Index m, double r, int d, double epsilon) {
  return v == Variant::plain ? schedule_plain(m, r, d, epsilon) : schedule_regularized(m, r, d, epsilon);
}

double theoretical_exponent(Variant v, double r, int d) {
  return v == Variant::plain ? -r / (r + d) : -2.0 * r / (2.0 * r + d);
}

int ElmSettings::order_for(double r) const {
  if (kernel_order > 0) return kernel_order;
  return std::max(1, static_cast<int>(std::ceil(r - 1e-12)));
}

bool TrialRecord::same_outcome(const TrialRecord& o) const {
  const auto& a = schedule;
  const auto& b = o.schedule;
  return a.m == b.m && a.r == b.r && a.d == b.d && a.epsilon == b.epsilon && a.sigma == b.sigma && a.n == b.n &&
         a.lambda == b.lambda && a.variant == b.variant && trial_seed == o.trial_seed && l2_error_sq == o.l2_error_sq &&
         l2_standard_error == o.l2_standard_error && training_mse == o.training_mse &&
         coefficient_norm_sq == o.coefficient_norm_sq && effective_rank == o.effective_rank;
}

FittedElm fit_elm(const Dataset& data, const ScheduleParams& schedule, const ElmSettings& settings,
                  std::uint64_t centers_seed) {
  if (schedule.d != data.dim()) throw ShapeError("fit_elm: schedule dimension differs from data dimension");
  if (schedule.n < 1 || !(schedule.sigma > 0.0)) throw DomainError("fit_elm: invalid schedule");
  const Kernel kernel(schedule.sigma, settings.order_for(schedule.r), schedule.d);
  CenterSet<double> centers = draw_centers<double>(schedule.n, settings.margin, schedule.d, centers_seed);
  const MatrixXd design = build_design_matrix(data.X, centers, kernel);
  if (!all_finite(design))
    throw NumericalError("fit_elm: design matrix has non-finite entries (kernel overflow at sigma = " +
                         std::to_string(schedule.sigma) + ")");

  FitResult<double> fit;
  if (schedule.variant == Variant::regularized) {
    if (!schedule.lambda) throw DomainError("fit_elm: regularized schedule needs lambda");
    fit = fit_ridge(design, data.y, *schedule.lambda);
  } else {
    fit = fit_least_squares(design, data.y);
  }
  return FittedElm{ElmModel<double>(std::move(centers), kernel, std::move(fit.coefficients), data.M), fit.diagnostics};
}

VectorXd predict_truncated(const ElmModel<double>& model, const MatrixXd& X) {
  VectorXd raw = predict(model, X);
  if (model.truncation_level) raw = truncate(raw.array(), *model.truncation_level).matrix();
  return raw;
}

Index probe_count(Index m) { return std::max<Index>(10 * m, 100000); }

namespace {

using Clock = std::chrono::steady_clock;

TrialRecord score(const FittedElm& fitted, const TargetFunction& target, const ScheduleParams& schedule, Index m,
                  std::uint64_t probe_seed) {
  const auto predictor = [&](const MatrixXd& U) { return predict_truncated(fitted.model, U); };
  const L2Estimate err = estimate_l2_error(predictor, target, probe_count(m), probe_seed);
  TrialRecord rec;
  rec.schedule = schedule;
  rec.l2_error_sq = err.value;
  rec.l2_standard_error = err.standard_error;
  rec.training_mse = fitted.diagnostics.training_mse;
  rec.coefficient_norm_sq = fitted.diagnostics.coefficient_norm_sq;
  rec.effective_rank = fitted.diagnostics.effective_rank;
  if (!std::isfinite(rec.l2_error_sq) || !std::isfinite(rec.training_mse) || !std::isfinite(rec.coefficient_norm_sq))
    throw NumericalError("trial produced a non-finite error or diagnostic");
  return rec;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

TrialRecord run_trial_on(const Dataset& data, const TargetFunction& target, const ScheduleParams& schedule,
                         const ElmSettings& settings, std::uint64_t centers_seed, std::uint64_t probe_seed) {
  const auto start = Clock::now();
  const FittedElm fitted = fit_elm(data, schedule, settings, centers_seed);
  TrialRecord rec = score(fitted, target, schedule, data.size(), probe_seed);
  rec.trial_seed = centers_seed;
  rec.wall_time = seconds_since(start);
  return rec;
}

TrialRecord run_trial(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise,
                      const ElmSettings& settings, std::uint64_t trial_seed) {
  const auto start = Clock::now();
  const Dataset data = sample_dataset(target, schedule.m, noise, derive_seed(trial_seed, "data"));
  TrialRecord rec = run_trial_on(data, target, schedule, settings, derive_seed(trial_seed, "centers"),
                                 derive_seed(trial_seed, "probes"));
  rec.trial_seed = trial_seed;
  rec.wall_time = seconds_since(start);
  return rec;
}

std::uint64_t rate_trial_seed(std::uint64_t master_seed, Index m, int trial) {
  return derive_seed(derive_seed(master_seed, "rate/m", static_cast<std::uint64_t>(m)), "rate/trial",
                     static_cast<std::uint64_t>(trial));
}

LinearFit fit_rate_exponent(std::vector<Index> m_list, std::vector<double> errors) {
  if (m_list.size() != errors.size()) throw ShapeError("fit_rate_exponent: one error per sample size");
  std::vector<std::size_t> order(m_list.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return m_list[a] < m_list[b]; });
  std::vector<double> x, y;
  for (auto i : order) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
      throw DomainError("fit_rate_exponent: errors must be positive and finite to take logarithms");
    x.push_back(std::log2(double(m_list[i])));
    y.push_back(std::log2(errors[i]));
  }
  return fit_line(x, y);
}

RateStudyResult rate_study(const TargetFunction& target, const RateStudyConfig& config) {
  std::vector<Index> ms = config.m_list;
  std::sort(ms.begin(), ms.end());
  if (ms.size() < 4) throw DomainError("rate_study: m_list requires >= 4 entries");
  if (std::adjacent_find(ms.begin(), ms.end()) != ms.end())
    throw DomainError("rate_study: m_list entries must be distinct");
  if (config.trials < 5) throw DomainError("rate_study: trials must be >= 5");
  if (target.dim() < 1) throw DomainError("rate_study: invalid target");

  std::vector<ScheduleParams> schedules;
  for (Index m : ms)
    schedules.push_back(make_schedule(config.variant, m, target.smoothness(), target.dim(), config.epsilon));

  const Index per_m = config.trials;
  const Index jobs = Index(ms.size()) * per_m;
  std::vector<TrialRecord> records(static_cast<std::size_t>(jobs));
  // Largest problems first keeps workers busy at the tail.
  parallel_for(jobs, config.settings.threads, [&](Index job) {
    const Index slot = jobs - 1 - job;
    const auto mi = static_cast<std::size_t>(slot / per_m);
    const int t = static_cast<int>(slot % per_m);
    records[static_cast<std::size_t>(slot)] =
        run_trial(target, schedules[mi], config.noise, config.settings, rate_trial_seed(config.master_seed, ms[mi], t));
  });

  RateStudyResult result;
  result.variant = config.variant;
  std::vector<double> medians;
  for (std::size_t mi = 0; mi < ms.size(); ++mi) {
    std::vector<double> errs;
    for (Index t = 0; t < per_m; ++t) errs.push_back(records[mi * per_m + t].l2_error_sq);
    RateRow row;
    row.m = ms[mi];
    row.n = schedules[mi].n;
    row.sigma = schedules[mi].sigma;
    row.lambda = schedules[mi].lambda;
    row.q10 = quantile(errs, 0.10);
    row.q25 = quantile(errs, 0.25);
    row.median = quantile(errs, 0.50);
    row.q75 = quantile(errs, 0.75);
    row.q90 = quantile(errs, 0.90);
    medians.push_back(row.median);
    result.rows.push_back(row);
  }
  const LinearFit fit = fit_rate_exponent(ms, medians);
  result.trials = std::move(records);
  result.fitted_exponent = fit.slope;
  result.fitted_exponent_unsquared = 0.5 * fit.slope;
  result.intercept = fit.intercept;
  result.fit_r2 = fit.r2;
  result.theoretical_exponent = theoretical_exponent(config.variant, target.smoothness(), target.dim());
  return result;
}

namespace {

int default_grid_points(int d) {
  switch (d) {
    case 1: return 1001;
    case 2: return 101;
    default: return 31;
  }
}

double sup_error_of_fit(const FittedElm& fitted, const TargetFunction& target, const MatrixXd& grid) {
  const Eigen::ArrayXd diff = (predict(fitted.model, grid) - target.evaluate_rows(grid)).array().abs();
  if (!diff.isFinite().all()) throw NumericalError("sup error: non-finite prediction");
  return diff.maxCoeff();
}

ScheduleParams fixed_schedule(const TargetFunction& target, Index m, Index n, double sigma) {
  ScheduleParams p;
  p.m = m;
  p.r = target.smoothness();
  p.d = target.dim();
  p.sigma = sigma;
  p.n = n;
  p.variant = Variant::plain;
  return p;
}

}  // namespace

UncertaintyStudyResult uncertainty_study(const TargetFunction& target, const UncertaintyStudyConfig& config) {
  const auto& sigmas = config.sigma_list;
  if (sigmas.empty()) throw DomainError("uncertainty_study: sigma_list must not be empty");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0) || !std::isfinite(sigmas[i])) throw DomainError("uncertainty_study: sigma must be positive");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) throw DomainError("uncertainty_study: sigma_list must be increasing");
  }
  if (config.trials < 30) throw DomainError("uncertainty_study: trials must be >= 30");
  if (config.n_fixed < 1) throw DomainError("uncertainty_study: n must be >= 1");
  if (!(config.threshold >= 0.0)) throw DomainError("uncertainty_study: threshold must be >= 0");
  if (target.dim() > 3) throw UnsupportedDimensionError("uncertainty_study: sup-norm grid supports d <= 3");

  const Index m = 20 * config.n_fixed;
  const int points = config.grid_points > 0 ? config.grid_points : default_grid_points(target.dim());
  const MatrixXd grid = regular_grid(target.dim(), points);
  const NoiseSpec noiseless{NoiseKind::none, 0.0};

  const Index trials = config.trials;
  const Index jobs = Index(sigmas.size()) * trials;
  std::vector<double> errors(static_cast<std::size_t>(jobs));
  parallel_for(jobs, config.settings.threads, [&](Index job) {
    const auto si = static_cast<std::size_t>(job / trials);
    const auto t = static_cast<std::uint64_t>(job % trials);
    const Dataset data = sample_dataset(target, m, noiseless, derive_seed(config.master_seed, "uncertainty/data", t));
    const ScheduleParams sched = fixed_schedule(target, m, config.n_fixed, sigmas[si]);
    const FittedElm fitted =
        fit_elm(data, sched, config.settings, derive_seed(config.master_seed, "uncertainty/centers", t));
    errors[static_cast<std::size_t>(job)] = sup_error_of_fit(fitted, target, grid);
  });

  UncertaintyStudyResult result;
  result.n = config.n_fixed;
  result.m = m;
  result.threshold = config.threshold;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    UncertaintyRow row;
    row.sigma = sigmas[si];
    row.errors.assign(errors.begin() + Index(si) * trials, errors.begin() + Index(si + 1) * trials);
    row.median = median(row.errors);
    row.q25 = quantile(row.errors, 0.25);
    row.q75 = quantile(row.errors, 0.75);
    row.iqr = row.q75 - row.q25;
    row.relative_iqr = row.median > 0.0 ? row.iqr / row.median : 0.0;
    const auto over = std::count_if(row.errors.begin(), row.errors.end(), [&](double e) { return e > config.threshold; });
    row.exceedance = double(over) / double(row.errors.size());
    result.rows.push_back(std::move(row));
  }
  return result;
}

ApproxStudyResult approximation_study(const TargetFunction& target, Index n, std::optional<double> sigma, double epsilon,
                                      int trials, int grid_points, std::uint64_t master_seed,
                                      const ElmSettings& settings) {
  if (n < 1) throw DomainError("approximation_study: n must be >= 1");
  if (trials < 1) throw DomainError("approximation_study: trials must be >= 1");
  if (target.dim() > 3) throw UnsupportedDimensionError("approximation_study: sup-norm grid supports d <= 3");
  const int d = target.dim();
  if (!sigma) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("approximation_study: epsilon must lie in (0, 1)");
    sigma = std::pow(double(n), (-1.0 + epsilon) / (2.0 * d));
  }
  if (!(*sigma > 0.0)) throw DomainError("approximation_study: sigma must be positive");

  ApproxStudyResult result;
  result.sigma = *sigma;
  result.n = n;
  result.m = 20 * n;
  const MatrixXd grid = regular_grid(d, grid_points > 0 ? grid_points : default_grid_points(d));
  const NoiseSpec noiseless{NoiseKind::none, 0.0};
  result.errors.resize(static_cast<std::size_t>(trials));
  parallel_for(trials, settings.threads, [&](Index t) {
    const auto tt = static_cast<std::uint64_t>(t);
    const Dataset data = sample_dataset(target, result.m, noiseless, derive_seed(master_seed, "approx/data", tt));
    const FittedElm fitted = fit_elm(data, fixed_schedule(target, result.m, n, *sigma), settings,
                                     derive_seed(master_seed, "approx/centers", tt));
    result.errors[static_cast<std::size_t>(t)] = sup_error_of_fit(fitted, target, grid);
  });
  result.median = median(result.errors);
  return result;
}

RemedySplit remedy_split(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise,
                         double validation_fraction, std::uint64_t master_seed) {
  if (!(validation_fraction > 0.0 && validation_fraction <= 0.5))
    throw DomainError("best_of_T: validation_fraction must lie in (0, 0.5]");
  const Dataset data = sample_dataset(target, schedule.m, noise, derive_seed(master_seed, "remedy/data"));
  const Index m = data.size();
  const Index validation = std::max<Index>(1, std::llround(validation_fraction * double(m)));
  if (m - validation < 1) throw DomainError("best_of_T: not enough samples for a train/validation split");
  // Rows are i.i.d., so the trailing block is a uniformly random split.
  return RemedySplit{slice_rows(data, 0, m - validation), slice_rows(data, m - validation, validation),
                     derive_seed(master_seed, "remedy/probes")};
}

std::uint64_t remedy_centers_seed(std::uint64_t master_seed, int t) {
  return derive_seed(master_seed, "remedy/centers", static_cast<std::uint64_t>(t));
}

RemedyResult best_of_T(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise, int T,
                       double validation_fraction, std::uint64_t master_seed, const ElmSettings& settings) {
  if (T < 1) throw DomainError("best_of_T: T must be >= 1");
  const RemedySplit split = remedy_split(target, schedule, noise, validation_fraction, master_seed);

  RemedyResult result;
  result.records.resize(static_cast<std::size_t>(T));
  result.validation_mse.resize(static_cast<std::size_t>(T));
  parallel_for(T, settings.threads, [&](Index t) {
    const auto start = Clock::now();
    const std::uint64_t seed = remedy_centers_seed(master_seed, static_cast<int>(t));
    const FittedElm fitted = fit_elm(split.train, schedule, settings, seed);
    TrialRecord rec = score(fitted, target, schedule, split.train.size(), split.probe_seed);
    rec.trial_seed = seed;
    const VectorXd pred = predict_truncated(fitted.model, split.validation.X);
    result.validation_mse[static_cast<std::size_t>(t)] = (pred - split.validation.y).squaredNorm() / double(pred.size());
    rec.wall_time = seconds_since(start);
    result.records[static_cast<std::size_t>(t)] = rec;
  });
  const auto best = std::min_element(result.validation_mse.begin(), result.validation_mse.end());
  result.chosen_index = best - result.validation_mse.begin();
  result.chosen = result.records[static_cast<std::size_t>(result.chosen_index)];
  return result;
}

RemedyStudyResult remedy_study(const TargetFunction& target, const ScheduleParams& schedule, const NoiseSpec& noise,
                               int T, double validation_fraction, int repetitions, std::uint64_t master_seed,
                               const ElmSettings& settings) {
  if (repetitions < 1) throw DomainError("remedy_study: repetitions must be >= 1");
  ElmSettings inner = settings;
  inner.threads = 1;
  RemedyStudyResult result;
  result.T = T;
  result.rows.resize(static_cast<std::size_t>(repetitions));
  parallel_for(repetitions, settings.threads, [&](Index k) {
    const std::uint64_t seed = derive_seed(master_seed, "remedy/repetition", static_cast<std::uint64_t>(k));
    const RemedyResult many = best_of_T(target, schedule, noise, T, validation_fraction, seed, inner);
    const RemedyResult one = best_of_T(target, schedule, noise, 1, validation_fraction, seed, inner);
    RemedyStudyRow row;
    row.repetition = static_cast<int>(k);
    row.chosen_index = many.chosen_index;
    row.best_validation_mse = many.validation_mse[static_cast<std::size_t>(many.chosen_index)];
    row.best_error = many.chosen.l2_error_sq;
    row.single_error = one.chosen.l2_error_sq;
    result.rows[static_cast<std::size_t>(k)] = row;
  });
  std::vector<double> best, single;
  for (const auto& row : result.rows) {
    best.push_back(row.best_error);
    single.push_back(row.single_error);
  }
  result.median_best = median(best);
  result.median_single = median(single);
  return result;
}

}  // namespace elm
