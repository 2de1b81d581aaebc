#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "elm/experiments.hpp"

using namespace elm;

TEST_CASE("integer_part absorbs round-off just below an integer") {
  CHECK(integer_part(std::pow(1000.0, 2.0 / 3.0)) == 100);
  CHECK(integer_part(31.62) == 31);
  CHECK(integer_part(2.0) == 2);
  CHECK(integer_part(1.9999) == 1);
  CHECK_THROWS_AS(integer_part(-1.0), DomainError);
}

TEST_CASE("plain schedule") {
  const auto p = schedule_plain(1000, 1.0, 1, 0.01);
  CHECK(p.n == 31);
  CHECK(p.sigma == doctest::Approx(0.18095).epsilon(1e-3));
  CHECK(p.sigma == doctest::Approx(std::pow(1000.0, -0.2475)).epsilon(1e-14));
  CHECK_FALSE(p.lambda.has_value());
  CHECK(p.variant == Variant::plain);
  CHECK(schedule_plain(2, 1.0, 1, 0.5).n == 1);
  CHECK(schedule_plain(4096, 1.0, 1, 0.05).n > schedule_plain(256, 1.0, 1, 0.05).n);
  CHECK_THROWS_AS(schedule_plain(1000, 1.0, 1, 0.0), DomainError);
  CHECK_THROWS_AS(schedule_plain(1000, 1.0, 1, 1.0), DomainError);
  CHECK_THROWS_AS(schedule_plain(1, 1.0, 1, 0.05), DomainError);
}

TEST_CASE("regularized schedule") {
  const auto p = schedule_regularized(1000, 1.0, 1, 0.01);
  CHECK(p.n == 100);
  REQUIRE(p.lambda.has_value());
  CHECK(*p.lambda == doctest::Approx(0.31623).epsilon(1e-4));
  CHECK(p.sigma == doctest::Approx(0.10718).epsilon(1e-3));
  for (Index m : {64, 1000, 12345}) {
    CHECK(*schedule_regularized(m, 2.0, 2, 0.01).lambda == doctest::Approx(std::pow(double(m), -1.0 / 6.0)));
    CHECK(*schedule_regularized(m, 0.5, 1, 0.01).lambda == 1.0);
  }
  CHECK_THROWS_WITH_AS(schedule_regularized(1000, 1.5, 1, 0.01), doctest::Contains("d/2 <= r <= d"), DomainError);
  CHECK_THROWS_AS(schedule_regularized(1000, 0.4, 1, 0.01), DomainError);
  CHECK_THROWS_AS(schedule_regularized(1000, 1.0, 1, 0.4), DomainError);
}

TEST_CASE("schedules are monotone in m") {
  for (Variant v : {Variant::plain, Variant::regularized})
    for (double r : {0.5, 1.0}) {
      auto prev = make_schedule(v, 16, r, 1, 0.05);
      for (Index m = 32; m <= 65536; m *= 2) {
        const auto cur = make_schedule(v, m, r, 1, 0.05);
        CHECK(cur.sigma < prev.sigma);
        CHECK(cur.n >= prev.n);
        if (cur.lambda) CHECK(*cur.lambda <= *prev.lambda);
        prev = cur;
      }
    }
}

TEST_CASE("variant names") {
  CHECK(to_string(Variant::regularized) == "regularized");
  CHECK(parse_variant("plain") == Variant::plain);
  CHECK_FALSE(parse_variant("both").has_value());
}

TEST_CASE("run_trial") {
  const ElmSettings settings;
  SUBCASE("constant zero target is fitted exactly") {
    const auto f = make_target(TargetId::constant, 1.0, 1, 0.0);
    for (Variant v : {Variant::plain, Variant::regularized}) {
      const auto rec = run_trial(f, make_schedule(v, 300, 1.0, 1, 0.05), NoiseSpec{NoiseKind::none, 0.0}, settings, 1);
      CHECK(rec.l2_error_sq <= 1e-16);
      CHECK(rec.coefficient_norm_sq == 0.0);
    }
  }
  SUBCASE("identical calls give identical records") {
    const auto f = make_target(TargetId::holder_low, 1.0, 1);
    const auto sched = schedule_regularized(500, 1.0, 1, 0.05);
    const auto a = run_trial(f, sched, NoiseSpec{}, settings, 77);
    const auto b = run_trial(f, sched, NoiseSpec{}, settings, 77);
    CHECK(a.same_outcome(b));
    CHECK(a.l2_error_sq == b.l2_error_sq);
    CHECK_FALSE(a.same_outcome(run_trial(f, sched, NoiseSpec{}, settings, 78)));
  }
  SUBCASE("interpolation when m = n") {
    const auto f = make_target(TargetId::holder_high, 1.5, 1);
    ScheduleParams sched;
    sched.m = 8;
    sched.n = 8;
    sched.r = 1.5;
    sched.d = 1;
    sched.sigma = 0.15;
    ElmSettings narrow;
    narrow.margin = 0.0;
    const NoiseSpec noiseless{NoiseKind::none, 0.0};
    // First seed whose drawn design is numerically full rank.
    std::optional<std::uint64_t> seed;
    for (std::uint64_t k = 1; k <= 50 && !seed; ++k) {
      const auto data = sample_dataset(f, sched.m, noiseless, derive_seed(k, "data"));
      const auto fitted = fit_elm(data, sched, narrow, derive_seed(k, "centers"));
      const MatrixXd D = build_design_matrix(data.X, fitted.model.centers, fitted.model.kernel);
      Eigen::JacobiSVD<MatrixXd> svd(D);
      if (svd.singularValues()(0) / svd.singularValues()(7) < 1e6) seed = k;
    }
    REQUIRE(seed.has_value());
    const auto rec = run_trial(f, sched, noiseless, narrow, *seed);
    CHECK(rec.effective_rank == 8);
    CHECK(rec.training_mse <= 1e-10);
  }
  SUBCASE("truncated predictions stay within M") {
    const auto f = make_target(TargetId::sine_smooth, 2.0, 1);
    const auto data = sample_dataset(f, 200, NoiseSpec{}, 3);
    const auto fitted = fit_elm(data, schedule_plain(200, 2.0, 1, 0.05), settings, 4);
    MatrixXd U = MatrixXd::Random(500, 1) * 2.0;
    CHECK(predict_truncated(fitted.model, U).cwiseAbs().maxCoeff() <= data.M);
  }
  CHECK(probe_count(100) == 100000);
  CHECK(probe_count(20000) == 200000);
}

TEST_CASE("rate exponent fit") {
  const std::vector<Index> ms = {256, 512, 1024, 2048, 4096};
  std::vector<double> errs;
  for (Index m : ms) errs.push_back(3.0 * std::pow(double(m), -0.5));
  const auto fit = fit_rate_exponent(ms, errs);
  CHECK(std::abs(fit.slope + 0.5) <= 1e-9);
  CHECK(fit.r2 == doctest::Approx(1.0));

  std::vector<Index> rev(ms.rbegin(), ms.rend());
  std::vector<double> rev_err(errs.rbegin(), errs.rend());
  const auto fit2 = fit_rate_exponent(rev, rev_err);
  CHECK(fit2.slope == fit.slope);
  CHECK(fit2.intercept == fit.intercept);

  CHECK_THROWS_AS(fit_rate_exponent({256, 256}, {0.1, 0.2}), DomainError);
  CHECK_THROWS_AS(fit_rate_exponent({256, 512}, {0.1, 0.0}), DomainError);
}

TEST_CASE("small rate study") {
  const auto f = make_target(TargetId::holder_low, 1.0, 1);
  RateStudyConfig cfg;
  cfg.m_list = {64, 128, 256, 512};
  cfg.trials = 5;
  cfg.master_seed = 3;
  for (Variant v : {Variant::plain, Variant::regularized}) {
    cfg.variant = v;
    const auto a = rate_study(f, cfg);
    REQUIRE(a.rows.size() == 4);
    CHECK(a.trials.size() == 20);
    CHECK(a.fitted_exponent < 0.0);
    CHECK(a.fitted_exponent_unsquared == doctest::Approx(0.5 * a.fitted_exponent));
    CHECK(a.theoretical_exponent == theoretical_exponent(v, 1.0, 1));
    for (const auto& row : a.rows) {
      CHECK(row.q10 <= row.q25);
      CHECK(row.q25 <= row.median);
      CHECK(row.median <= row.q75);
      CHECK(row.q75 <= row.q90);
    }

    RateStudyConfig reversed = cfg;
    std::reverse(reversed.m_list.begin(), reversed.m_list.end());
    reversed.settings.threads = 3;
    const auto b = rate_study(f, reversed);
    CHECK(b.fitted_exponent == a.fitted_exponent);
    for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i].same_outcome(b.trials[i]));
  }
  cfg.m_list = {64, 128};
  CHECK_THROWS_WITH_AS(rate_study(f, cfg), doctest::Contains("m_list requires >= 4 entries"), DomainError);
  cfg.m_list = {64, 128, 256, 256};
  CHECK_THROWS_AS(rate_study(f, cfg), DomainError);
  cfg.m_list = {64, 128, 256, 512};
  cfg.trials = 4;
  CHECK_THROWS_AS(rate_study(f, cfg), DomainError);
}

TEST_CASE("plain and regularized studies see the same data") {
  CHECK(rate_trial_seed(1, 256, 0) == rate_trial_seed(1, 256, 0));
  CHECK(rate_trial_seed(1, 256, 0) != rate_trial_seed(1, 512, 0));
  CHECK(rate_trial_seed(1, 256, 0) != rate_trial_seed(2, 256, 0));
}

TEST_CASE("uncertainty study") {
  UncertaintyStudyConfig cfg;
  cfg.sigma_list = {0.1};
  cfg.n_fixed = 20;
  cfg.trials = 30;
  cfg.grid_points = 201;
  cfg.master_seed = 4;
  SUBCASE("deterministic") {
    const auto f = make_target(TargetId::holder_low, 0.5, 1);
    const auto a = uncertainty_study(f, cfg);
    cfg.settings.threads = 2;
    const auto b = uncertainty_study(f, cfg);
    REQUIRE(a.rows.size() == 1);
    CHECK(a.rows[0].errors == b.rows[0].errors);
    CHECK(a.m == 400);
    CHECK(a.rows[0].q25 <= a.rows[0].median);
    CHECK(a.rows[0].iqr >= 0.0);
  }
  SUBCASE("constant zero target") {
    const auto f = make_target(TargetId::constant, 1.0, 1, 0.0);
    cfg.sigma_list = {0.05, 0.2};
    cfg.threshold = 1e-12;
    const auto res = uncertainty_study(f, cfg);
    for (const auto& row : res.rows) {
      CHECK(row.median == 0.0);
      CHECK(row.exceedance == 0.0);
      CHECK(row.relative_iqr == 0.0);
    }
  }
  SUBCASE("validation") {
    const auto f = make_target(TargetId::holder_low, 0.5, 1);
    cfg.sigma_list = {0.2, 0.1};
    CHECK_THROWS_AS(uncertainty_study(f, cfg), DomainError);
    cfg.sigma_list = {0.1};
    cfg.trials = 29;
    CHECK_THROWS_AS(uncertainty_study(f, cfg), DomainError);
    UncertaintyStudyConfig high_dim;
    high_dim.sigma_list = {0.1};
    CHECK_THROWS_AS(uncertainty_study(make_target(TargetId::holder_low, 0.5, 4), high_dim), UnsupportedDimensionError);
  }
}

TEST_CASE("approximation study") {
  const auto f = make_target(TargetId::holder_low, 1.0, 1);
  const auto res = approximation_study(f, 20, std::nullopt, 0.05, 4, 101, 2, ElmSettings{});
  CHECK(res.sigma == doctest::Approx(std::pow(20.0, -0.95 / 2.0)));
  CHECK(res.m == 400);
  CHECK(res.errors.size() == 4);
  CHECK(res.median >= 0.0);
}

TEST_CASE("best_of_T") {
  const auto f = make_target(TargetId::holder_low, 1.0, 1);
  const auto sched = schedule_plain(400, 1.0, 1, 0.05);
  const ElmSettings settings;
  const NoiseSpec noise;
  SUBCASE("T = 1 is a single trial on the train split") {
    const auto res = best_of_T(f, sched, noise, 1, 0.25, 11, settings);
    const auto split = remedy_split(f, sched, noise, 0.25, 11);
    CHECK(split.train.size() == 300);
    CHECK(split.validation.size() == 100);
    const auto direct = run_trial_on(split.train, f, sched, settings, remedy_centers_seed(11, 0), split.probe_seed);
    CHECK(res.chosen.same_outcome(direct));
    CHECK(res.chosen_index == 0);
  }
  SUBCASE("chosen model has the least validation error") {
    const auto res = best_of_T(f, sched, noise, 6, 0.25, 12, settings);
    CHECK(res.records.size() == 6);
    const double best = *std::min_element(res.validation_mse.begin(), res.validation_mse.end());
    CHECK(res.validation_mse[static_cast<std::size_t>(res.chosen_index)] == best);
    CHECK(res.chosen.same_outcome(res.records[static_cast<std::size_t>(res.chosen_index)]));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(best_of_T(f, sched, noise, 0, 0.25, 1, settings), DomainError);
    CHECK_THROWS_AS(best_of_T(f, sched, noise, 2, 0.0, 1, settings), DomainError);
    CHECK_THROWS_AS(best_of_T(f, sched, noise, 2, 0.6, 1, settings), DomainError);
  }
  SUBCASE("remedy study summary") {
    const auto res = remedy_study(f, sched, noise, 3, 0.25, 4, 13, settings);
    CHECK(res.rows.size() == 4);
    CHECK(res.T == 3);
    for (const auto& row : res.rows) CHECK(row.best_error >= 0.0);
  }
}
