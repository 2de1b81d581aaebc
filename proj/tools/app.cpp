#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "elm/experiments.hpp"
#include "elm/report.hpp"
#include "elm/stats.hpp"

namespace elm::cli {

namespace {

using nlohmann::json;

struct Report {
  json summary;
  std::string csv;
  std::string headline;
};

std::string fmt(double v) { return format_real(v); }

std::string fmt_opt(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

json json_opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string short_real(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

json schedule_json(const ScheduleParams& p) {
  return json{{"variant", to_string(p.variant)}, {"m", p.m},       {"n", p.n},
              {"sigma", p.sigma},                {"lambda", json_opt(p.lambda)}};
}

Report run_train(const StudyConfig& c, int threads) {
  const auto f = c.make_target_function();
  const auto sched = make_schedule(c.variants.front(), c.m, c.r, c.d, c.epsilon);
  const auto rec = run_trial(f, sched, c.noise, c.settings(threads), c.master_seed);

  std::ostringstream csv;
  CsvWriter w(csv);
  w.header({"variant", "m", "n", "sigma", "lambda", "l2_error_sq", "l2_standard_error", "training_mse",
            "coefficient_norm_sq", "effective_rank"});
  w.row({to_string(sched.variant), std::to_string(sched.m), std::to_string(sched.n), fmt(sched.sigma),
         fmt_opt(sched.lambda), fmt(rec.l2_error_sq), fmt(rec.l2_standard_error), fmt(rec.training_mse),
         fmt(rec.coefficient_norm_sq), std::to_string(rec.effective_rank)});

  Report rep;
  rep.csv = csv.str();
  rep.summary = {{"schedule", schedule_json(sched)},
                 {"l2_error_sq", rec.l2_error_sq},
                 {"l2_standard_error", rec.l2_standard_error},
                 {"training_mse", rec.training_mse},
                 {"coefficient_norm_sq", rec.coefficient_norm_sq},
                 {"effective_rank", rec.effective_rank}};
  rep.headline = to_string(sched.variant) + " ELM, m=" + std::to_string(sched.m) + " n=" + std::to_string(sched.n) +
                 " sigma=" + short_real(sched.sigma) + ": test squared L2 error " + short_real(rec.l2_error_sq) +
                 " (se " + short_real(rec.l2_standard_error) + "), training MSE " + short_real(rec.training_mse);
  return rep;
}

Report run_rate(const StudyConfig& c, int threads) {
  const auto f = c.make_target_function();
  std::ostringstream csv;
  CsvWriter w(csv);
  w.header({"variant", "m", "n", "sigma", "lambda", "quantile", "l2_error_sq"});
  Report rep;
  json studies = json::object();
  std::vector<double> fitted;
  for (Variant v : c.variants) {
    RateStudyConfig rc;
    rc.variant = v;
    rc.m_list = c.m_list;
    rc.trials = c.trials;
    rc.epsilon = c.epsilon;
    rc.noise = c.noise;
    rc.master_seed = c.master_seed;
    rc.settings = c.settings(threads);
    const auto res = rate_study(f, rc);
    json rows = json::array();
    for (const auto& row : res.rows) {
      const std::pair<const char*, double> qs[] = {
          {"q10", row.q10}, {"q25", row.q25}, {"median", row.median}, {"q75", row.q75}, {"q90", row.q90}};
      for (const auto& [name, value] : qs)
        w.row({to_string(v), std::to_string(row.m), std::to_string(row.n), fmt(row.sigma), fmt_opt(row.lambda), name,
               fmt(value)});
      rows.push_back({{"m", row.m}, {"n", row.n}, {"sigma", row.sigma}, {"lambda", json_opt(row.lambda)},
                      {"q10", row.q10}, {"q25", row.q25}, {"median", row.median}, {"q75", row.q75},
                      {"q90", row.q90}});
    }
    studies[to_string(v)] = {{"fitted_exponent", res.fitted_exponent},
                             {"fitted_exponent_unsquared", res.fitted_exponent_unsquared},
                             {"theoretical_exponent", res.theoretical_exponent},
                             {"theoretical_exponent_unsquared", 0.5 * res.theoretical_exponent},
                             {"intercept", res.intercept},
                             {"fit_r2", res.fit_r2},
                             {"rows", rows}};
    fitted.push_back(res.fitted_exponent);
    if (!rep.headline.empty()) rep.headline += '\n';
    rep.headline += to_string(v) + ": fitted squared-error exponent " + short_real(res.fitted_exponent) +
                    " (unsquared " + short_real(res.fitted_exponent_unsquared) + "), theory " +
                    short_real(res.theoretical_exponent) + " (unsquared " +
                    short_real(0.5 * res.theoretical_exponent) + "), R^2 " + short_real(res.fit_r2);
  }
  rep.summary = {{"variants", studies}};
  if (fitted.size() == 2) {
    rep.summary["exponent_gap"] = fitted[0] - fitted[1];
    rep.headline += "\ngap plain - regularized: " + short_real(fitted[0] - fitted[1]);
  }
  rep.csv = csv.str();
  return rep;
}

Report run_uncertainty(const StudyConfig& c, int threads) {
  const auto f = c.make_target_function();
  UncertaintyStudyConfig uc;
  uc.sigma_list = c.sigma_list;
  uc.n_fixed = c.n;
  uc.trials = c.trials;
  uc.threshold = c.threshold;
  uc.grid_points = c.grid_points;
  uc.master_seed = c.master_seed;
  uc.settings = c.settings(threads);
  const auto res = uncertainty_study(f, uc);

  std::ostringstream csv;
  CsvWriter w(csv);
  w.header({"sigma", "median", "q25", "q75", "iqr", "relative_iqr", "exceedance"});
  std::vector<double> sig, med, rel;
  json rows = json::array();
  for (const auto& row : res.rows) {
    w.row({fmt(row.sigma), fmt(row.median), fmt(row.q25), fmt(row.q75), fmt(row.iqr), fmt(row.relative_iqr),
           fmt(row.exceedance)});
    rows.push_back({{"sigma", row.sigma}, {"median", row.median}, {"q25", row.q25}, {"q75", row.q75},
                    {"iqr", row.iqr}, {"relative_iqr", row.relative_iqr}, {"exceedance", row.exceedance}});
    sig.push_back(row.sigma);
    med.push_back(row.median);
    rel.push_back(row.relative_iqr);
  }
  Report rep;
  rep.csv = csv.str();
  rep.summary = {{"n", res.n}, {"m", res.m}, {"threshold", res.threshold}, {"rows", rows}};
  if (sig.size() >= 2) {
    const std::size_t half = sig.size() / 2;
    const std::span<const double> s_up(sig.data() + half, sig.size() - half);
    const std::span<const double> m_up(med.data() + half, med.size() - half);
    const double rho_median = spearman(sig, med);
    const double rho_relative = spearman(sig, rel);
    rep.summary["spearman_sigma_median"] = rho_median;
    rep.summary["spearman_sigma_relative_iqr"] = rho_relative;
    if (s_up.size() >= 2) rep.summary["spearman_sigma_median_upper_half"] = spearman(s_up, m_up);
    rep.headline = "Spearman(sigma, median sup error) " + short_real(rho_median) +
                   "; Spearman(sigma, IQR/median) " + short_real(rho_relative);
  } else {
    rep.headline = "sigma " + short_real(res.rows[0].sigma) + ": median sup error " + short_real(res.rows[0].median) +
                   ", exceedance " + short_real(res.rows[0].exceedance);
  }
  return rep;
}

Report run_approx(const StudyConfig& c, int threads) {
  const auto f = c.make_target_function();
  const auto res =
      approximation_study(f, c.n, c.sigma, c.epsilon, c.trials, c.grid_points, c.master_seed, c.settings(threads));
  std::ostringstream csv;
  CsvWriter w(csv);
  w.header({"trial", "sup_error"});
  for (std::size_t t = 0; t < res.errors.size(); ++t) w.row({std::to_string(t), fmt(res.errors[t])});
  Report rep;
  rep.csv = csv.str();
  rep.summary = {{"sigma", res.sigma}, {"n", res.n}, {"m", res.m}, {"median_sup_error", res.median},
                 {"errors", res.errors}};
  rep.headline = "n=" + std::to_string(res.n) + " sigma=" + short_real(res.sigma) + ": median sup error " +
                 short_real(res.median) + " over " + std::to_string(res.errors.size()) + " trials";
  return rep;
}

Report run_remedy(const StudyConfig& c, int threads) {
  const auto f = c.make_target_function();
  const auto sched = make_schedule(c.variants.front(), c.m, c.r, c.d, c.epsilon);
  const auto res =
      remedy_study(f, sched, c.noise, c.T, c.validation_fraction, c.repetitions, c.master_seed, c.settings(threads));
  std::ostringstream csv;
  CsvWriter w(csv);
  w.header({"repetition", "chosen_index", "best_validation_mse", "best_error", "single_error"});
  for (const auto& row : res.rows)
    w.row({std::to_string(row.repetition), std::to_string(row.chosen_index), fmt(row.best_validation_mse),
           fmt(row.best_error), fmt(row.single_error)});
  Report rep;
  rep.csv = csv.str();
  rep.summary = {{"schedule", schedule_json(sched)},
                 {"T", res.T},
                 {"median_best_of_T", res.median_best},
                 {"median_single", res.median_single}};
  rep.headline = "best-of-" + std::to_string(res.T) + " median test error " + short_real(res.median_best) +
                 " vs single " + short_real(res.median_single);
  return rep;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

int execute(StudyKind kind, const std::string& config_path, const std::vector<std::string>& sets,
            const std::string& out_flag, int threads, std::ostream& out) {
  json raw = config_path.empty() ? json::object() : load_config_file(config_path);
  for (const auto& s : sets) apply_override(raw, s);
  if (!out_flag.empty()) raw["out"] = out_flag;
  if (threads < 0) throw ConfigError("--threads must be >= 0");
  const StudyConfig config = resolve_config(kind, raw);

  Report rep;
  switch (kind) {
    case StudyKind::train: rep = run_train(config, threads); break;
    case StudyKind::approx: rep = run_approx(config, threads); break;
    case StudyKind::rate: rep = run_rate(config, threads); break;
    case StudyKind::uncertainty: rep = run_uncertainty(config, threads); break;
    case StudyKind::remedy: rep = run_remedy(config, threads); break;
  }

  json echo = echo_config(config);
  echo["version"] = ELM_VERSION_STRING;
  json summary = rep.summary;
  summary["study"] = to_string(kind);
  summary["version"] = ELM_VERSION_STRING;
  summary["master_seed"] = config.master_seed;
  summary["config"] = echo;

  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  write_file(dir / "results.csv", rep.csv);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_file(dir / "config_echo.json", echo.dump(2) + "\n");
  out << rep.headline << '\n';
  return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extreme learning machines with Gaussian-type kernels: rate, uncertainty and remedy studies", "elm"};
  app.set_version_flag("--version", std::string(ELM_VERSION_STRING));
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    int threads = 0;
  } flags;

  const std::pair<StudyKind, const char*> commands[] = {
      {StudyKind::train, "Fit one ELM and report its test error"},
      {StudyKind::approx, "Sup-norm approximation error of noiseless fits"},
      {StudyKind::rate, "Learning-rate study over a list of sample sizes"},
      {StudyKind::uncertainty, "Width trade-off study over a list of sigma values"},
      {StudyKind::remedy, "Best-of-T multiple training study"},
  };
  std::vector<std::pair<CLI::App*, StudyKind>> subs;
  for (const auto& [kind, help] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(kind), help);
    sub->add_option("--config", flags.config, "Flat JSON configuration file");
    sub->add_option("--set", flags.sets, "Override a key: --set key=value (value parsed as JSON)")->take_all();
    sub->add_option("--out", flags.out, "Output directory (overrides the 'out' key)");
    sub->add_option("--threads", flags.threads, "Worker threads, 0 = automatic")->capture_default_str();
    subs.emplace_back(sub, kind);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  StudyKind kind = StudyKind::train;
  for (const auto& [sub, k] : subs)
    if (sub->parsed()) kind = k;

  try {
    return execute(kind, flags.config, flags.sets, flags.out, flags.threads, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return exit_internal;
  }
}

}  // namespace elm::cli
