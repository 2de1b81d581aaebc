#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace elm::cli {

using nlohmann::json;

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::train: return "train";
    case StudyKind::approx: return "approx";
    case StudyKind::rate: return "rate";
    case StudyKind::uncertainty: return "uncertainty";
    case StudyKind::remedy: return "remedy";
  }
  return "unknown";
}

std::optional<StudyKind> parse_study_kind(std::string_view name) {
  for (auto k : {StudyKind::train, StudyKind::approx, StudyKind::rate, StudyKind::uncertainty, StudyKind::remedy})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

TargetFunction StudyConfig::make_target_function() const { return make_target(target, r, d, constant); }

ElmSettings StudyConfig::settings(int threads) const {
  ElmSettings out;
  out.margin = a;
  out.kernel_order = s;
  out.threads = threads;
  return out;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file '" + path + "' must contain a flat JSON object");
  return j;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must have the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  config[key] = parsed.is_discarded() ? json(value) : parsed;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "study", "target", "r", "d", "s", "constant", "variant", "m", "m_list", "sigma", "sigma_list", "n",
      "trials", "epsilon", "noise", "tau", "a", "T", "validation_fraction", "threshold", "grid_points",
      "repetitions", "master_seed", "out"};
  return keys;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

class Reader {
 public:
  explicit Reader(const json& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.contains(key) && !raw_.at(key).is_null(); }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t seed(const std::string& key) const {
    if (!has(key)) return 0;
    const auto& v = raw_.at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<long long> integers(const std::string& key, std::vector<long long> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw_.at(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    std::vector<long long> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(e.get<long long>());
    }
    return out;
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw_.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  const json& raw_;
};

int default_trials(StudyKind kind) {
  switch (kind) {
    case StudyKind::uncertainty: return 50;
    case StudyKind::approx: return 10;
    default: return 20;
  }
}

std::string schedule_key(const std::string& message) {
  if (message.find("epsilon") != std::string::npos) return "epsilon";
  if (message.find("m must") != std::string::npos) return "m";
  return "r";
}

void check_schedule(Variant v, Index m, const StudyConfig& c) {
  try {
    make_schedule(v, m, c.r, c.d, c.epsilon);
  } catch (const DomainError& e) {
    fail(schedule_key(e.what()), e.what());
  }
}

}  // namespace

StudyConfig resolve_config(StudyKind kind, const json& raw) {
  if (!raw.is_object()) throw ConfigError("configuration must be a flat JSON object");
  for (const auto& [key, value] : raw.items()) {
    if (!known_keys().count(key)) fail(key, "unknown key");
    if (value.is_object()) fail(key, "nested objects are not allowed");
  }
  const Reader in(raw);
  StudyConfig c;
  c.study = kind;
  if (in.has("study")) {
    const auto named = parse_study_kind(in.text("study", ""));
    if (!named) fail("study", "expected one of train, approx, rate, uncertainty, remedy");
    if (*named != kind) fail("study", "config names study '" + to_string(*named) + "' but '" + to_string(kind) + "' was run");
  }

  const std::string target = in.text("target", "holder_low");
  const auto id = parse_target_id(target);
  if (!id) fail("target", "expected one of holder_low, holder_high, sine_smooth, constant");
  c.target = *id;
  c.r = in.real("r", 1.0);
  c.d = static_cast<int>(in.integer("d", 1));
  if (c.d < 1) fail("d", "must be >= 1");
  c.constant = in.real("constant", 0.0);
  try {
    c.make_target_function();
  } catch (const DomainError& e) {
    fail("r", e.what());
  }
  c.s = static_cast<int>(in.integer("s", 0));
  if (c.s < 0 || c.s > Kernel::kMaxOrder) fail("s", "kernel order must lie in [0, 16] (0 = automatic)");

  const std::string variant = in.text("variant", kind == StudyKind::rate ? "both" : "plain");
  if (variant == "both") {
    if (kind != StudyKind::rate) fail("variant", "'both' is only available for the rate study");
    c.variants = {Variant::plain, Variant::regularized};
  } else if (const auto v = parse_variant(variant)) {
    c.variants = {*v};
  } else {
    fail("variant", "expected plain, regularized or both");
  }

  c.m = in.integer("m", 1000);
  c.m_list.clear();
  for (long long m : in.integers("m_list", {256, 512, 1024, 2048, 4096})) {
    if (m < 2) fail("m_list", "every sample size must be >= 2");
    c.m_list.push_back(m);
  }
  if (in.has("sigma")) {
    c.sigma = in.real("sigma", 0.0);
    if (!(*c.sigma > 0.0)) fail("sigma", "must be positive");
  }
  c.sigma_list = in.reals("sigma_list", c.sigma_list);
  c.n = in.integer("n", 100);
  c.trials = static_cast<int>(in.integer("trials", default_trials(kind)));
  c.epsilon = in.real("epsilon", 0.05);
  const std::string noise = in.text("noise", "uniform");
  const auto nk = parse_noise_kind(noise);
  if (!nk) fail("noise", "expected none or uniform");
  c.noise.kind = *nk;
  c.noise.tau = in.real("tau", 0.2);
  if (c.noise.tau < 0.0) fail("tau", "must be >= 0");
  c.a = in.real("a", 0.5);
  if (c.a < 0.0) fail("a", "center margin must be >= 0");
  c.T = static_cast<int>(in.integer("T", 10));
  c.validation_fraction = in.real("validation_fraction", 0.25);
  c.threshold = in.real("threshold", 0.1);
  c.grid_points = static_cast<int>(in.integer("grid_points", 0));
  if (c.grid_points != 0 && c.grid_points < 2) fail("grid_points", "must be 0 (automatic) or >= 2");
  c.repetitions = static_cast<int>(in.integer("repetitions", 20));
  c.master_seed = in.seed("master_seed");
  c.out = in.text("out", "elm_out");
  if (c.out.empty()) fail("out", "output directory must not be empty");

  switch (kind) {
    case StudyKind::train:
      if (c.m < 2) fail("m", "must be >= 2");
      check_schedule(c.variants.front(), c.m, c);
      break;
    case StudyKind::rate: {
      if (c.m_list.size() < 4) fail("m_list", "m_list requires ≥ 4 entries");
      std::vector<Index> sorted = c.m_list;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("m_list", "entries must be distinct");
      if (c.trials < 5) fail("trials", "rate study requires trials >= 5");
      for (Variant v : c.variants)
        for (Index m : c.m_list) check_schedule(v, m, c);
      break;
    }
    case StudyKind::uncertainty:
      if (c.d > 3) fail("d", "sup-norm studies support d <= 3");
      if (c.sigma_list.empty()) fail("sigma_list", "must not be empty");
      for (std::size_t i = 0; i < c.sigma_list.size(); ++i) {
        if (!(c.sigma_list[i] > 0.0)) fail("sigma_list", "every sigma must be positive");
        if (i > 0 && !(c.sigma_list[i] > c.sigma_list[i - 1])) fail("sigma_list", "must be strictly increasing");
      }
      if (c.trials < 30) fail("trials", "uncertainty study requires trials >= 30");
      if (c.n < 1) fail("n", "must be >= 1");
      if (c.threshold < 0.0) fail("threshold", "must be >= 0");
      break;
    case StudyKind::approx:
      if (c.d > 3) fail("d", "sup-norm studies support d <= 3");
      if (c.n < 1) fail("n", "must be >= 1");
      if (c.trials < 1) fail("trials", "must be >= 1");
      if (!c.sigma && !(c.epsilon > 0.0 && c.epsilon < 1.0)) fail("epsilon", "must lie in (0, 1)");
      break;
    case StudyKind::remedy:
      if (c.m < 2) fail("m", "must be >= 2");
      if (c.T < 1) fail("T", "must be >= 1");
      if (!(c.validation_fraction > 0.0 && c.validation_fraction <= 0.5))
        fail("validation_fraction", "must lie in (0, 0.5]");
      if (c.repetitions < 1) fail("repetitions", "must be >= 1");
      check_schedule(c.variants.front(), c.m, c);
      break;
  }
  return c;
}

json echo_config(const StudyConfig& c) {
  json j;
  j["study"] = to_string(c.study);
  j["target"] = to_string(c.target);
  j["r"] = c.r;
  j["d"] = c.d;
  j["s"] = c.s;
  j["constant"] = c.constant;
  j["variant"] = c.variants.size() > 1 ? std::string("both") : to_string(c.variants.front());
  j["m"] = c.m;
  j["m_list"] = c.m_list;
  j["sigma"] = c.sigma ? json(*c.sigma) : json(nullptr);
  j["sigma_list"] = c.sigma_list;
  j["n"] = c.n;
  j["trials"] = c.trials;
  j["epsilon"] = c.epsilon;
  j["noise"] = to_string(c.noise.kind);
  j["tau"] = c.noise.tau;
  j["a"] = c.a;
  j["T"] = c.T;
  j["validation_fraction"] = c.validation_fraction;
  j["threshold"] = c.threshold;
  j["grid_points"] = c.grid_points;
  j["repetitions"] = c.repetitions;
  j["master_seed"] = c.master_seed;
  j["out"] = c.out;
  return j;
}

}  // namespace elm::cli
