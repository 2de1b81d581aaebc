#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "app.hpp"

namespace fs = std::filesystem;
using elm::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("elm_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("missing config file exits with 2 and names the path") {
  const auto r = invoke({"rate", "--config", "/nonexistent/dir/config.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/dir/config.json") != std::string::npos);
}

TEST_CASE("rate study with too few sample sizes is rejected") {
  const auto dir = scratch("short_mlist");
  const auto r = invoke({"rate", "--set", "m_list=[256,512]", "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("m_list requires ≥ 4 entries") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o" / "results.csv"));
}

TEST_CASE("configuration errors name the key") {
  const auto dir = scratch("bad_keys");
  SUBCASE("unknown key") {
    const auto r = invoke({"train", "--set", "sigmaa=0.1", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("sigmaa") != std::string::npos);
  }
  SUBCASE("regularized constraint") {
    const auto r = invoke({"train", "--set", "variant=regularized", "--set", "r=1.5", "--set", "target=holder_high",
                           "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("d/2 <= r <= d") != std::string::npos);
    CHECK(r.err.find("'r'") != std::string::npos);
  }
  SUBCASE("wrong type") {
    const auto r = invoke({"train", "--set", "m=\"many\"", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("'m'") != std::string::npos);
  }
  SUBCASE("malformed JSON file") {
    write_text(dir / "bad.json", "{\"m\": ");
    const auto r = invoke({"train", "--config", (dir / "bad.json").string()});
    CHECK(r.code == 2);
  }
  SUBCASE("study mismatch") {
    write_text(dir / "c.json", R"({"study": "rate"})");
    const auto r = invoke({"train", "--config", (dir / "c.json").string(), "--out", dir.string()});
    CHECK(r.code == 2);
  }
  SUBCASE("unknown subcommand") {
    CHECK(invoke({"fly"}).code == 2);
    CHECK(invoke({}).code == 2);
  }
}

TEST_CASE("numerical failure exits with 3") {
  const auto dir = scratch("numerical");
  // sigma^2 underflows, so the kernel peak and the design overflow.
  const auto r = invoke({"approx", "--set", "sigma=1e-200", "--set", "n=5", "--set", "trials=1", "--out",
                         dir.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("non-finite") != std::string::npos);
}

TEST_CASE("rate study output is byte-identical across runs and thread counts") {
  const auto dir = scratch("rate_repeat");
  write_text(dir / "rate.json", R"({
    "study": "rate", "target": "holder_low", "r": 1, "d": 1,
    "m_list": [64, 128, 256, 512], "trials": 5, "master_seed": 17
  })");
  const auto a = invoke({"rate", "--config", (dir / "rate.json").string(), "--out", (dir / "a").string(),
                         "--threads", "1"});
  const auto b = invoke({"rate", "--config", (dir / "rate.json").string(), "--out", (dir / "b").string(),
                         "--threads", "3"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
  CHECK(slurp(dir / "a" / "config_echo.json").size() > 0);
  CHECK(a.out.find("plain: fitted squared-error exponent") != std::string::npos);
  CHECK(a.out.find("regularized: fitted squared-error exponent") != std::string::npos);

  const auto csv = slurp(dir / "a" / "results.csv");
  CHECK(csv.rfind("variant,m,n,sigma,lambda,quantile,l2_error_sq\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  // Two variants, four sizes, five quantiles, one header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);

  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["study"] == "rate");
  CHECK(summary["master_seed"] == 17);
  CHECK(summary["variants"]["plain"]["fitted_exponent"].is_number());
  CHECK(summary["variants"]["regularized"]["theoretical_exponent"].get<double>() == doctest::Approx(-2.0 / 3.0));
  const auto echo = nlohmann::json::parse(slurp(dir / "a" / "config_echo.json"));
  CHECK(echo["trials"] == 5);
  CHECK(echo["variant"] == "both");
  CHECK(echo.contains("version"));
}

TEST_CASE("the echoed configuration reproduces the run") {
  const auto dir = scratch("echo");
  const auto a = invoke({"train", "--set", "m=300", "--set", "master_seed=4", "--out", (dir / "a").string()});
  REQUIRE(a.code == 0);
  auto echo = nlohmann::json::parse(slurp(dir / "a" / "config_echo.json"));
  echo.erase("version");
  echo["out"] = (dir / "b").string();
  write_text(dir / "echo.json", echo.dump());
  const auto b = invoke({"train", "--config", (dir / "echo.json").string()});
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
}

TEST_CASE("every study runs end to end") {
  const auto dir = scratch("studies");
  CHECK(invoke({"train", "--set", "m=200", "--set", "variant=regularized", "--out", (dir / "train").string()}).code ==
        0);
  CHECK(invoke({"approx", "--set", "n=20", "--set", "trials=3", "--set", "grid_points=101", "--out",
                (dir / "approx").string()})
            .code == 0);
  CHECK(invoke({"uncertainty", "--set", "n=10", "--set", "trials=30", "--set", "sigma_list=[0.1,0.2,0.4]", "--set",
                "grid_points=101", "--out", (dir / "unc").string()})
            .code == 0);
  CHECK(invoke({"remedy", "--set", "m=200", "--set", "T=3", "--set", "repetitions=2", "--out",
                (dir / "remedy").string()})
            .code == 0);
  for (const char* sub : {"train", "approx", "unc", "remedy"}) {
    CHECK(fs::exists(dir / sub / "results.csv"));
    CHECK(fs::exists(dir / sub / "summary.json"));
    CHECK(fs::exists(dir / sub / "config_echo.json"));
  }
  const auto unc = nlohmann::json::parse(slurp(dir / "unc" / "summary.json"));
  CHECK(unc["rows"].size() == 3);
  CHECK(unc.contains("spearman_sigma_median"));
}
