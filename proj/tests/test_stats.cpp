#include <doctest.h>

#include <vector>

#include "elm/stats.hpp"

using namespace elm;

TEST_CASE("quantiles interpolate linearly") {
  const std::vector<double> v = {4.0, 1.0, 3.0, 2.0, 5.0};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 5.0);
  CHECK(median(v) == 3.0);
  CHECK(quantile(v, 0.25) == 2.0);
  CHECK(quantile(v, 0.1) == doctest::Approx(1.4));
  const std::vector<double> even = {1.0, 2.0, 3.0, 4.0};
  CHECK(median(even) == 2.5);
  CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), DomainError);
}

TEST_CASE("rank correlation") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(spearman(x, std::vector<double>{10.0, 20.0, 25.0, 100.0}) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{4.0, 3.0, 2.0, 1.0}) == doctest::Approx(-1.0));
  CHECK(spearman(x, std::vector<double>{1.0, 1.0, 1.0, 1.0}) == 0.0);
  const auto ranks = average_ranks(std::vector<double>{3.0, 1.0, 3.0, 2.0});
  CHECK(ranks == std::vector<double>{3.5, 1.0, 3.5, 2.0});
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("line fit") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> y = {3.0, 5.0, 7.0, 9.0};
  const auto fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}), DomainError);
}
