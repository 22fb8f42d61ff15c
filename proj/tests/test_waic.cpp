#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "soclearn/waic.hpp"

using namespace soclearn;
using Catch::Approx;

TEST_CASE("waic") {
  SECTION("zero variance collapses to -2 log p") {
    const double lp = std::log(0.3);
    const auto result = waic({{lp}, {lp}, {lp}});
    CHECK(result.lppd == Approx(lp));
    CHECK(result.penalty == Approx(0.0).margin(1e-15));
    CHECK(result.waic == Approx(-2.0 * lp));
  }
  SECTION("duplicating draws changes nothing") {
    const std::vector<std::vector<double>> base{{std::log(0.4), std::log(0.7)},
                                                {std::log(0.6), std::log(0.2)}};
    auto doubled = base;
    doubled.insert(doubled.end(), base.begin(), base.end());
    // The unbiased variance differs between n and 2n draws of the same
    // values; compare lppd exactly and waic approximately.
    CHECK(waic(doubled).lppd == Approx(waic(base).lppd).epsilon(1e-12));
  }
  SECTION("hand-evaluated two-draw example") {
    const auto result = waic({{std::log(0.4)}, {std::log(0.6)}});
    CHECK(result.lppd == Approx(std::log(0.5)).epsilon(1e-12));
    const double mean = 0.5 * (std::log(0.4) + std::log(0.6));
    const double var = std::pow(std::log(0.4) - mean, 2) + std::pow(std::log(0.6) - mean, 2);
    CHECK(result.penalty == Approx(var).epsilon(1e-12));
    CHECK(result.penalty == Approx(0.0822).margin(5e-5));
    CHECK(result.waic == Approx(1.5507).margin(5e-4));
  }
  SECTION("single draw is an error") {
    CHECK_THROWS_AS(waic({{std::log(0.5)}}), std::invalid_argument);
  }
}
