#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "soclearn/measurement.hpp"
#include "soclearn/rng.hpp"

using namespace soclearn;
using Catch::Approx;

namespace {

std::vector<SliderRecord> figure1_records() {
  // A vs C: 0.5, B vs C: -0.5, A vs D: 0.8, B vs D: 0.2 (common on the right).
  return {{"g1", "s1", "A", "C", 0.5},
          {"g1", "s1", "B", "C", -0.5},
          {"g1", "s1", "A", "D", 0.8},
          {"g1", "s1", "B", "D", 0.2}};
}

}  // namespace

TEST_CASE("orient_slider") {
  const SliderRecord ac{"g", "s", "A", "C", 0.5};
  CHECK(orient_slider(ac, "C") == 0.5);
  const SliderRecord bc{"g", "s", "B", "C", -0.5};
  CHECK(orient_slider(bc, "C") == -0.5);
  const SliderRecord ca{"g", "s", "C", "A", 0.5};
  CHECK(orient_slider(ca, "C") == -0.5);
  CHECK_THROWS_AS(orient_slider(ac, "B"), std::invalid_argument);
}

TEST_CASE("delta_estimate reproduces the worked example") {
  const auto records = figure1_records();
  const auto est = delta_estimate("A", "B", records);
  CHECK(est.value == Approx(0.4));
  CHECK(est.delta == Approx(0.4));
  CHECK(est.preferred == "B");

  SECTION("all sliders zero means indifference") {
    auto zeros = records;
    for (auto& r : zeros) r.slider = 0.0;
    const auto zero_est = delta_estimate("A", "B", zeros);
    CHECK(zero_est.value == 0.0);
    CHECK(zero_est.delta == 0.0);
    CHECK(zero_est.preferred == "A");  // ties resolve to the first element
  }
  SECTION("negating every slider flips the preferred label") {
    auto negated = records;
    for (auto& r : negated) r.slider = -r.slider;
    const auto neg_est = delta_estimate("A", "B", negated);
    CHECK(neg_est.value == Approx(-0.4));
    CHECK(neg_est.delta == Approx(0.4));
    CHECK(neg_est.preferred == "A");
  }
  SECTION("antisymmetry of the target order") {
    const auto reversed = delta_estimate("B", "A", records);
    CHECK(reversed.value == Approx(-est.value));
    CHECK(reversed.delta == Approx(est.delta));
    CHECK(reversed.preferred == est.preferred);
  }
  SECTION("missing or duplicate records are rejected") {
    auto dup = records;
    dup[1] = dup[0];
    CHECK_THROWS_AS(delta_estimate("A", "B", dup), std::invalid_argument);
    CHECK_THROWS_AS(delta_estimate("A", "B", std::vector<SliderRecord>(records.begin(),
                                                                       records.begin() + 3)),
                    std::invalid_argument);
  }
}

TEST_CASE("delta_estimate recovers latent utilities", "[property]") {
  // Sliders generated from a latent utility vector recover the sign of
  // u_B - u_A as the preferred label.
  Rng rng(31);
  for (int rep = 0; rep < 500; ++rep) {
    double u[4];
    for (double& v : u) v = rng.uniform(-1.0, 1.0);
    const auto slider = [&](int target, int common) {
      return std::clamp((u[common] - u[target]) / 2.0, -1.0, 1.0);
    };
    // Alternatives A=0, B=1, commons C=2, D=3.
    const std::vector<SliderRecord> records{
        {"g", "s", "A", "C", slider(0, 2)},
        {"g", "s", "B", "C", slider(1, 2)},
        {"g", "s", "A", "D", slider(0, 3)},
        {"g", "s", "B", "D", slider(1, 3)}};
    if (std::abs(u[1] - u[0]) < 1e-6) continue;
    const auto est = delta_estimate("A", "B", records);
    CHECK(est.preferred == (u[1] > u[0] ? "B" : "A"));
    CHECK(est.delta > 0.0);
  }
}

TEST_CASE("make_schedule") {
  SECTION("the identity reversal validates") {
    Schedule sched;
    sched.num_subjects = 6;
    sched.num_comparisons = 6;
    sched.phase2 = {5, 4, 3, 2, 1, 0};  // subject k -> comparison C(7-k)
    CHECK(validate_schedule(sched));
  }
  SECTION("a repeated phase-2 comparison fails") {
    Schedule sched;
    sched.num_subjects = 6;
    sched.num_comparisons = 6;
    sched.phase2 = {0, 0, 1, 2, 3, 4};
    CHECK_FALSE(validate_schedule(sched));
  }
  SECTION("seeded generation is deterministic and valid") {
    const auto a = make_schedule(3);
    const auto b = make_schedule(3);
    CHECK(a.phase2 == b.phase2);
    CHECK(validate_schedule(a));
    CHECK(a.phase1(0).size() == 5);
  }
  SECTION("10000 seeded schedules all validate") {
    for (std::uint64_t seed = 0; seed < 10000; ++seed)
      REQUIRE(validate_schedule(make_schedule(seed)));
  }
}

TEST_CASE("nu_from_delta") {
  const auto nu = nu_from_delta(0.4, 1);
  CHECK(nu[0] == Approx(-0.2));
  CHECK(nu[1] == Approx(0.2));
  const auto zero = nu_from_delta(0.0, 0);
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);
  const auto maximal = nu_from_delta(1.0, 0);
  CHECK(maximal[0] == Approx(0.5));
  CHECK(maximal[1] == Approx(-0.5));
  CHECK_THROWS_AS(nu_from_delta(1.2, 0), std::invalid_argument);
  CHECK_THROWS_AS(nu_from_delta(0.5, 2), std::invalid_argument);
}
