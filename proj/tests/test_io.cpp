#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "soclearn/config.hpp"
#include "soclearn/data.hpp"

using namespace soclearn;
using Catch::Approx;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("soclearn_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("choices round trip") {
  TempDir dir;
  PopulationSpec pop;
  SyntheticDesign design;
  design.individuals = 6;
  design.decisions_per_task = 4;
  const auto rows = generate_synthetic(pop, design, 3);
  REQUIRE(rows.size() == 6 * 4 * 2);

  const auto path = dir.file("choices.csv");
  write_choices(path, rows);
  const auto parsed = parse_choice_rows(path);
  REQUIRE(parsed.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].individual_id == rows[i].individual_id);
    CHECK(parsed[i].task == rows[i].task);
    CHECK(parsed[i].treatment == rows[i].treatment);
    CHECK(parsed[i].decision_id == rows[i].decision_id);
    CHECK(parsed[i].delta == rows[i].delta);  // exact: %.17g survives the trip
    CHECK(parsed[i].preferred == rows[i].preferred);
    CHECK(parsed[i].n_pref == rows[i].n_pref);
    CHECK(parsed[i].chose_pref == rows[i].chose_pref);
  }

  SECTION("observations are built with the documented nu") {
    const auto observations = parse_choices(path);
    for (std::size_t i = 0; i < observations.size(); ++i) {
      const auto& obs = observations[i];
      CHECK(obs.situation.nu[static_cast<std::size_t>(obs.preferred)] ==
            Approx(rows[i].delta / 2.0));
      CHECK(obs.situation.counts[0] + obs.situation.counts[1] == kPeersShown);
    }
  }
}

TEST_CASE("choices validation names the offending row") {
  TempDir dir;
  const auto path = dir.file("bad.csv");
  std::ofstream out(path);
  out << "individual_id,task,treatment,decision_id,delta,preferred,n_pref,chose_pref\n";
  out << "1,quest,control,0,0.5,0,3,1\n";
  out << "2,paint,reward,1,1.2,1,2,0\n";
  out.close();
  try {
    parse_choice_rows(path);
    FAIL("expected a bounds error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);
    CHECK(what.find("delta") != std::string::npos);
  }
}

TEST_CASE("generate_synthetic extremes") {
  SyntheticDesign design;
  design.individuals = 30;
  design.decisions_per_task = 5;

  SECTION("dominant lambda always follows the preference") {
    PopulationSpec pop;
    pop.lambda_mean = {100.0, 100.0};
    pop.f_mean = {0.0, 0.0};
    pop.delta_mean = {0.0, 0.0};
    pop.sigma = {0.0, 0.0, 0.0, 0.0};
    for (const auto& row : generate_synthetic(pop, design, 5)) {
      if (row.delta < 0.15) continue;  // near-indifference is genuinely random
      CHECK(row.chose_pref == 1);
    }
  }
  SECTION("pure noise is balanced") {
    PopulationSpec pop;
    pop.lambda_mean = {0.0, 0.0};
    pop.f_mean = {0.0, 0.0};
    pop.delta_mean = {0.0, 0.0};
    pop.sigma = {0.0, 0.0, 0.0, 0.0};
    double mean = 0.0;
    int n = 0;
    for (const auto& row : generate_synthetic(pop, design, 6)) {
      mean += row.chose_pref;
      ++n;
    }
    mean /= n;
    const double se = 0.5 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - 0.5) < 3.0 * se);
  }
  SECTION("deterministic per seed") {
    PopulationSpec pop;
    const auto a = generate_synthetic(pop, design, 9);
    const auto b = generate_synthetic(pop, design, 9);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].delta == b[i].delta);
      CHECK(a[i].chose_pref == b[i].chose_pref);
    }
  }
}

TEST_CASE("sliders to deltas") {
  TempDir dir;
  const auto path = dir.file("sliders.csv");
  std::ofstream out(path);
  out << "group_id,subject_id,left,right,slider\n";
  // Six comparisons of {A,B,C,D}; the four used for the (A,B) estimate carry
  // the worked-example values.
  out << "g1,s1,A,B,0.1\n";
  out << "g1,s1,A,C,0.5\n";
  out << "g1,s1,B,C,-0.5\n";
  out << "g1,s1,A,D,0.8\n";
  out << "g1,s1,B,D,0.2\n";
  out << "g1,s1,C,D,0.3\n";
  out.close();

  const auto sliders = parse_sliders(path);
  REQUIRE(sliders.size() == 6);
  const auto deltas = deltas_from_sliders(sliders);
  REQUIRE(deltas.size() == 6);  // one per pair
  bool found = false;
  for (const auto& row : deltas)
    if (row.estimate.first == "A" && row.estimate.second == "B") {
      found = true;
      CHECK(row.estimate.value == Approx(0.4));
      CHECK(row.estimate.delta == Approx(0.4));
      CHECK(row.estimate.preferred == "B");
    }
  REQUIRE(found);

  SECTION("deltas round trip through the writer") {
    const auto dpath = dir.file("deltas.csv");
    write_deltas(dpath, deltas);
    const auto table = read_csv(dpath);
    CHECK(table.rows.size() == 6);
    CHECK(table.header[4] == "value");
  }
}

TEST_CASE("run config") {
  RunConfig cfg;
  CHECK(cfg.get_int("chains") == 4);
  CHECK(cfg.get("model") == "pbsi");

  TempDir dir;
  const auto path = dir.file("run.cfg");
  std::ofstream out(path);
  out << "# comment\n";
  out << "chains = 8\n";
  out << "model = psi\n";
  out.close();
  cfg.load(path);
  CHECK(cfg.get_int("chains") == 8);
  CHECK(cfg.get("model") == "psi");
  CHECK(cfg.get_int("draws") == 500);  // untouched default

  SECTION("unknown keys are rejected") {
    std::ofstream bad(dir.file("bad.cfg"));
    bad << "tempo = 3\n";
    bad.close();
    CHECK_THROWS_AS(cfg.load(dir.file("bad.cfg")), std::runtime_error);
  }
}
