#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "soclearn/choice.hpp"
#include "soclearn/csv.hpp"
#include "soclearn/measurement.hpp"
#include "soclearn/rng.hpp"

namespace soclearn {

inline Task task_from_string(const std::string& s) {
  if (s == "quest") return Task::Quest;
  if (s == "paint") return Task::Paint;
  throw std::invalid_argument("unknown task '" + s + "'");
}

inline Treatment treatment_from_string(const std::string& s) {
  if (s == "control") return Treatment::Control;
  if (s == "reward") return Treatment::Reward;
  if (s == "punish") return Treatment::Punish;
  throw std::invalid_argument("unknown treatment '" + s + "'");
}

inline const char* to_string(Task t) {
  return t == Task::Quest ? "quest" : "paint";
}

inline const char* to_string(Treatment t) {
  switch (t) {
    case Treatment::Control: return "control";
    case Treatment::Reward: return "reward";
    case Treatment::Punish: return "punish";
  }
  return "?";
}

inline constexpr int kPeersShown = 5;

// One row of choices.csv.
struct ChoiceRow {
  int individual_id = 0;
  Task task = Task::Quest;
  Treatment treatment = Treatment::Control;
  int decision_id = 0;
  double delta = 0.0;
  int preferred = 0;
  int n_pref = 0;
  int chose_pref = 0;
};

inline Observation to_observation(const ChoiceRow& row) {
  Observation obs;
  obs.individual_id = row.individual_id;
  obs.task = row.task;
  obs.treatment = row.treatment;
  obs.delta_measured = row.delta;
  obs.preferred = row.preferred;
  const auto nu = nu_from_delta(row.delta, row.preferred);
  obs.situation.nu.assign(nu.begin(), nu.end());
  obs.situation.counts.assign(2, 0);
  obs.situation.counts[static_cast<std::size_t>(row.preferred)] = row.n_pref;
  obs.situation.counts[static_cast<std::size_t>(1 - row.preferred)] =
      kPeersShown - row.n_pref;
  obs.chosen = row.chose_pref ? row.preferred : 1 - row.preferred;
  obs.validate();
  return obs;
}

inline const std::vector<std::string> kChoicesHeader{
    "individual_id", "task", "treatment", "decision_id",
    "delta", "preferred", "n_pref", "chose_pref"};

inline void write_choices(const std::string& path, std::span<const ChoiceRow> rows) {
  CsvTable table;
  table.header = kChoicesHeader;
  char buf[32];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.delta);
    table.rows.push_back({std::to_string(row.individual_id), to_string(row.task),
                          to_string(row.treatment), std::to_string(row.decision_id),
                          buf, std::to_string(row.preferred), std::to_string(row.n_pref),
                          std::to_string(row.chose_pref)});
  }
  write_csv(path, table);
}

inline std::vector<ChoiceRow> parse_choice_rows(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header != kChoicesHeader)
    throw std::runtime_error("choices: unexpected header in '" + path + "'");
  std::vector<ChoiceRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const auto fail = [&](const std::string& what) {
      throw std::runtime_error("choices: row " + std::to_string(r + 2) + ": " + what);
    };
    ChoiceRow row;
    try {
      row.individual_id = std::stoi(f[0]);
      row.task = task_from_string(f[1]);
      row.treatment = treatment_from_string(f[2]);
      row.decision_id = std::stoi(f[3]);
      row.delta = std::stod(f[4]);
      row.preferred = std::stoi(f[5]);
      row.n_pref = std::stoi(f[6]);
      row.chose_pref = std::stoi(f[7]);
    } catch (const std::exception& e) {
      fail(e.what());
    }
    if (row.delta < 0.0 || row.delta > 1.0) fail("delta outside [0,1] (column delta)");
    if (row.preferred != 0 && row.preferred != 1) fail("preferred not in {0,1}");
    if (row.n_pref < 0 || row.n_pref > kPeersShown) fail("n_pref outside 0..5");
    if (row.chose_pref != 0 && row.chose_pref != 1) fail("chose_pref not in {0,1}");
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<Observation> parse_choices(const std::string& path) {
  std::vector<Observation> out;
  for (const auto& row : parse_choice_rows(path)) out.push_back(to_observation(row));
  return out;
}

// Generating population for synthetic data: task-level means of the four
// behavioral parameters (phi on the natural scale), individual standard
// deviations, and treatment offsets on f. Individual effects are drawn
// independently (identity correlation).
struct PopulationSpec {
  std::array<double, 2> lambda_mean{2.89, 5.09};
  std::array<double, 2> f_mean{2.61, 1.22};
  std::array<double, 2> phi_mean{3.29, 1.98};
  std::array<double, 2> delta_mean{2.89, 2.36};
  std::array<double, 4> sigma{0.5, 0.5, 0.3, 0.5};  // lambda, f, phi(log), delta
  double f_effect_reward = 0.0;
  double f_effect_punish = 0.0;
};

struct SyntheticDesign {
  int individuals = 120;
  int decisions_per_task = 10;
  bool balanced_treatments = true;  // round-robin over control/reward/punish
};

// Simulate the experiment: every decision shows the focal individual the
// choices of five uninfluenced peers, each peer deciding by intrinsic
// preference alone (f = 0) with its own lambda drawn from the population;
// the focal choice then follows the full model.
inline std::vector<ChoiceRow> generate_synthetic(const PopulationSpec& pop,
                                                 const SyntheticDesign& design,
                                                 std::uint64_t seed) {
  std::vector<ChoiceRow> rows;
  int decision_id = 0;
  for (int i = 0; i < design.individuals; ++i) {
    Rng rng(derive_seed(seed, 0x9e4, static_cast<std::uint64_t>(i)));
    const Treatment treatment =
        design.balanced_treatments ? static_cast<Treatment>(i % 3) : Treatment::Control;
    const std::array<double, 4> z{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    for (int t = 0; t < 2; ++t) {
      AgentParams params;
      params.lambda = pop.lambda_mean[static_cast<std::size_t>(t)] + pop.sigma[0] * z[0];
      params.f = pop.f_mean[static_cast<std::size_t>(t)] + pop.sigma[1] * z[1];
      if (treatment == Treatment::Reward) params.f += pop.f_effect_reward;
      if (treatment == Treatment::Punish) params.f += pop.f_effect_punish;
      params.phi = std::exp(std::log(pop.phi_mean[static_cast<std::size_t>(t)]) +
                            pop.sigma[2] * z[2]);
      params.delta = pop.delta_mean[static_cast<std::size_t>(t)] + pop.sigma[3] * z[3];
      for (int d = 0; d < design.decisions_per_task; ++d) {
        ChoiceRow row;
        row.individual_id = i;
        row.task = static_cast<Task>(t);
        row.treatment = treatment;
        row.decision_id = decision_id++;
        row.delta = rng.uniform();
        row.preferred = rng.bernoulli(0.5) ? 1 : 0;
        const auto nu = nu_from_delta(row.delta, row.preferred);
        int n_pref = 0;
        for (int peer = 0; peer < kPeersShown; ++peer) {
          // Each peer has its own preference over the same two alternatives
          // and decides uninfluenced; peer preferences are independent of
          // the focal individual's, so observed counts are not collinear
          // with the focal preference signal.
          const double peer_lambda =
              rng.normal(pop.lambda_mean[static_cast<std::size_t>(t)], pop.sigma[0]);
          const double peer_delta = rng.uniform();
          const int peer_side = rng.bernoulli(0.5) ? row.preferred : 1 - row.preferred;
          const double p_own = 1.0 / (1.0 + std::exp(-peer_lambda * peer_delta));
          const int peer_choice = rng.bernoulli(p_own) ? peer_side : 1 - peer_side;
          if (peer_choice == row.preferred) ++n_pref;
        }
        row.n_pref = n_pref;
        std::array<int, 2> counts{};
        counts[static_cast<std::size_t>(row.preferred)] = n_pref;
        counts[static_cast<std::size_t>(1 - row.preferred)] = kPeersShown - n_pref;
        const auto shares = posterior_shares(params, nu, counts);
        const auto probs = choice_probabilities(params, nu, shares);
        const int chosen =
            rng.bernoulli(probs[static_cast<std::size_t>(row.preferred)])
                ? row.preferred
                : 1 - row.preferred;
        row.chose_pref = chosen == row.preferred ? 1 : 0;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

// sliders.csv -> SliderRecords.
inline const std::vector<std::string> kSlidersHeader{"group_id", "subject_id", "left",
                                                     "right", "slider"};

inline std::vector<SliderRecord> parse_sliders(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header != kSlidersHeader)
    throw std::runtime_error("sliders: unexpected header in '" + path + "'");
  std::vector<SliderRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    SliderRecord rec{f[0], f[1], f[2], f[3], std::stod(f[4])};
    try {
      rec.validate();
    } catch (const std::exception& e) {
      throw std::runtime_error("sliders: row " + std::to_string(r + 2) + ": " + e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

// All pairwise preference estimates per (group, subject) from that subject's
// six comparisons of four alternatives.
struct DeltaRow {
  std::string group_id;
  std::string subject_id;
  DeltaEstimate estimate;
};

inline std::vector<DeltaRow> deltas_from_sliders(std::span<const SliderRecord> records) {
  std::map<std::pair<std::string, std::string>, std::vector<SliderRecord>> by_subject;
  for (const auto& rec : records)
    by_subject[{rec.group_id, rec.subject_id}].push_back(rec);
  std::vector<DeltaRow> out;
  for (const auto& [key, recs] : by_subject) {
    std::set<std::string> labels;
    for (const auto& rec : recs) {
      labels.insert(rec.left);
      labels.insert(rec.right);
    }
    if (labels.size() != 4 || recs.size() != 6)
      throw std::runtime_error("deltas: subject " + key.second + " in group " + key.first +
                               " needs the 6 comparisons of 4 alternatives");
    const std::vector<std::string> alts(labels.begin(), labels.end());
    for (std::size_t a = 0; a < alts.size(); ++a)
      for (std::size_t b = a + 1; b < alts.size(); ++b) {
        std::vector<SliderRecord> related;
        for (const auto& rec : recs) {
          const bool has_a = rec.left == alts[a] || rec.right == alts[a];
          const bool has_b = rec.left == alts[b] || rec.right == alts[b];
          if (has_a != has_b) related.push_back(rec);
        }
        out.push_back({key.first, key.second, delta_estimate(alts[a], alts[b], related)});
      }
  }
  return out;
}

inline void write_deltas(const std::string& path, std::span<const DeltaRow> rows) {
  CsvTable table;
  table.header = {"group_id", "subject_id", "alt_a", "alt_b", "value", "delta", "preferred"};
  char buf[2][32];
  for (const auto& row : rows) {
    std::snprintf(buf[0], sizeof buf[0], "%.17g", row.estimate.value);
    std::snprintf(buf[1], sizeof buf[1], "%.17g", row.estimate.delta);
    table.rows.push_back({row.group_id, row.subject_id, row.estimate.first,
                          row.estimate.second, buf[0], buf[1], row.estimate.preferred});
  }
  write_csv(path, table);
}

}  // namespace soclearn
