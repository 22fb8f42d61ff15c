#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "soclearn/rng.hpp"

namespace soclearn {

// One slider response to a pairwise comparison. Negative values mean the
// alternative shown on the left is preferred, positive the one on the right.
struct SliderRecord {
  std::string group_id;
  std::string subject_id;
  std::string left;
  std::string right;
  double slider = 0.0;

  void validate() const {
    if (std::abs(slider) > 1.0)
      throw std::invalid_argument("SliderRecord: |slider| > 1");
    if (left == right)
      throw std::invalid_argument("SliderRecord: left == right");
  }
};

// Signed preference estimate for an ordered pair (first, second): positive
// value means the second element is preferred; delta = |value|.
struct DeltaEstimate {
  std::string first;
  std::string second;
  double value = 0.0;
  double delta = 0.0;
  std::string preferred;
};

// Canonicalize a slider so that positive means preference for `common`.
inline double orient_slider(const SliderRecord& record, const std::string& common) {
  record.validate();
  if (common == record.right) return record.slider;
  if (common == record.left) return -record.slider;
  throw std::invalid_argument("orient_slider: '" + common + "' not in pair {" +
                              record.left + "," + record.right + "}");
}

// Estimate the intrinsic preference between `a` and `b` from the four
// comparisons of a and b against two common alternatives. Per common
// alternative X: est_X = (orient(a vs X) - orient(b vs X)) / 2; the final
// value is the mean of the two estimates and lies in [-1, 1].
inline DeltaEstimate delta_estimate(const std::string& a, const std::string& b,
                                    std::span<const SliderRecord> records) {
  if (records.size() != 4)
    throw std::invalid_argument("delta_estimate: exactly 4 related records required");
  // Identify the two common alternatives and the per-(target, common) slider.
  std::map<std::pair<std::string, std::string>, double> oriented;
  std::set<std::string> commons;
  for (const auto& rec : records) {
    rec.validate();
    std::string target, common;
    if (rec.left == a || rec.right == a) {
      target = a;
      common = rec.left == a ? rec.right : rec.left;
    } else if (rec.left == b || rec.right == b) {
      target = b;
      common = rec.left == b ? rec.right : rec.left;
    } else {
      throw std::invalid_argument("delta_estimate: record unrelated to target pair");
    }
    if (common == a || common == b)
      throw std::invalid_argument("delta_estimate: direct comparison of the target pair supplied");
    if (!oriented.emplace(std::pair{target, common}, orient_slider(rec, common)).second)
      throw std::invalid_argument("delta_estimate: duplicate comparison " + target + " vs " + common);
    commons.insert(common);
  }
  if (commons.size() != 2)
    throw std::invalid_argument("delta_estimate: expected exactly 2 common alternatives");
  double value = 0.0;
  for (const auto& common : commons) {
    const auto ita = oriented.find({a, common});
    const auto itb = oriented.find({b, common});
    if (ita == oriented.end() || itb == oriented.end())
      throw std::invalid_argument("delta_estimate: missing comparison against " + common);
    value += 0.5 * (ita->second - itb->second);
  }
  value /= 2.0;
  DeltaEstimate out;
  out.first = a;
  out.second = b;
  out.value = value;
  out.delta = std::abs(value);
  out.preferred = value > 0.0 ? b : a;
  return out;
}

// Phase assignment for a group: each subject completes all but one
// comparison uninfluenced in phase 1 and the remaining one in phase 2.
struct Schedule {
  int num_subjects = 0;
  int num_comparisons = 0;
  std::vector<int> phase2;  // phase2[subject] = comparison id

  std::vector<int> phase1(int subject) const {
    std::vector<int> out;
    for (int c = 0; c < num_comparisons; ++c)
      if (c != phase2.at(static_cast<std::size_t>(subject))) out.push_back(c);
    return out;
  }
};

// Every subject's phase-2 comparison must have been completed in phase 1 by
// all other subjects, so everyone has a full set of uninfluenced informants.
inline bool validate_schedule(const Schedule& schedule) {
  if (schedule.num_subjects != static_cast<int>(schedule.phase2.size())) return false;
  for (int s = 0; s < schedule.num_subjects; ++s) {
    const int own = schedule.phase2[static_cast<std::size_t>(s)];
    if (own < 0 || own >= schedule.num_comparisons) return false;
    for (int other = 0; other < schedule.num_subjects; ++other) {
      if (other == s) continue;
      // `other` completed `own` in phase 1 iff it is not their phase-2 item.
      if (schedule.phase2[static_cast<std::size_t>(other)] == own) return false;
    }
  }
  return true;
}

// Uniformly random bijection from the 6 subjects onto the 6 comparisons.
inline Schedule make_schedule(std::uint64_t seed) {
  Schedule out;
  out.num_subjects = 6;
  out.num_comparisons = 6;
  out.phase2.resize(6);
  std::iota(out.phase2.begin(), out.phase2.end(), 0);
  Rng rng(derive_seed(seed, /*stream=*/0x5c4ed));
  for (int i = 5; i > 0; --i)
    std::swap(out.phase2[static_cast<std::size_t>(i)],
              out.phase2[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return out;
}

// nu for a binary choice: +delta/2 for the preferred alternative, -delta/2
// for the other.
inline std::array<double, 2> nu_from_delta(double delta, int preferred) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("nu_from_delta: delta outside [0,1]");
  if (preferred != 0 && preferred != 1)
    throw std::invalid_argument("nu_from_delta: preferred index must be 0 or 1");
  std::array<double, 2> nu{-delta / 2.0, -delta / 2.0};
  nu[static_cast<std::size_t>(preferred)] = delta / 2.0;
  return nu;
}

}  // namespace soclearn
