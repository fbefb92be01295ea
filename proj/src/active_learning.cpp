#include "mvpal/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mvpal/counter_rng.hpp"
#include "mvpal/error.hpp"

namespace mvpal {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Rand: return "rand";
    case Strategy::Bsb: return "bsb";
    case Strategy::Mpe: return "mpe";
    case Strategy::CoreSet: return "coreset";
    case Strategy::Mvc: return "mvc";
  }
  return "rand";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::Rand, Strategy::Bsb, Strategy::Mpe, Strategy::CoreSet, Strategy::Mvc})
    if (to_string(s) == name) return s;
  throw Error(ErrorCode::ConfigError, "unknown strategy '" + std::string(name) + "'");
}

void PoolState::check(const FrameSet& all) const {
  for (int id : labeled)
    if (unlabeled.count(id)) throw Error(ErrorCode::InvariantViolation, "frame " + std::to_string(id) + " both labeled and unlabeled");
  if (labeled.size() + unlabeled.size() != all.size())
    throw Error(ErrorCode::InvariantViolation, "labeled and unlabeled do not cover the pool");
  for (int id : labeled)
    if (!all.count(id)) throw Error(ErrorCode::InvariantViolation, "unknown labeled frame " + std::to_string(id));
  for (int id : unlabeled)
    if (!all.count(id)) throw Error(ErrorCode::InvariantViolation, "unknown unlabeled frame " + std::to_string(id));
  for (int id : pseudo)
    if (!unlabeled.count(id))
      throw Error(ErrorCode::InvariantViolation, "pseudo-labeled frame " + std::to_string(id) + " is not unlabeled");
}

void PoolState::annotate(const std::vector<int>& frames) {
  for (int id : frames) {
    if (unlabeled.erase(id) == 0)
      throw Error(ErrorCode::InvariantViolation, "frame " + std::to_string(id) + " is not unlabeled");
    pseudo.erase(id);
    labeled.insert(id);
  }
}

FrameScore score_bsb(int frame_id, const std::vector<std::vector<Heatmap>>& heatmaps, const PeakParams& params) {
  if (heatmaps.empty()) throw Error(ErrorCode::EmptyHeatmap, "frame has no views");
  double sum = 0.0;
  for (const auto& view : heatmaps) sum += bsb_view(view, params);
  // Negated margin: argmax then prefers the least decisive frames.
  return {frame_id, Strategy::Bsb, -sum / static_cast<double>(heatmaps.size())};
}

FrameScore score_mpe(int frame_id, const std::vector<std::vector<Heatmap>>& heatmaps, const PeakParams& params) {
  if (heatmaps.empty()) throw Error(ErrorCode::EmptyHeatmap, "frame has no views");
  double sum = 0.0;
  for (const auto& view : heatmaps) sum += mpe_view(view, params);
  return {frame_id, Strategy::Mpe, sum / static_cast<double>(heatmaps.size())};
}

FrameScore score_mc(int frame_id, const FrameTriangulation& ft) { return {frame_id, Strategy::Mvc, ft.epsilon}; }

FrameScore score_cs(int frame_id, const AlignedPose& candidate, const std::vector<AlignedPose>& labeled) {
  if (labeled.empty()) throw Error(ErrorCode::EmptyPool, "no labeled poses");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : labeled) best = std::min(best, pose_distance(candidate, l));
  return {frame_id, Strategy::CoreSet, best};
}

namespace {

std::vector<int> candidates_of(const PoolState& pool) {
  std::vector<int> out;
  for (int id : pool.unlabeled)
    if (!pool.pseudo.count(id)) out.push_back(id);
  return out;  // ascending, from the ordered set
}

std::vector<int> select_static(const std::vector<int>& candidates, int budget, const SelectionInput& input) {
  std::vector<std::pair<double, int>> scored;
  scored.reserve(candidates.size());
  for (int id : candidates) {
    const auto it = input.static_scores.find(id);
    if (it == input.static_scores.end())
      throw Error(ErrorCode::InvariantViolation, "no score for candidate frame " + std::to_string(id));
    if (!std::isfinite(it->second))
      throw Error(ErrorCode::InvariantViolation, "non-finite score for frame " + std::to_string(id));
    scored.emplace_back(it->second, id);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<int> out;
  for (int i = 0; i < budget; ++i) out.push_back(scored[static_cast<std::size_t>(i)].second);
  return out;
}

// Each frame gets a key from the seeded counter generator and the smallest
// keys win: a uniform draw without replacement whose outcome for a frame
// does not depend on which other frames are candidates.
std::vector<int> select_random(const std::vector<int>& candidates, int budget, std::uint64_t seed, int iteration) {
  std::vector<std::pair<std::uint64_t, int>> keyed;
  keyed.reserve(candidates.size());
  for (int id : candidates)
    keyed.emplace_back(CounterRng{seed, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(id)}.next(),
                       id);
  std::partial_sort(keyed.begin(), keyed.begin() + budget, keyed.end());
  std::vector<int> out;
  for (int i = 0; i < budget; ++i) out.push_back(keyed[static_cast<std::size_t>(i)].second);
  return out;
}

const AlignedPose& pose_of(const SelectionInput& input, int id) {
  const auto it = input.poses.find(id);
  if (it == input.poses.end()) throw Error(ErrorCode::InvariantViolation, "no pose for frame " + std::to_string(id));
  return it->second;
}

std::vector<int> select_coreset(const PoolState& pool, const std::vector<int>& candidates, int budget,
                                const SelectionInput& input) {
  if (pool.labeled.empty()) throw Error(ErrorCode::EmptyPool, "CoreSet needs a non-empty labeled set");
  std::vector<double> min_dist(candidates.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const AlignedPose& pose = pose_of(input, candidates[c]);
    for (int id : pool.labeled) min_dist[c] = std::min(min_dist[c], pose_distance(pose, pose_of(input, id)));
  }
  std::vector<bool> taken(candidates.size(), false);
  std::vector<int> out;
  for (int b = 0; b < budget; ++b) {
    std::size_t best = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (taken[c]) continue;
      if (best == candidates.size() || min_dist[c] > min_dist[best]) best = c;
    }
    taken[best] = true;
    out.push_back(candidates[best]);
    // The pick joins the centers; one pass keeps the table exact.
    const AlignedPose& picked = pose_of(input, candidates[best]);
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (!taken[c]) min_dist[c] = std::min(min_dist[c], pose_distance(pose_of(input, candidates[c]), picked));
  }
  return out;
}

}  // namespace

std::vector<int> select_batch(Strategy strategy, const PoolState& pool, int budget, const SelectionInput& input) {
  if (budget < 0) throw Error(ErrorCode::BudgetExceedsPool, "negative budget");
  const std::vector<int> candidates = candidates_of(pool);
  if (static_cast<std::size_t>(budget) > candidates.size())
    throw Error(ErrorCode::BudgetExceedsPool, "budget " + std::to_string(budget) + " exceeds " +
                                                  std::to_string(candidates.size()) + " candidates");
  switch (strategy) {
    case Strategy::Rand: return select_random(candidates, budget, input.seed, pool.iteration);
    case Strategy::CoreSet: return select_coreset(pool, candidates, budget, input);
    case Strategy::Bsb:
    case Strategy::Mpe:
    case Strategy::Mvc: return select_static(candidates, budget, input);
  }
  return {};
}

}  // namespace mvpal
