#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string_view>
#include <vector>

#include "mvpal/geometry.hpp"
#include "mvpal/heatmap.hpp"
#include "mvpal/pose.hpp"

namespace mvpal {

enum class Strategy { Rand, Bsb, Mpe, CoreSet, Mvc };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

using FrameSet = std::set<int>;

struct PoolState {
  FrameSet labeled;
  FrameSet unlabeled;
  FrameSet pseudo;
  int iteration = 0;

  // Throws InvariantViolation when the sets are not a valid partition of
  // `all`, or pseudo is not contained in unlabeled.
  void check(const FrameSet& all) const;

  // Moves frames from the unlabeled to the labeled side.
  void annotate(const std::vector<int>& frames);
};

struct FrameScore {
  int frame_id = 0;
  Strategy strategy = Strategy::Rand;
  double value = 0.0;  // higher is selected sooner
};

// heatmaps[v][k] for one frame.
FrameScore score_bsb(int frame_id, const std::vector<std::vector<Heatmap>>& heatmaps, const PeakParams& params = {});
FrameScore score_mpe(int frame_id, const std::vector<std::vector<Heatmap>>& heatmaps, const PeakParams& params = {});
FrameScore score_mc(int frame_id, const FrameTriangulation& ft);
FrameScore score_cs(int frame_id, const AlignedPose& candidate, const std::vector<AlignedPose>& labeled);

// Everything select_batch may need; only the part relevant to the strategy
// has to be filled in.
struct SelectionInput {
  std::map<int, double> static_scores;   // Bsb / Mpe / Mvc, keyed by frame id
  std::map<int, AlignedPose> poses;      // CoreSet: predicted pose of every labeled and candidate frame
  std::uint64_t seed = 0;                // Rand
};

// Greedy selection loop. Returns the picks in selection order.
std::vector<int> select_batch(Strategy strategy, const PoolState& pool, int budget, const SelectionInput& input);

}  // namespace mvpal
