#include "mvpal/analysis.hpp"

#include <cmath>
#include <limits>

#include "mvpal/counter_rng.hpp"
#include "mvpal/error.hpp"

namespace mvpal {

namespace {

constexpr int kMaxLloydIterations = 100;

int nearest_center(const std::vector<Eigen::VectorXd>& centers, const Eigen::VectorXd& x, double* dist2 = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = (centers[c] - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

}  // namespace

Eigen::VectorXd flatten(const AlignedPose& pose) {
  Eigen::VectorXd v(3 * static_cast<Eigen::Index>(pose.size()));
  for (std::size_t k = 0; k < pose.size(); ++k) v.segment<3>(3 * static_cast<Eigen::Index>(k)) = pose[k];
  return v;
}

int ClusterModel::nearest(const AlignedPose& pose) const { return nearest_center(centers, flatten(pose)); }

ClusterModel kmeans_poses(const std::vector<AlignedPose>& poses, int k, std::uint64_t seed) {
  if (k < 1 || poses.size() < static_cast<std::size_t>(k))
    throw Error(ErrorCode::TooFewPoses, std::to_string(poses.size()) + " poses for " + std::to_string(k) + " clusters");
  std::vector<Eigen::VectorXd> x;
  x.reserve(poses.size());
  for (const auto& p : poses) x.push_back(flatten(p));
  const std::size_t n = x.size();

  ClusterModel model;
  CounterRng rng{seed, 0x6b6d65616e73ULL};
  model.centers.push_back(x[rng.below(n)]);
  std::vector<double> d2(n);
  while (model.centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest_center(model.centers, x[i], &d2[i]);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > 0.0 && target < d2[i]) {
          pick = i;
          break;
        }
        target -= d2[i];
      }
      while (d2[pick] == 0.0) --pick;  // rounding at the tail
    } else {
      pick = rng.below(n);
    }
    model.centers.push_back(x[pick]);
  }

  model.assignment.assign(n, -1);
  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      const int c = nearest_center(model.centers, x[i], &d);
      inertia += d;
      if (c != model.assignment[i]) {
        model.assignment[i] = c;
        changed = true;
      }
    }
    model.inertia_history.push_back(inertia);
    if (!changed) break;

    std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(x.front().size()));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(model.assignment[i])] += x[i];
      ++counts[static_cast<std::size_t>(model.assignment[i])];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] > 0) {
        model.centers[c] = sums[c] / counts[c];
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (x[i] - model.centers[static_cast<std::size_t>(model.assignment[i])]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      model.centers[c] = x[far];
    }
  }
  return model;
}

double cluster_entropy(const std::vector<int>& counts) {
  double total = 0.0;
  for (int c : counts) {
    if (c < 0) throw Error(ErrorCode::InvariantViolation, "negative cluster count");
    total += c;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyCounts, "no frames in any cluster");
  if (counts.size() < 2) return 0.0;
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = c / total;
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(counts.size()));
}

CostReport cost_report(int iterations, int frames_labeled, const CostModel& cost) {
  if (iterations < 0 || frames_labeled < 0)
    throw Error(ErrorCode::InvariantViolation, "cost inputs must be non-negative");
  const double annotation = frames_labeled * cost.minutes_per_frame / 60.0;
  return {iterations * cost.hours_per_training + annotation, annotation};
}

}  // namespace mvpal
