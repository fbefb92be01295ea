#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mvpal/pose.hpp"

namespace mvpal {

// Poses flattened to 3K-vectors (mm).
struct ClusterModel {
  std::vector<Eigen::VectorXd> centers;
  std::vector<int> assignment;
  std::vector<double> inertia_history;  // after each assignment step

  int nearest(const AlignedPose& pose) const;
  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

Eigen::VectorXd flatten(const AlignedPose& pose);

// k-means++ seeding, then Lloyd iterations to an assignment fixpoint (at
// most 100). Empty clusters are re-seeded from the point farthest from its
// current center.
ClusterModel kmeans_poses(const std::vector<AlignedPose>& poses, int k, std::uint64_t seed);

// Shannon entropy of the count histogram divided by log(counts.size()).
double cluster_entropy(const std::vector<int>& counts);

struct CostModel {
  double minutes_per_frame = 1.0;
  double hours_per_training = 1.0;
};

struct CostReport {
  double active_learning_hours = 0.0;
  double conventional_hours = 0.0;
};

CostReport cost_report(int iterations, int frames_labeled, const CostModel& cost = {});

}  // namespace mvpal
