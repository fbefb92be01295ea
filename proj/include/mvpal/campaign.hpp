#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvpal/config.hpp"
#include "mvpal/dataset.hpp"

namespace mvpal {

// One CSV row.
struct ReportRow {
  int iteration = 0;
  int labeled_count = 0;
  double labeled_fraction = 0.0;
  double mkpe_mm = 0.0;          // held-out, world frame
  double mean_epsilon = 0.0;     // mean frame consistency error on the held-out triangulations
  int pseudo_count = 0;
  double pseudo_drift_mean_mm = 0.0;
  double entropy = 0.0;          // cluster entropy of the frames added this iteration
  double hours_elapsed = 0.0;
};

struct PseudoRecord {
  int frame_id = 0;
  double epsilon = 0.0;
  int inlier_count = 0;
  double drift_mm = 0.0;
};

// Instrumentation beyond the CSV row, used by the analysis and the
// acceptance checks.
struct IterationRecord {
  int iteration = 0;
  std::vector<int> selected;          // annotation batch, in pick order (L0 for iteration 0)
  std::vector<int> selected_clusters; // cluster of each selected frame
  std::vector<PseudoRecord> pseudo;
  double unlabeled_mkpe_mm = 0.0;     // mean MKPE over all unlabeled triangulations
  int num_views = 0;
  std::vector<int> cluster_counts;
};

struct CampaignResult {
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  std::vector<IterationRecord> records;
  double wall_seconds = 0.0;
};

// Frames are processed on `config.workers` threads; the result does not
// depend on that number.
CampaignResult run_campaign(const Dataset& dataset, const CampaignConfig& config, std::uint64_t seed);

// Resolves the dataset named by the config (file or synthetic).
Dataset resolve_dataset(const CampaignConfig& config);

std::vector<int> initial_labeled(const std::vector<int>& train, int count, std::uint64_t seed);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(std::istream& in);

void write_selections_csv(std::ostream& out, const std::vector<IterationRecord>& records);

struct AggregateRow {
  int iteration = 0;
  int labeled_count = 0;
  int seeds = 0;
  double mkpe_mean = 0.0;
  double mkpe_variance = 0.0;  // sample variance, n - 1
  double entropy_mean = 0.0;
  double entropy_variance = 0.0;
};

std::vector<AggregateRow> aggregate(const std::vector<std::vector<ReportRow>>& per_seed);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

std::string format_number(double v);

}  // namespace mvpal
