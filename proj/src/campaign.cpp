#include "mvpal/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "mvpal/counter_rng.hpp"
#include "mvpal/error.hpp"

namespace mvpal {

namespace {

// What the campaign keeps from one frame's inference; heatmaps are scored
// and dropped immediately.
struct FrameOutcome {
  FrameTriangulation triangulation;
  double bsb = 0.0;
  double mpe = 0.0;
};

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(count);
  for (std::size_t w = 0; w < count; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += count) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class Campaign {
 public:
  Campaign(const Dataset& dataset, const CampaignConfig& config, std::uint64_t seed)
      : data_(dataset), cfg_(config), seed_(seed) {
    model_ = cfg_.noise;
    model_.seed = hash_key({cfg_.noise.seed, seed});
    for (int id : data_.train) all_.insert(id);

    std::vector<AlignedPose> aligned;
    for (int id : data_.train) aligned.push_back(align_root(data_.frame(id).pose, cfg_.cluster_root));
    clusters_ = kmeans_poses(aligned, cfg_.clusters, cfg_.cluster_seed);
    for (std::size_t i = 0; i < data_.train.size(); ++i) cluster_of_[data_.train[i]] = clusters_.assignment[i];
  }

  CampaignResult run() {
    const auto start = std::chrono::steady_clock::now();
    CampaignResult result;
    result.seed = seed_;

    const std::vector<int> initial = initial_labeled(data_.train, cfg_.init_labeled, seed_);
    pool_.unlabeled = all_;
    pool_.annotate(initial);
    pool_.check(all_);
    retrain({});

    IterationRecord first;
    first.selected = initial;
    result.rows.push_back(evaluate(0, first, {}));
    result.records.push_back(std::move(first));

    FrameSet previous_pseudo;
    const bool needs_heatmaps = cfg_.strategy == Strategy::Bsb || cfg_.strategy == Strategy::Mpe;
    for (int it = 1; it <= cfg_.iterations; ++it) {
      pool_.iteration = it;
      pool_.pseudo.clear();

      // Inference over the unlabeled pool with the current model; CoreSet
      // also needs predictions for the labeled frames.
      std::vector<int> ids;
      for (int id : data_.train)
        if (cfg_.strategy == Strategy::CoreSet || pool_.unlabeled.count(id)) ids.push_back(id);
      std::vector<FrameOutcome> outcomes(ids.size());
      parallel_for(ids.size(), cfg_.workers, [&](std::size_t i) {
        const bool render = needs_heatmaps && pool_.unlabeled.count(ids[i]);
        outcomes[i] = process(data_.frame(ids[i]), it, render);
      });
      std::map<int, FrameTriangulation> triangulations;
      SelectionInput input;
      input.seed = hash_key({seed_, 0x73656c656374ULL});
      double unlabeled_error = 0.0;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const int id = ids[i];
        if (cfg_.strategy == Strategy::CoreSet)
          input.poses.emplace(id, align_root(outcomes[i].triangulation.points(), cfg_.coreset_root));
        if (!pool_.unlabeled.count(id)) continue;
        unlabeled_error += mkpe(outcomes[i].triangulation.points(), data_.frame(id).pose);
        switch (cfg_.strategy) {
          case Strategy::Bsb: input.static_scores[id] = outcomes[i].bsb; break;
          case Strategy::Mpe: input.static_scores[id] = outcomes[i].mpe; break;
          case Strategy::Mvc: input.static_scores[id] = score_mc(id, outcomes[i].triangulation).value; break;
          default: break;
        }
        triangulations.emplace(id, std::move(outcomes[i].triangulation));
      }

      IterationRecord record;
      record.iteration = it;
      record.num_views = static_cast<int>(data_.cameras.size());
      record.unlabeled_mkpe_mm = unlabeled_error / static_cast<double>(pool_.unlabeled.size());

      std::vector<Pose3D> pseudo_poses;
      if (cfg_.self_training.enabled) {
        pool_.pseudo = select_pseudo_labels(pool_, previous_pseudo, cfg_.self_training.target(cfg_.batch_per_iter),
                                            triangulations, record.num_views, cfg_.self_training.variant);
        for (int id : pool_.pseudo) {
          const FrameTriangulation& ft = triangulations.at(id);
          pseudo_poses.push_back(ft.points());
          record.pseudo.push_back({id, ft.epsilon, ft.inlier_count, mkpe(ft.points(), data_.frame(id).pose)});
        }
      }
      pool_.check(all_);

      record.selected = select_batch(cfg_.strategy, pool_, cfg_.batch_per_iter, input);
      pool_.annotate(record.selected);
      pool_.check(all_);
      previous_pseudo = pool_.pseudo;

      retrain(pseudo_poses);
      result.rows.push_back(evaluate(it, record, pseudo_poses));
      result.records.push_back(std::move(record));
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

 private:
  FrameOutcome process(const Frame& frame, int iteration, bool render) const {
    Inference inf = infer(frame, data_.cameras, summary_, model_, iteration, cfg_.render, render);
    FrameOutcome out;
    out.triangulation = frame_triangulate(data_.cameras, inf.predictions, cfg_.triangulation);
    if (render && cfg_.strategy == Strategy::Bsb) out.bsb = score_bsb(frame.id, inf.heatmaps, cfg_.peaks).value;
    if (render && cfg_.strategy == Strategy::Mpe) out.mpe = score_mpe(frame.id, inf.heatmaps, cfg_.peaks).value;
    return out;
  }

  // "Training" = rebuilding the predictor's pool summary from annotated
  // ground truth plus the current pseudo-labels.
  void retrain(const std::vector<Pose3D>& pseudo_poses) {
    std::vector<Pose3D> training;
    for (int id : pool_.labeled) training.push_back(data_.frame(id).pose);
    training.insert(training.end(), pseudo_poses.begin(), pseudo_poses.end());
    summary_ = summarize_pool(training, data_.train.size(), cfg_.coreset_root);
  }

  ReportRow evaluate(int iteration, IterationRecord& record, const std::vector<Pose3D>& pseudo_poses) {
    std::vector<double> errors(data_.heldout.size());
    std::vector<double> epsilons(data_.heldout.size());
    parallel_for(data_.heldout.size(), cfg_.workers, [&](std::size_t i) {
      const Frame& f = data_.frame(data_.heldout[i]);
      const FrameOutcome o = process(f, iteration, false);
      errors[i] = mkpe(o.triangulation.points(), f.pose);
      epsilons[i] = o.triangulation.epsilon;
    });
    ReportRow row;
    row.iteration = iteration;
    row.labeled_count = static_cast<int>(pool_.labeled.size());
    row.labeled_fraction = static_cast<double>(pool_.labeled.size()) / static_cast<double>(data_.train.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
      row.mkpe_mm += errors[i];
      row.mean_epsilon += epsilons[i];
    }
    row.mkpe_mm /= static_cast<double>(errors.size());
    row.mean_epsilon /= static_cast<double>(errors.size());
    row.pseudo_count = static_cast<int>(pseudo_poses.size());
    if (!record.pseudo.empty()) {
      double drift = 0.0;
      for (const auto& p : record.pseudo) drift += p.drift_mm;
      row.pseudo_drift_mean_mm = drift / static_cast<double>(record.pseudo.size());
    }
    record.cluster_counts.assign(static_cast<std::size_t>(cfg_.clusters), 0);
    for (int id : record.selected) {
      const int c = cluster_of_.at(id);
      record.selected_clusters.push_back(c);
      ++record.cluster_counts[static_cast<std::size_t>(c)];
    }
    row.entropy = record.selected.empty() ? 0.0 : cluster_entropy(record.cluster_counts);
    row.hours_elapsed = cost_report(iteration, row.labeled_count, cfg_.cost).active_learning_hours;
    return row;
  }

  const Dataset& data_;
  const CampaignConfig& cfg_;
  std::uint64_t seed_;
  NoiseModel model_;
  FrameSet all_;
  PoolState pool_;
  PoolSummary summary_;
  ClusterModel clusters_;
  std::map<int, int> cluster_of_;
};

}  // namespace

std::vector<int> initial_labeled(const std::vector<int>& train, int count, std::uint64_t seed) {
  if (count < 0 || static_cast<std::size_t>(count) > train.size())
    throw Error(ErrorCode::BudgetExceedsPool, "initial labeled count exceeds the train split");
  std::vector<int> ids = train;
  std::sort(ids.begin(), ids.end());
  CounterRng rng{seed, 0x696e6974ULL};
  for (int i = 0; i < count; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.below(ids.size() - static_cast<std::size_t>(i));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(count));
  return ids;
}

CampaignResult run_campaign(const Dataset& dataset, const CampaignConfig& config, std::uint64_t seed) {
  config.validate();
  config.validate_against(dataset);
  return Campaign(dataset, config, seed).run();
}

Dataset resolve_dataset(const CampaignConfig& config) {
  return config.dataset.empty() ? generate_synthetic(config.synthetic) : load_dataset(config.dataset);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "iteration,labeled_count,labeled_fraction,mkpe_mm,mean_epsilon,pseudo_count,pseudo_drift_mean_mm,entropy,"
         "hours_elapsed\n";
  for (const auto& r : rows)
    out << r.iteration << ',' << r.labeled_count << ',' << format_number(r.labeled_fraction) << ','
        << format_number(r.mkpe_mm) << ',' << format_number(r.mean_epsilon) << ',' << r.pseudo_count << ','
        << format_number(r.pseudo_drift_mean_mm) << ',' << format_number(r.entropy) << ','
        << format_number(r.hours_elapsed) << '\n';
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty report");
  std::vector<ReportRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw Error(ErrorCode::ParseError, "report line " + std::to_string(line_no) + ": expected 9 columns");
    try {
      ReportRow r;
      r.iteration = std::stoi(cells[0]);
      r.labeled_count = std::stoi(cells[1]);
      r.labeled_fraction = std::stod(cells[2]);
      r.mkpe_mm = std::stod(cells[3]);
      r.mean_epsilon = std::stod(cells[4]);
      r.pseudo_count = std::stoi(cells[5]);
      r.pseudo_drift_mean_mm = std::stod(cells[6]);
      r.entropy = std::stod(cells[7]);
      r.hours_elapsed = std::stod(cells[8]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, "report line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

void write_selections_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
  out << "iteration,kind,frame_id,cluster,epsilon,inlier_count,drift_mm\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.selected.size(); ++i)
      out << r.iteration << ",labeled," << r.selected[i] << ',' << r.selected_clusters[i] << ",,,\n";
    for (const auto& p : r.pseudo)
      out << r.iteration << ",pseudo," << p.frame_id << ",," << format_number(p.epsilon) << ',' << p.inlier_count
          << ',' << format_number(p.drift_mm) << '\n';
  }
}

std::vector<AggregateRow> aggregate(const std::vector<std::vector<ReportRow>>& per_seed) {
  std::vector<AggregateRow> out;
  if (per_seed.empty()) return out;
  const std::size_t rows = per_seed.front().size();
  for (const auto& s : per_seed)
    if (s.size() != rows) throw Error(ErrorCode::DimensionMismatch, "seed reports differ in length");
  const double n = static_cast<double>(per_seed.size());
  auto mean_var = [&](std::size_t i, double ReportRow::*field) {
    double mean = 0.0;
    for (const auto& s : per_seed) mean += s[i].*field;
    mean /= n;
    double var = 0.0;
    for (const auto& s : per_seed) var += (s[i].*field - mean) * (s[i].*field - mean);
    return std::pair{mean, per_seed.size() > 1 ? var / (n - 1.0) : 0.0};
  };
  for (std::size_t i = 0; i < rows; ++i) {
    AggregateRow a;
    a.iteration = per_seed.front()[i].iteration;
    a.labeled_count = per_seed.front()[i].labeled_count;
    a.seeds = static_cast<int>(per_seed.size());
    std::tie(a.mkpe_mean, a.mkpe_variance) = mean_var(i, &ReportRow::mkpe_mm);
    std::tie(a.entropy_mean, a.entropy_variance) = mean_var(i, &ReportRow::entropy);
    out.push_back(a);
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "iteration,labeled_count,seeds,mkpe_mm_mean,mkpe_mm_variance,entropy_mean,entropy_variance\n";
  for (const auto& a : rows)
    out << a.iteration << ',' << a.labeled_count << ',' << a.seeds << ',' << format_number(a.mkpe_mean) << ','
        << format_number(a.mkpe_variance) << ',' << format_number(a.entropy_mean) << ','
        << format_number(a.entropy_variance) << '\n';
}

}  // namespace mvpal
