#include "mvpal/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mvpal/error.hpp"

namespace mvpal {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw Error(ErrorCode::ConfigError, where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, where + "." + key + ": " + e.what());
  }
}

void read_noise(const json& j, NoiseModel& n) {
  reject_unknown(j, {"sigma_base_px", "sigma_floor_px", "coverage_scale_mm", "pool_exponent", "outlier_prob_base",
                     "outlier_offset_px", "multi_peak_prob", "seed"},
                 "noise");
  read(j, "sigma_base_px", n.sigma_base_px, "noise");
  read(j, "sigma_floor_px", n.sigma_floor_px, "noise");
  read(j, "coverage_scale_mm", n.coverage_scale_mm, "noise");
  read(j, "pool_exponent", n.pool_exponent, "noise");
  read(j, "outlier_prob_base", n.outlier_prob_base, "noise");
  read(j, "outlier_offset_px", n.outlier_offset_px, "noise");
  read(j, "multi_peak_prob", n.multi_peak_prob, "noise");
  read(j, "seed", n.seed, "noise");
}

void read_synthetic(const json& j, SyntheticSpec& s) {
  reject_unknown(j, {"clusters", "frames_per_cluster", "heldout_frames", "num_cameras", "ring_radius_mm", "focal_px",
                     "image_width", "image_height", "pose_scale", "cluster_spread_mm", "within_cluster_mm",
                     "root_jitter_mm", "zipf_exponent", "seed"},
                 "synthetic");
  read(j, "clusters", s.clusters, "synthetic");
  read(j, "frames_per_cluster", s.frames_per_cluster, "synthetic");
  read(j, "heldout_frames", s.heldout_frames, "synthetic");
  read(j, "num_cameras", s.num_cameras, "synthetic");
  read(j, "ring_radius_mm", s.ring_radius_mm, "synthetic");
  read(j, "focal_px", s.focal_px, "synthetic");
  read(j, "image_width", s.image_width, "synthetic");
  read(j, "image_height", s.image_height, "synthetic");
  read(j, "pose_scale", s.pose_scale, "synthetic");
  read(j, "cluster_spread_mm", s.cluster_spread_mm, "synthetic");
  read(j, "within_cluster_mm", s.within_cluster_mm, "synthetic");
  read(j, "root_jitter_mm", s.root_jitter_mm, "synthetic");
  read(j, "zipf_exponent", s.zipf_exponent, "synthetic");
  read(j, "seed", s.seed, "synthetic");
}

json synthetic_to_json(const SyntheticSpec& s) {
  return {{"clusters", s.clusters},
          {"frames_per_cluster", s.frames_per_cluster},
          {"heldout_frames", s.heldout_frames},
          {"num_cameras", s.num_cameras},
          {"ring_radius_mm", s.ring_radius_mm},
          {"focal_px", s.focal_px},
          {"image_width", s.image_width},
          {"image_height", s.image_height},
          {"pose_scale", s.pose_scale},
          {"cluster_spread_mm", s.cluster_spread_mm},
          {"within_cluster_mm", s.within_cluster_mm},
          {"root_jitter_mm", s.root_jitter_mm},
          {"zipf_exponent", s.zipf_exponent},
          {"seed", s.seed}};
}

}  // namespace

int SelfTrainingConfig::target(int batch_per_iter) const {
  return static_cast<int>(std::lround(fraction * batch_per_iter));
}

void CampaignConfig::validate() const {
  if (init_labeled < 1) throw Error(ErrorCode::ConfigError, "init_labeled must be >= 1");
  if (batch_per_iter < 0 || iterations < 0) throw Error(ErrorCode::ConfigError, "batch and iterations must be >= 0");
  if (!(self_training.fraction >= 0.0)) throw Error(ErrorCode::ConfigError, "self_training.fraction must be >= 0");
  noise.validate();
  if (render.heatmap_width < 1 || render.heatmap_height < 1 || !(render.heatmap_sigma_px > 0.0) ||
      !(render.image_width > 0.0) || !(render.image_height > 0.0))
    throw Error(ErrorCode::ConfigError, "render sizes must be positive");
  if (peaks.window < 3 || peaks.window % 2 == 0 || !(peaks.min_frac >= 0.0 && peaks.min_frac < 1.0) ||
      peaks.max_peaks < 1)
    throw Error(ErrorCode::ConfigError, "invalid peak parameters");
  if (!(triangulation.threshold_px > 0.0)) throw Error(ErrorCode::ConfigError, "ransac threshold must be positive");
  if (triangulation.failure_penalty && !(*triangulation.failure_penalty >= 0.0))
    throw Error(ErrorCode::ConfigError, "failure penalty must be non-negative");
  if (clusters < 1) throw Error(ErrorCode::ConfigError, "clusters must be >= 1");
  if (seeds.empty()) throw Error(ErrorCode::ConfigError, "at least one seed required");
  if (cost.minutes_per_frame < 0.0 || cost.hours_per_training < 0.0)
    throw Error(ErrorCode::ConfigError, "cost model entries must be non-negative");
  if (workers < 1) throw Error(ErrorCode::ConfigError, "workers must be >= 1");
  if (dataset.empty()) synthetic.validate();
}

void CampaignConfig::validate_against(const Dataset& d) const {
  const long long need = init_labeled + static_cast<long long>(iterations) * batch_per_iter;
  if (need > static_cast<long long>(d.train.size()))
    throw Error(ErrorCode::ConfigError, "init_labeled + iterations * batch_per_iter = " + std::to_string(need) +
                                            " exceeds the train split (" + std::to_string(d.train.size()) + ")");
  if (d.heldout.empty()) throw Error(ErrorCode::ConfigError, "dataset has no held-out frames");
  if (coreset_root < 0 || coreset_root >= d.num_keypoints || cluster_root < 0 || cluster_root >= d.num_keypoints)
    throw Error(ErrorCode::ConfigError, "root index out of range");
  if (static_cast<std::size_t>(clusters) > d.train.size())
    throw Error(ErrorCode::ConfigError, "more clusters than train frames");
}

CampaignConfig config_from_json(const json& doc) {
  CampaignConfig c;
  reject_unknown(doc, {"dataset", "synthetic", "strategy", "init_labeled", "batch_per_iter", "iterations",
                       "self_training", "noise", "render", "peaks", "triangulation", "roots", "analysis", "seeds",
                       "cost", "workers"},
                 "config");
  read(doc, "dataset", c.dataset, "config");
  if (doc.contains("synthetic")) read_synthetic(doc.at("synthetic"), c.synthetic);
  if (doc.contains("strategy")) {
    std::string s;
    read(doc, "strategy", s, "config");
    c.strategy = parse_strategy(s);
  }
  read(doc, "init_labeled", c.init_labeled, "config");
  read(doc, "batch_per_iter", c.batch_per_iter, "config");
  read(doc, "iterations", c.iterations, "config");
  if (doc.contains("self_training")) {
    const json& st = doc.at("self_training");
    reject_unknown(st, {"enabled", "fraction", "variant"}, "self_training");
    read(st, "enabled", c.self_training.enabled, "self_training");
    read(st, "fraction", c.self_training.fraction, "self_training");
    if (st.contains("variant")) {
      std::string v;
      read(st, "variant", v, "self_training");
      c.self_training.variant = parse_schedule(v);
    }
  }
  if (doc.contains("noise")) read_noise(doc.at("noise"), c.noise);
  if (doc.contains("render")) {
    const json& r = doc.at("render");
    reject_unknown(r, {"heatmap_width", "heatmap_height", "heatmap_sigma_px", "image_width", "image_height"}, "render");
    read(r, "heatmap_width", c.render.heatmap_width, "render");
    read(r, "heatmap_height", c.render.heatmap_height, "render");
    read(r, "heatmap_sigma_px", c.render.heatmap_sigma_px, "render");
    read(r, "image_width", c.render.image_width, "render");
    read(r, "image_height", c.render.image_height, "render");
  }
  if (doc.contains("peaks")) {
    const json& p = doc.at("peaks");
    reject_unknown(p, {"window", "min_frac", "max_peaks"}, "peaks");
    read(p, "window", c.peaks.window, "peaks");
    read(p, "min_frac", c.peaks.min_frac, "peaks");
    read(p, "max_peaks", c.peaks.max_peaks, "peaks");
  }
  if (doc.contains("triangulation")) {
    const json& t = doc.at("triangulation");
    reject_unknown(t, {"threshold_px", "mc_error", "failure_penalty"}, "triangulation");
    read(t, "threshold_px", c.triangulation.threshold_px, "triangulation");
    if (t.contains("mc_error")) {
      std::string mode;
      read(t, "mc_error", mode, "triangulation");
      if (mode == "squared")
        c.triangulation.mc_error = ConsistencyError::Squared;
      else if (mode == "euclidean")
        c.triangulation.mc_error = ConsistencyError::Euclidean;
      else
        throw Error(ErrorCode::ConfigError, "triangulation.mc_error must be squared or euclidean");
    }
    if (t.contains("failure_penalty") && !t.at("failure_penalty").is_null()) {
      double penalty = 0.0;
      read(t, "failure_penalty", penalty, "triangulation");
      c.triangulation.failure_penalty = penalty;
    }
  }
  if (doc.contains("roots")) {
    const json& r = doc.at("roots");
    reject_unknown(r, {"coreset", "cluster"}, "roots");
    read(r, "coreset", c.coreset_root, "roots");
    read(r, "cluster", c.cluster_root, "roots");
  }
  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    reject_unknown(a, {"clusters", "seed"}, "analysis");
    read(a, "clusters", c.clusters, "analysis");
    read(a, "seed", c.cluster_seed, "analysis");
  }
  read(doc, "seeds", c.seeds, "config");
  if (doc.contains("cost")) {
    const json& k = doc.at("cost");
    reject_unknown(k, {"minutes_per_frame", "hours_per_training"}, "cost");
    read(k, "minutes_per_frame", c.cost.minutes_per_frame, "cost");
    read(k, "hours_per_training", c.cost.hours_per_training, "cost");
  }
  read(doc, "workers", c.workers, "config");
  c.validate();
  return c;
}

json config_to_json(const CampaignConfig& c) {
  json doc;
  doc["dataset"] = c.dataset;
  doc["synthetic"] = synthetic_to_json(c.synthetic);
  doc["strategy"] = std::string(to_string(c.strategy));
  doc["init_labeled"] = c.init_labeled;
  doc["batch_per_iter"] = c.batch_per_iter;
  doc["iterations"] = c.iterations;
  doc["self_training"] = {{"enabled", c.self_training.enabled},
                          {"fraction", c.self_training.fraction},
                          {"variant", std::string(to_string(c.self_training.variant))}};
  doc["noise"] = {{"sigma_base_px", c.noise.sigma_base_px},
                  {"sigma_floor_px", c.noise.sigma_floor_px},
                  {"coverage_scale_mm", c.noise.coverage_scale_mm},
                  {"pool_exponent", c.noise.pool_exponent},
                  {"outlier_prob_base", c.noise.outlier_prob_base},
                  {"outlier_offset_px", c.noise.outlier_offset_px},
                  {"multi_peak_prob", c.noise.multi_peak_prob},
                  {"seed", c.noise.seed}};
  doc["render"] = {{"heatmap_width", c.render.heatmap_width},
                   {"heatmap_height", c.render.heatmap_height},
                   {"heatmap_sigma_px", c.render.heatmap_sigma_px},
                   {"image_width", c.render.image_width},
                   {"image_height", c.render.image_height}};
  doc["peaks"] = {{"window", c.peaks.window}, {"min_frac", c.peaks.min_frac}, {"max_peaks", c.peaks.max_peaks}};
  doc["triangulation"] = {
      {"threshold_px", c.triangulation.threshold_px},
      {"mc_error", c.triangulation.mc_error == ConsistencyError::Squared ? "squared" : "euclidean"},
      {"failure_penalty", c.triangulation.penalty()}};
  doc["roots"] = {{"coreset", c.coreset_root}, {"cluster", c.cluster_root}};
  doc["analysis"] = {{"clusters", c.clusters}, {"seed", c.cluster_seed}};
  doc["seeds"] = c.seeds;
  doc["cost"] = {{"minutes_per_frame", c.cost.minutes_per_frame},
                 {"hours_per_training", c.cost.hours_per_training}};
  doc["workers"] = c.workers;
  return doc;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return config_from_json(json::parse(buf.str()));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace mvpal
