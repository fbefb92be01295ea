#include "mvpal/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>

#include "mvpal/counter_rng.hpp"
#include "mvpal/error.hpp"

namespace mvpal {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorCode::ParseError, where + ": missing field '" + key + "'");
  return obj.at(key);
}

std::vector<double> numbers(const json& arr, std::size_t expected, const std::string& where) {
  if (!arr.is_array() || arr.size() != expected)
    throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(expected) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < expected; ++i) {
    if (!arr[i].is_number()) throw Error(ErrorCode::ParseError, where + "[" + std::to_string(i) + "]: not a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, where + ": expected an integer");
  return v.get<int>();
}

std::vector<int> id_list(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw Error(ErrorCode::ParseError, where + ": expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(integer(arr[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Panoptic-style 15-joint skeleton, mm, z up, waist (index 2) at the origin.
const std::array<Point3, 15> kSkeleton = {
    Point3(0, 0, 500),     Point3(40, 0, 640),    Point3(0, 0, 0),       Point3(0, 180, 480),
    Point3(0, 200, 200),   Point3(0, 210, -50),   Point3(0, 100, -20),   Point3(0, 110, -450),
    Point3(0, 110, -880),  Point3(0, -180, 480),  Point3(0, -200, 200),  Point3(0, -210, -50),
    Point3(0, -100, -20),  Point3(0, -110, -450), Point3(0, -110, -880),
};

}  // namespace

void Dataset::validate() const {
  if (cameras.size() < 2) throw Error(ErrorCode::InvariantViolation, "need at least 2 cameras");
  std::set<int> camera_ids;
  for (const auto& c : cameras)
    if (!camera_ids.insert(c.id()).second)
      throw Error(ErrorCode::InvariantViolation, "duplicate camera id " + std::to_string(c.id()));
  std::set<int> ids;
  for (const auto& f : frames) {
    if (!ids.insert(f.id).second) throw Error(ErrorCode::InvariantViolation, "duplicate frame id " + std::to_string(f.id));
    if (static_cast<int>(f.pose.size()) != num_keypoints)
      throw Error(ErrorCode::InvariantViolation, "frame " + std::to_string(f.id) + " has " +
                                                     std::to_string(f.pose.size()) + " keypoints, expected " +
                                                     std::to_string(num_keypoints));
    for (const auto& p : f.pose)
      if (!p.allFinite()) throw Error(ErrorCode::InvariantViolation, "frame " + std::to_string(f.id) + " is not finite");
  }
  std::set<int> seen;
  for (const auto* split : {&train, &heldout})
    for (int id : *split) {
      if (!ids.count(id)) throw Error(ErrorCode::InvariantViolation, "split references unknown frame " + std::to_string(id));
      if (!seen.insert(id).second)
        throw Error(ErrorCode::InvariantViolation, "frame " + std::to_string(id) + " appears in more than one split slot");
    }
}

const Frame& Dataset::frame(int id) const {
  // Frames are usually stored in id order; fall back to a scan otherwise.
  if (id >= 0 && static_cast<std::size_t>(id) < frames.size() && frames[static_cast<std::size_t>(id)].id == id)
    return frames[static_cast<std::size_t>(id)];
  for (const auto& f : frames)
    if (f.id == id) return f;
  throw Error(ErrorCode::IndexOutOfRange, "unknown frame id " + std::to_string(id));
}

Dataset dataset_from_json(const json& doc) {
  Dataset d;
  d.num_keypoints = integer(field(doc, "num_keypoints", "dataset"), "num_keypoints");
  const json& cams = field(doc, "cameras", "dataset");
  if (!cams.is_array()) throw Error(ErrorCode::ParseError, "cameras: expected an array");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const std::string where = "cameras[" + std::to_string(i) + "]";
    const int id = integer(field(cams[i], "id", where), where + ".id");
    const auto k = numbers(field(cams[i], "intrinsics", where), 9, where + ".intrinsics");
    const auto r = numbers(field(cams[i], "rotation", where), 9, where + ".rotation");
    const auto t = numbers(field(cams[i], "translation", where), 3, where + ".translation");
    d.cameras.push_back(CameraParams::create(id, Eigen::Matrix<double, 3, 3, Eigen::RowMajor>(k.data()),
                                             Eigen::Matrix<double, 3, 3, Eigen::RowMajor>(r.data()),
                                             Eigen::Vector3d(t[0], t[1], t[2])));
  }
  const json& frames = field(doc, "frames", "dataset");
  if (!frames.is_array()) throw Error(ErrorCode::ParseError, "frames: expected an array");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "frames[" + std::to_string(i) + "]";
    Frame f;
    f.id = integer(field(frames[i], "id", where), where + ".id");
    const json& kps = field(frames[i], "keypoints", where);
    if (!kps.is_array()) throw Error(ErrorCode::ParseError, where + ".keypoints: expected an array");
    for (std::size_t k = 0; k < kps.size(); ++k) {
      const auto p = numbers(kps[k], 3, where + ".keypoints[" + std::to_string(k) + "]");
      f.pose.emplace_back(p[0], p[1], p[2]);
    }
    d.frames.push_back(std::move(f));
  }
  const json& splits = field(doc, "splits", "dataset");
  d.train = id_list(field(splits, "train", "splits"), "splits.train");
  d.heldout = id_list(field(splits, "heldout", "splits"), "splits.heldout");
  d.validate();
  return d;
}

json dataset_to_json(const Dataset& dataset) {
  json doc;
  doc["units"] = "mm";
  doc["num_keypoints"] = dataset.num_keypoints;
  doc["cameras"] = json::array();
  for (const auto& c : dataset.cameras) {
    json cam;
    cam["id"] = c.id();
    std::vector<double> k, r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        k.push_back(c.intrinsics()(i, j));
        r.push_back(c.rotation()(i, j));
      }
    cam["intrinsics"] = k;
    cam["rotation"] = r;
    cam["translation"] = {c.translation().x(), c.translation().y(), c.translation().z()};
    doc["cameras"].push_back(cam);
  }
  doc["frames"] = json::array();
  for (const auto& f : dataset.frames) {
    json kps = json::array();
    for (const auto& p : f.pose) kps.push_back({p.x(), p.y(), p.z()});
    doc["frames"].push_back({{"id", f.id}, {"keypoints", kps}});
  }
  doc["splits"] = {{"train", dataset.train}, {"heldout", dataset.heldout}};
  return doc;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open dataset " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
  return dataset_from_json(doc);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write dataset " + path.string());
  out << dataset_to_json(dataset).dump(1) << '\n';
}

void SyntheticSpec::validate() const {
  if (clusters < 1 || frames_per_cluster < 1 || heldout_frames < 0)
    throw Error(ErrorCode::ConfigError, "synthetic: cluster and frame counts must be positive");
  if (num_cameras < 2) throw Error(ErrorCode::ConfigError, "synthetic: need at least 2 cameras");
  if (!(ring_radius_mm > 0.0) || !(focal_px > 0.0) || !(image_width > 0.0) || !(image_height > 0.0) ||
      !(pose_scale > 0.0))
    throw Error(ErrorCode::ConfigError, "synthetic: geometry parameters must be positive");
  if (cluster_spread_mm < 0.0 || within_cluster_mm < 0.0 || root_jitter_mm < 0.0 || zipf_exponent < 0.0)
    throw Error(ErrorCode::ConfigError, "synthetic: spreads and exponents must be non-negative");
}

CameraParams ring_camera(int id, double angle_rad, double radius_mm, double focal_px, double cx, double cy) {
  const Eigen::Vector3d center(radius_mm * std::cos(angle_rad), radius_mm * std::sin(angle_rad), 0.0);
  const Eigen::Vector3d forward = -center.normalized();
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  const Eigen::Vector3d right = down.cross(forward);
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  Eigen::Matrix3d k;
  k << focal_px, 0.0, cx, 0.0, focal_px, cy, 0.0, 0.0, 1.0;
  return CameraParams::create(id, k, r, -r * center);
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::vector<int>* cluster_of) {
  spec.validate();
  Dataset d;
  d.num_keypoints = static_cast<int>(kSkeleton.size());
  for (int c = 0; c < spec.num_cameras; ++c)
    d.cameras.push_back(ring_camera(c, 2.0 * std::numbers::pi * c / spec.num_cameras, spec.ring_radius_mm,
                                    spec.focal_px, spec.image_width / 2.0, spec.image_height / 2.0));

  // Cluster prototypes: perturbed skeleton under a per-cluster heading.
  std::vector<Pose3D> prototypes;
  for (int c = 0; c < spec.clusters; ++c) {
    CounterRng rng{spec.seed, 0x70726f746fULL, static_cast<std::uint64_t>(c)};
    const double yaw = 2.0 * std::numbers::pi * rng.uniform();
    const Eigen::Matrix3d heading = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    Pose3D proto;
    for (std::size_t k = 0; k < kSkeleton.size(); ++k) {
      Point3 p = spec.pose_scale * kSkeleton[k];
      if (k != 2) p += spec.cluster_spread_mm * Point3(rng.normal(), rng.normal(), rng.normal());
      proto.push_back(heading * p);
    }
    prototypes.push_back(std::move(proto));
  }

  // Long-tailed mixture weights: w_c proportional to 1 / (c + 1)^s.
  std::vector<double> cumulative;
  double total = 0.0;
  for (int c = 0; c < spec.clusters; ++c) {
    total += 1.0 / std::pow(c + 1.0, spec.zipf_exponent);
    cumulative.push_back(total);
  }

  const int train_count = spec.clusters * spec.frames_per_cluster;
  const int frame_count = train_count + spec.heldout_frames;
  for (int id = 0; id < frame_count; ++id) {
    CounterRng rng{spec.seed, 0x6672616d65ULL, static_cast<std::uint64_t>(id)};
    const double u = rng.uniform() * total;
    const int cluster = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const int c = std::min(cluster, spec.clusters - 1);
    const Point3 offset(spec.root_jitter_mm * (2.0 * rng.uniform() - 1.0),
                        spec.root_jitter_mm * (2.0 * rng.uniform() - 1.0), 0.0);
    Frame f;
    f.id = id;
    for (const auto& p : prototypes[static_cast<std::size_t>(c)])
      f.pose.push_back(p + offset + spec.within_cluster_mm * Point3(rng.normal(), rng.normal(), rng.normal()));
    d.frames.push_back(std::move(f));
    (id < train_count ? d.train : d.heldout).push_back(id);
    if (cluster_of) cluster_of->push_back(c);
  }
  d.validate();
  return d;
}

}  // namespace mvpal
