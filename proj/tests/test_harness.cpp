#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mvpal/campaign.hpp"
#include "mvpal/cli.hpp"
#include "mvpal/config.hpp"
#include "mvpal/dataset.hpp"
#include "test_support.hpp"

using namespace mvpal;
using mvpal::testing::code_of;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mvpal_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal_dataset() {
  return json::parse(R"({
    "units": "mm", "num_keypoints": 1,
    "cameras": [
      {"id": 0, "intrinsics": [500,0,500, 0,500,500, 0,0,1], "rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0,0,3000]},
      {"id": 1, "intrinsics": [500,0,500, 0,500,500, 0,0,1], "rotation": [0,0,-1, 0,1,0, 1,0,0], "translation": [0,0,3000]}
    ],
    "frames": [
      {"id": 0, "keypoints": [[0, 0, 0]]},
      {"id": 1, "keypoints": [[10, 20, 30]]}
    ],
    "splits": {"train": [0], "heldout": [1]}
  })");
}

json small_config() {
  return json::parse(R"({
    "synthetic": {"clusters": 4, "frames_per_cluster": 20, "heldout_frames": 20, "num_cameras": 4},
    "init_labeled": 10, "batch_per_iter": 5, "iterations": 2, "seeds": [0, 1]
  })");
}

int cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("dataset loading") {
  const Dataset d = dataset_from_json(minimal_dataset());
  CHECK(d.cameras.size() == 2);
  CHECK(d.frames.size() == 2);
  CHECK(d.num_keypoints == 1);
  CHECK(d.frame(1).pose[0] == Point3(10, 20, 30));
  CHECK(code_of([&] { d.frame(7); }) == ErrorCode::IndexOutOfRange);

  SUBCASE("duplicate frame id") {
    json j = minimal_dataset();
    j["frames"][1]["id"] = 0;
    CHECK(code_of([&] { dataset_from_json(j); }) == ErrorCode::InvariantViolation);
  }
  SUBCASE("non-orthonormal rotation") {
    json j = minimal_dataset();
    j["cameras"][0]["rotation"] = {1, 0, 0, 0, 2, 0, 0, 0, 1};
    CHECK(code_of([&] { dataset_from_json(j); }) == ErrorCode::InvariantViolation);
  }
  SUBCASE("overlapping splits") {
    json j = minimal_dataset();
    j["splits"]["heldout"] = {0, 1};
    CHECK(code_of([&] { dataset_from_json(j); }) == ErrorCode::InvariantViolation);
  }
  SUBCASE("wrong keypoint count") {
    json j = minimal_dataset();
    j["frames"][0]["keypoints"] = {{0, 0, 0}, {1, 1, 1}};
    CHECK(code_of([&] { dataset_from_json(j); }) == ErrorCode::InvariantViolation);
  }
  SUBCASE("schema errors are parse errors") {
    json j = minimal_dataset();
    j["cameras"][0].erase("translation");
    CHECK(code_of([&] { dataset_from_json(j); }) == ErrorCode::ParseError);
  }
  SUBCASE("file round trip and malformed text") {
    TempDir tmp;
    save_dataset(d, tmp.path / "d.json");
    const Dataset back = load_dataset(tmp.path / "d.json");
    CHECK(dataset_to_json(back) == dataset_to_json(d));
    std::ofstream(tmp.path / "bad.json") << "{\n  \"units\": \"mm\",\n  oops\n}";
    try {
      load_dataset(tmp.path / "bad.json");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK(code_of([&] { load_dataset(tmp.path / "missing.json"); }) == ErrorCode::ParseError);
  }
}

TEST_CASE("synthetic generation") {
  SyntheticSpec spec;
  std::vector<int> clusters;
  const Dataset d = generate_synthetic(spec, &clusters);
  CHECK(d.train.size() == 500);
  CHECK(d.heldout.size() == 100);
  CHECK(d.cameras.size() == 8);
  CHECK(d.num_keypoints == 15);
  CHECK(dataset_to_json(generate_synthetic(spec)).dump() == dataset_to_json(d).dump());
  spec.seed = 1;
  CHECK(dataset_to_json(generate_synthetic(spec)).dump() != dataset_to_json(d).dump());

  // everything lands inside the image
  for (const auto& f : d.frames)
    for (const auto& cam : d.cameras)
      for (const auto& p : f.pose) {
        const Point2 uv = project(cam, p);
        CHECK(uv.x() >= 0.0);
        CHECK(uv.x() < 1000.0);
        CHECK(uv.y() >= 0.0);
        CHECK(uv.y() < 1000.0);
      }

  // long-tailed cluster usage
  std::vector<int> counts(10, 0);
  for (std::size_t i = 0; i < d.train.size(); ++i) ++counts[clusters[i]];
  CHECK(*std::max_element(counts.begin(), counts.end()) > 3 * *std::min_element(counts.begin(), counts.end()));

  SyntheticSpec single;
  single.clusters = 1;
  std::vector<int> one;
  generate_synthetic(single, &one);
  CHECK(std::set<int>(one.begin(), one.end()).size() == 1);
}

TEST_CASE("config") {
  const CampaignConfig c = config_from_json(small_config());
  CHECK(c.init_labeled == 10);
  CHECK(c.synthetic.clusters == 4);
  CHECK(c.self_training.target(10) == 2);
  CHECK(config_from_json(config_to_json(c)).seeds == c.seeds);
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

  json typo = small_config();
  typo["iteratons"] = 3;
  CHECK(code_of([&] { config_from_json(typo); }) == ErrorCode::ConfigError);
  json bad_strategy = small_config();
  bad_strategy["strategy"] = "entropy";
  CHECK(code_of([&] { config_from_json(bad_strategy); }) == ErrorCode::ConfigError);

  CampaignConfig over = c;
  over.iterations = 100;
  CHECK(code_of([&] { over.validate_against(resolve_dataset(c)); }) == ErrorCode::ConfigError);
  CampaignConfig zero_init = c;
  zero_init.init_labeled = 0;
  CHECK(code_of([&] { zero_init.validate(); }) == ErrorCode::ConfigError);
}

TEST_CASE("campaign") {
  const CampaignConfig base = config_from_json(small_config());
  const Dataset d = resolve_dataset(base);

  SUBCASE("zero iterations gives only the initial row") {
    CampaignConfig c = base;
    c.iterations = 0;
    const auto r = run_campaign(d, c, 0);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].labeled_count == 10);
  }
  SUBCASE("initial pool is shared across strategies") {
    const auto a = initial_labeled(d.train, 10, 5);
    CHECK(a == initial_labeled(d.train, 10, 5));
    CHECK(a != initial_labeled(d.train, 10, 6));
    CampaignConfig c = base;
    c.iterations = 0;
    c.strategy = Strategy::Mvc;
    CHECK(run_campaign(d, c, 3).records[0].selected == run_campaign(d, base, 3).records[0].selected);
  }
  SUBCASE("noise-free model has near-zero error") {
    CampaignConfig c = base;
    c.noise.sigma_base_px = c.noise.sigma_floor_px = 0.0;
    c.noise.outlier_prob_base = c.noise.multi_peak_prob = 0.0;
    c.self_training.enabled = true;
    for (const auto& row : run_campaign(d, c, 0).rows) CHECK(row.mkpe_mm < 1e-6);
  }
  SUBCASE("pool bookkeeping") {
    for (auto s : {Strategy::Rand, Strategy::Bsb, Strategy::Mpe, Strategy::CoreSet, Strategy::Mvc}) {
      CampaignConfig c = base;
      c.strategy = s;
      c.self_training.enabled = true;
      const auto r = run_campaign(d, c, 1);
      REQUIRE(r.rows.size() == 3);
      std::set<int> seen;
      for (const auto& rec : r.records)
        for (int id : rec.selected) CHECK(seen.insert(id).second);
      CHECK(seen.size() == 20);
      for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(r.rows[i].labeled_count == 10 + 5 * static_cast<int>(i));
        CHECK(r.rows[i].labeled_fraction == doctest::Approx(r.rows[i].labeled_count / 80.0));
      }
    }
  }
  SUBCASE("worker count does not change the report") {
    CampaignConfig c = base;
    c.strategy = Strategy::Bsb;
    c.self_training.enabled = true;
    std::ostringstream one, three;
    write_report_csv(one, run_campaign(d, c, 2).rows);
    c.workers = 3;
    write_report_csv(three, run_campaign(d, c, 2).rows);
    CHECK(one.str() == three.str());
  }
}

TEST_CASE("report csv and aggregate") {
  std::vector<ReportRow> a = {{0, 10, 0.1, 4.0, 1.0, 0, 0.0, 0.9, 1.0}, {1, 20, 0.2, 3.0, 1.0, 2, 0.5, 0.8, 2.0}};
  std::vector<ReportRow> b = a;
  b[0].mkpe_mm = 6.0;
  b[1].mkpe_mm = 5.0;
  b[1].entropy = 0.6;
  std::stringstream ss;
  write_report_csv(ss, a);
  const auto back = read_report_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].mkpe_mm == 3.0);
  CHECK(back[1].pseudo_count == 2);

  const auto agg = aggregate({a, b});
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].mkpe_mean == doctest::Approx(5.0));
  CHECK(agg[0].mkpe_variance == doctest::Approx(2.0));
  CHECK(agg[1].entropy_mean == doctest::Approx(0.7));
  CHECK(agg[1].entropy_variance == doctest::Approx(0.02));
  CHECK(agg[1].seeds == 2);
}

TEST_CASE("cli") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  std::ofstream(cfg) << small_config().dump(2);

  std::string err;
  CHECK(cli({"run", "--config", (tmp.path / "nope.json").string(), "--out", tmp.path.string()}, &err) ==
        kExitConfig);
  CHECK(!err.empty());
  CHECK(cli({"frobnicate"}) == kExitConfig);
  CHECK(cli({"run", "--config", cfg.string(), "--out", (tmp.path / "x").string(), "--strategy", "nope"}) ==
        kExitConfig);

  const fs::path run1 = tmp.path / "run1", run2 = tmp.path / "run2";
  REQUIRE(cli({"run", "--config", cfg.string(), "--out", run1.string(), "--strategy", "mvc"}) == kExitOk);
  REQUIRE(cli({"run", "--config", cfg.string(), "--out", run2.string(), "--strategy", "mvc", "--workers",
               "2"}) == kExitOk);
  for (const char* name : {"report_seed0.csv", "report_seed1.csv", "aggregate.csv", "selections_seed0.csv"}) {
    REQUIRE(fs::exists(run1 / name));
    CHECK(slurp(run1 / name) == slurp(run2 / name));
  }

  // the resolved config reproduces the run
  const CampaignConfig resolved = load_config(run1 / "resolved_config.json");
  CHECK(resolved.strategy == Strategy::Mvc);
  std::ostringstream again;
  write_report_csv(again, run_campaign(resolve_dataset(resolved), resolved, 1).rows);
  CHECK(again.str() == slurp(run1 / "report_seed1.csv"));

  // aggregate matches recomputation from the per-seed files
  std::vector<std::vector<ReportRow>> per_seed;
  for (int s : {0, 1}) {
    std::ifstream in(run1 / ("report_seed" + std::to_string(s) + ".csv"));
    per_seed.push_back(read_report_csv(in));
  }
  std::ostringstream agg;
  write_aggregate_csv(agg, aggregate(per_seed));
  CHECK(agg.str() == slurp(run1 / "aggregate.csv"));

  CHECK(cli({"analyze", "--run", run1.string()}) == kExitOk);
  CHECK(fs::exists(run1 / "analysis.csv"));
  CHECK(cli({"analyze", "--run", (tmp.path / "none").string()}) != kExitOk);

  CHECK(cli({"generate", "--config", cfg.string(), "--out", (tmp.path / "d.json").string()}) == kExitOk);
  CHECK(load_dataset(tmp.path / "d.json").train.size() == 80);
  CHECK(cli({"report", "--iterations", "3", "--init", "0", "--batch", "100"}) == kExitOk);
}
