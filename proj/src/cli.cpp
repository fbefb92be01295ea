#include "mvpal/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mvpal/campaign.hpp"
#include "mvpal/error.hpp"
#include "mvpal/self_training.hpp"

namespace mvpal {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    try {
      seeds.push_back(std::stoull(item, &used));
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorCode::ConfigError, "invalid seed '" + item + "'");
  }
  if (seeds.empty()) throw Error(ErrorCode::ConfigError, "empty seed list");
  return seeds;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvariantViolation, "cannot write " + path.string());
  f << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

CampaignConfig config_or_default(const std::string& path) {
  return path.empty() ? CampaignConfig{} : load_config(path);
}

int cmd_generate(const std::string& config_path, const std::string& seeds, const std::string& out_path,
                 std::ostream& out) {
  CampaignConfig cfg = config_or_default(config_path);
  if (!seeds.empty()) cfg.synthetic.seed = parse_seeds(seeds).front();
  const Dataset d = generate_synthetic(cfg.synthetic);
  save_dataset(d, out_path);
  out << "wrote " << d.frames.size() << " frames (" << d.train.size() << " train, " << d.heldout.size()
      << " held-out), " << d.cameras.size() << " cameras to " << out_path << '\n';
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& seeds, const std::string& out_dir,
            const std::string& strategy, int workers, std::ostream& out, std::ostream& err) {
  CampaignConfig cfg = load_config(config_path);
  if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
  if (!strategy.empty()) cfg.strategy = parse_strategy(strategy);
  if (workers > 0) cfg.workers = workers;
  cfg.validate();
  const Dataset dataset = resolve_dataset(cfg);
  cfg.validate_against(dataset);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "resolved_config.json", config_to_json(cfg).dump(2) + "\n");

  std::vector<std::vector<ReportRow>> reports;
  for (std::uint64_t seed : cfg.seeds) {
    const CampaignResult r = run_campaign(dataset, cfg, seed);
    std::ostringstream report, selections;
    write_report_csv(report, r.rows);
    write_selections_csv(selections, r.records);
    write_file(fs::path(out_dir) / ("report_seed" + std::to_string(seed) + ".csv"), report.str());
    write_file(fs::path(out_dir) / ("selections_seed" + std::to_string(seed) + ".csv"), selections.str());
    // Aggregate what was written, so the summary matches the per-seed files.
    std::istringstream written(report.str());
    reports.push_back(read_report_csv(written));
    err << "seed " << seed << ": final MKPE " << format_number(r.rows.back().mkpe_mm) << " mm, "
        << format_number(r.wall_seconds) << " s\n";
  }
  std::ostringstream agg;
  write_aggregate_csv(agg, aggregate(reports));
  write_file(fs::path(out_dir) / "aggregate.csv", agg.str());
  out << agg.str();
  return kExitOk;
}

// Rebuilds per-iteration cluster histograms and pseudo-label drift from a
// run directory's selection logs.
int cmd_analyze(const std::string& run_dir, std::ostream& out) {
  const CampaignConfig cfg = config_from_json(nlohmann::json::parse(read_file(fs::path(run_dir) / "resolved_config.json")));
  std::ostringstream table;
  table << "seed,iteration,selected,entropy,histogram,pseudo_count,drift_mean_mm,drift_median_mm,drift_max_mm\n";
  for (std::uint64_t seed : cfg.seeds) {
    std::stringstream sel(read_file(fs::path(run_dir) / ("selections_seed" + std::to_string(seed) + ".csv")));
    std::string line;
    std::getline(sel, line);
    std::map<int, std::vector<int>> counts;
    std::map<int, std::vector<double>> drift;
    while (std::getline(sel, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      cells.resize(7);
      const int iteration = std::stoi(cells[0]);
      auto& hist = counts[iteration];
      hist.resize(static_cast<std::size_t>(cfg.clusters), 0);
      if (cells[1] == "labeled") {
        const int c = std::stoi(cells[3]);
        if (c < 0 || c >= cfg.clusters) throw Error(ErrorCode::ParseError, "cluster id out of range in " + line);
        ++hist[static_cast<std::size_t>(c)];
      } else if (cells[1] == "pseudo") {
        drift[iteration].push_back(std::stod(cells[6]));
      } else {
        throw Error(ErrorCode::ParseError, "unknown selection kind in " + line);
      }
    }
    for (const auto& [iteration, hist] : counts) {
      int total = 0;
      std::string h;
      for (int c : hist) {
        total += c;
        h += (h.empty() ? "" : ";") + std::to_string(c);
      }
      const auto& errors = drift[iteration];
      // drift_stats works on poses; the per-frame errors are already MKPEs,
      // so feed them as 1-keypoint poses against the origin.
      std::vector<Pose3D> pseudo, truth;
      for (double e : errors) {
        pseudo.push_back({Point3(e, 0, 0)});
        truth.push_back({Point3::Zero()});
      }
      const DriftSummary ds = drift_stats(pseudo, truth);
      table << seed << ',' << iteration << ',' << total << ',' << format_number(total ? cluster_entropy(hist) : 0.0)
            << ',' << h << ',' << ds.count << ',' << format_number(ds.mean_mm) << ','
            << format_number(ds.median_mm) << ',' << format_number(ds.max_mm) << '\n';
    }
  }
  write_file(fs::path(run_dir) / "analysis.csv", table.str());
  out << table.str();
  return kExitOk;
}

int cmd_report(const std::string& config_path, int iterations, int init, int batch, std::ostream& out) {
  const CampaignConfig cfg = config_or_default(config_path);
  if (iterations < 0) iterations = cfg.iterations;
  if (init < 0) init = cfg.init_labeled;
  if (batch < 0) batch = cfg.batch_per_iter;
  out << "iteration,frames_labeled,active_learning_hours,conventional_hours\n";
  for (int it = 0; it <= iterations; ++it) {
    const int frames = init + it * batch;
    const CostReport c = cost_report(it, frames, cfg.cost);
    out << it << ',' << frames << ',' << format_number(c.active_learning_hours) << ','
        << format_number(c.conventional_hours) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view pose active-learning simulator"};
  app.require_subcommand(1);

  std::string config_path, seeds, out_path, strategy, run_dir;
  int workers = 0, iterations = -1, init = -1, batch = -1;

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("--config", config_path, "Campaign config whose synthetic section is used");
  gen->add_option("--seed", seeds, "Generator seed (first of a comma list)");
  gen->add_option("--out", out_path, "Output dataset file")->required();

  auto* run = app.add_subcommand("run", "Run an annotation campaign for one or more seeds");
  run->add_option("--config", config_path, "Campaign config (JSON)")->required();
  run->add_option("--seed", seeds, "Comma-separated seeds, overrides the config");
  run->add_option("--out", out_path, "Run directory")->required();
  run->add_option("--strategy", strategy, "rand | bsb | mpe | coreset | mvc");
  run->add_option("--workers", workers, "Worker threads");

  auto* analyze = app.add_subcommand("analyze", "Cluster entropy and pseudo-label drift of a run");
  analyze->add_option("--run", run_dir, "Run directory written by `run`")->required();

  auto* report = app.add_subcommand("report", "Annotation turn-around table");
  report->add_option("--config", config_path, "Campaign config for the cost model and schedule");
  report->add_option("--iterations", iterations, "AL iterations");
  report->add_option("--init", init, "Initially labeled frames");
  report->add_option("--batch", batch, "Frames per iteration");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(config_path, seeds, out_path, out);
    if (*run) return cmd_run(config_path, seeds, out_path, strategy, workers, out, err);
    if (*analyze) return cmd_analyze(run_dir, out);
    if (*report) return cmd_report(config_path, iterations, init, batch, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::ParseError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace mvpal
