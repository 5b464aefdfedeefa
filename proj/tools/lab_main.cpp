#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xorlab/experiment.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
  return seeds;
}

void print_predicates(const nlohmann::json& predicates) {
  for (const auto& [key, value] : predicates.items()) {
    if (value.is_boolean())
      std::printf("%-24s %s\n", key.c_str(), value.get<bool>() ? "PASS" : "FAIL");
    else
      std::printf("%-24s %s\n", key.c_str(), value.dump().c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training and diagnostics lab for noisy 2-XOR cluster experiments"};
  app.require_subcommand(1);

  // --- run ---
  auto* run_cmd = app.add_subcommand("run", "Sample, train, diagnose, and write artifacts");
  std::string preset_name, config_path, out_dir, seeds_csv;
  std::vector<std::string> overrides;
  bool check_exit = false;
  int jobs = 0;
  run_cmd->add_option("--preset", preset_name, "fig1, fig2_lowdim, fig2_highdim, or theorem");
  run_cmd->add_option("--config", config_path, "JSON config (or manifest) to start from");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--seeds", seeds_csv, "comma-separated seed list");
  run_cmd->add_option("--set", overrides, "dotted-path override, e.g. train.alpha=0.2");
  run_cmd->add_option("--jobs", jobs, "max seeds run in parallel");
  run_cmd->add_flag("--check", check_exit, "exit nonzero unless the preset predicates pass");

  // --- check ---
  auto* check_cmd = app.add_subcommand("check", "Re-evaluate acceptance predicates from artifacts");
  std::string check_dir;
  check_cmd->add_option("--out", check_dir, "run directory")->required();

  // --- grid ---
  auto* grid_cmd = app.add_subcommand("grid", "Decision-boundary grid from a checkpoint (d = 2)");
  std::string checkpoint_path, bounds_csv = "-2,2,-2,2", grid_out, grid_svg;
  int res = 400;
  grid_cmd->add_option("--checkpoint", checkpoint_path, "network checkpoint file")->required();
  grid_cmd->add_option("--bounds", bounds_csv, "x0min,x0max,x1min,x1max");
  grid_cmd->add_option("--res", res, "grid resolution");
  grid_cmd->add_option("--out", grid_out, "CSV output path (default stdout)");
  grid_cmd->add_option("--svg", grid_svg, "also write an SVG rendering");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      nlohmann::json cfg_json;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config: " + config_path);
        nlohmann::json file_json;
        in >> file_json;
        if (file_json.contains("config")) file_json = file_json["config"];
        if (!preset_name.empty()) {
          cfg_json = xorlab::to_json(xorlab::preset(preset_name));
          cfg_json.merge_patch(file_json);
        } else {
          cfg_json = file_json;
        }
      } else if (!preset_name.empty()) {
        cfg_json = xorlab::to_json(xorlab::preset(preset_name));
      } else {
        throw std::runtime_error("run needs --preset or --config");
      }
      for (const std::string& ov : overrides) xorlab::apply_override(cfg_json, ov);
      xorlab::ExperimentConfig config = xorlab::config_from_json(cfg_json);
      if (!out_dir.empty()) config.outputs.dir = out_dir;
      if (!seeds_csv.empty()) config.seeds = parse_seeds(seeds_csv);
      if (jobs > 0) config.jobs = jobs;

      const xorlab::RunArtifacts artifacts = xorlab::run(config);
      std::printf("wrote %s\n", artifacts.summary_path.string().c_str());
      print_predicates(artifacts.summary["predicates"]);
      if (check_exit) return artifacts.predicates_pass ? 0 : 1;
      return 0;
    }

    if (check_cmd->parsed()) {
      nlohmann::json detail;
      const bool ok = xorlab::check(check_dir, &detail);
      print_predicates(detail);
      return ok ? 0 : 1;
    }

    if (grid_cmd->parsed()) {
      const xorlab::NetworkParams params = xorlab::load_checkpoint(checkpoint_path);
      std::vector<double> b;
      std::stringstream ss(bounds_csv);
      std::string item;
      while (std::getline(ss, item, ',')) b.push_back(std::stod(item));
      if (b.size() != 4) throw std::runtime_error("--bounds expects 4 comma-separated numbers");
      const xorlab::GridBounds bounds{b[0], b[1], b[2], b[3]};
      const xorlab::BoundaryGrid grid = xorlab::decision_boundary_grid(params, bounds, res);
      if (grid_out.empty()) {
        xorlab::write_grid_csv(grid, std::cout);
      } else {
        std::ofstream out(grid_out);
        xorlab::write_grid_csv(grid, out);
        std::printf("wrote %s\n", grid_out.c_str());
      }
      if (!grid_svg.empty()) {
        std::ofstream out(grid_svg);
        xorlab::write_boundary_svg(grid, nullptr, 0, out);
        std::printf("wrote %s\n", grid_svg.c_str());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
