#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ris/config.hpp"
#include "ris/dqn.hpp"
#include "ris/farfield.hpp"
#include "ris/objective.hpp"
#include "ris/profile.hpp"
#include "ris/search.hpp"

namespace {

using namespace ris;

OverlayPlacement parse_placement(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw std::runtime_error("expected \"cx,cy\", got: " + s);
  try {
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw std::runtime_error("expected \"cx,cy\", got: " + s);
  }
}

std::vector<OverlayPlacement> parse_placements(const std::string& s) {
  std::vector<OverlayPlacement> out;
  std::size_t begin = 0;
  while (begin <= s.size()) {
    const auto end = s.find(';', begin);
    const std::string item =
        s.substr(begin, end == std::string::npos ? std::string::npos
                                                 : end - begin);
    if (!item.empty()) out.push_back(parse_placement(item));
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  if (out.empty())
    throw std::runtime_error("expected \"cx,cy[;cx,cy...]\", got: " + s);
  return out;
}

Direction parse_direction(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw std::runtime_error("expected \"theta,phi\", got: " + s);
  try {
    return Direction(std::stod(s.substr(0, comma)),
                     std::stod(s.substr(comma + 1)));
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::runtime_error("expected \"theta,phi\", got: " + s);
  }
}

void validate_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("output missing: " + path);
  try {
    nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("output failed validation: " + path + ": " +
                             e.what());
  }
}

void validate_csv_rows(const std::string& path, std::size_t expected_rows) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("output missing: " + path);
  std::size_t rows = 0;
  bool header_seen = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  if (rows != expected_rows)
    throw std::runtime_error("output failed validation: " + path +
                             ": expected " + std::to_string(expected_rows) +
                             " data rows, found " + std::to_string(rows));
}

std::string summary_path_for(const std::string& out_path) {
  const std::filesystem::path p(out_path);
  std::filesystem::path s = p;
  s.replace_extension();
  s += ".summary.json";
  return s.string();
}

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

ScenarioConfig load_common(const CommonArgs& common) {
  ScenarioConfig cfg = common.config_path.empty()
                           ? default_config()
                           : load_config(common.config_path);
  if (common.seed) cfg.dqn.seed = *common.seed;
  return cfg;
}

int cmd_profile(const CommonArgs& common, const std::string& direction_arg,
                const std::string& out_path, bool with_continuous) {
  const ScenarioConfig cfg = load_common(common);
  const Direction d = direction_arg.empty() ? cfg.direction1
                                            : parse_direction(direction_arg);
  const ResolvedConfig resolved = resolve_config(cfg);
  const SynthesisResult synth = synthesize_profile(cfg.array, d);
  save_profile(synth.profile, out_path,
               with_continuous ? &synth.continuous : nullptr, resolved.hash);
  validate_json_file(out_path);
  std::printf("profile: %dx%d cells, %d levels -> %s\n", synth.profile.nx(),
              synth.profile.ny(), synth.profile.n_levels(), out_path.c_str());
  return 0;
}

int cmd_farfield(const CommonArgs& common, const std::string& profile_path,
                 const std::string& placement_arg, const std::string& out_path,
                 std::string summary_path) {
  if (profile_path.empty() == placement_arg.empty())
    throw std::runtime_error(
        "farfield needs exactly one of --profile or --placement");
  const ScenarioConfig cfg = load_common(common);
  BuiltScenario built = build_scenario(cfg);
  const Scenario& scenario = built.scenario;

  FarFieldPattern pattern =
      profile_path.empty()
          ? scenario.pattern_at(parse_placement(placement_arg))
          : array_factor(scenario.steering(), load_profile(profile_path));
  if (summary_path.empty()) summary_path = summary_path_for(out_path);

  write_farfield_csv(pattern, out_path, built.hash);
  const PeakGain peak = peak_gain_db(pattern);

  nlohmann::ordered_json j;
  j["config_hash"] = built.hash;
  j["source"] = profile_path.empty() ? "placement " + placement_arg
                                     : "profile " + profile_path;
  j["peak_db"] = peak.db;
  j["peak_theta_deg"] = peak.at.theta_deg;
  j["peak_phi_deg"] = peak.at.phi_deg;
  std::ofstream summary(summary_path);
  if (!summary)
    throw std::runtime_error("cannot open for writing: " + summary_path);
  summary << j.dump(2) << '\n';
  summary.close();

  validate_csv_rows(out_path, static_cast<std::size_t>(cfg.grid.cell_count()));
  validate_json_file(summary_path);
  std::printf("farfield: peak %.3f dB at (theta=%g, phi=%g) -> %s\n", peak.db,
              peak.at.theta_deg, peak.at.phi_deg, out_path.c_str());
  return 0;
}

int cmd_exhaustive(const CommonArgs& common, const std::string& out_path) {
  const ScenarioConfig cfg = load_common(common);
  BuiltScenario built = build_scenario(cfg);
  const ExhaustiveResult result = exhaustive_search(built.scenario);
  if (!out_path.empty()) {
    write_exhaustive_map(result, out_path, built.hash);
    validate_json_file(out_path);
  }
  std::printf("exhaustive: best placement (%d, %d), a_total=%d, %zu cells, "
              "%.3f s\n",
              result.best.cx, result.best.cy, result.best_a_total,
              result.map.size(), result.wall_seconds);
  return 0;
}

int cmd_random(const CommonArgs& common, int runs,
               const std::string& start_arg, const std::string& out_path) {
  const ScenarioConfig cfg = load_common(common);
  BuiltScenario built = build_scenario(cfg);
  const OverlayPlacement start =
      start_arg.empty() ? built.scenario.reference_placement()
                        : parse_placement(start_arg);
  const RandomSearchResult result = random_search(
      built.scenario, start, built.dqn.max_steps, runs, built.dqn.seed);
  if (!out_path.empty()) {
    write_random_search(result, out_path, built.hash);
    validate_json_file(out_path);
  }
  std::printf("random: %d runs x %d steps from (%d, %d), best a_total=%d at "
              "(%d, %d), %.3f s\n",
              runs, built.dqn.max_steps, start.cx, start.cy,
              result.best_a_total, result.best_placement.cx,
              result.best_placement.cy, result.wall_seconds);
  return 0;
}

int cmd_train(const CommonArgs& common, const std::string& out_dir) {
  const ScenarioConfig cfg = load_common(common);
  BuiltScenario built = build_scenario(cfg);
  std::filesystem::create_directories(out_dir);

  const TrainResult result = train(built.scenario, built.dqn);

  const std::string curve_path = out_dir + "/curve.csv";
  const std::string weights_path = out_dir + "/weights.json";
  const std::string manifest_path = out_dir + "/manifest.json";
  write_training_curve(result.episode_rewards, curve_path, built.hash);
  save_weights(result.agent.online, weights_path, built.hash);
  write_manifest(result.manifest, manifest_path);
  validate_json_file(weights_path);
  validate_json_file(manifest_path);
  validate_csv_rows(curve_path, result.episode_rewards.size());

  const std::vector<double> smoothed = smoothed_rewards(result.episode_rewards);
  std::printf("train: %d episodes, final smoothed reward %.2f, %.1f s -> %s\n",
              built.dqn.episodes, smoothed.empty() ? 0.0 : smoothed.back(),
              result.wall_seconds, out_dir.c_str());
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& weights_path,
             const std::string& starts_arg, const std::string& out_path) {
  const ScenarioConfig cfg = load_common(common);
  BuiltScenario built = build_scenario(cfg);
  DqnAgent agent(load_weights(weights_path), built.dqn);
  const std::vector<OverlayPlacement> starts =
      starts_arg.empty() ? default_eval_starts(built.scenario)
                         : parse_placements(starts_arg);
  const EvalResult result =
      evaluate(agent, built.scenario, starts, built.dqn.max_steps);
  if (!out_path.empty()) {
    write_eval_result(result, out_path, built.hash);
    validate_json_file(out_path);
  }
  int reached = 0;
  for (const auto& r : result.rollouts) {
    std::printf("eval: start (%d, %d) -> final (%d, %d), best a_total=%d, "
                "optimum %s\n",
                r.start.cx, r.start.cy, r.final_placement.cx,
                r.final_placement.cy, r.best_a_total,
                r.reached_optimum ? "reached" : "missed");
    reached += r.reached_optimum ? 1 : 0;
  }
  std::printf("eval: optimum a_total=%d reached from %d of %zu starts\n",
              result.optimum_a_total, reached, result.rollouts.size());
  return 0;
}

int cmd_bench(const CommonArgs& common, const std::string& weights_path,
              const std::string& out_path) {
  const ScenarioConfig cfg = load_common(common);
  BuiltScenario built = build_scenario(cfg);
  const Scenario& scenario = built.scenario;

  // Obtain an agent: load a checkpoint when given, otherwise train here.
  double training_seconds = 0.0;
  std::optional<DqnAgent> agent;
  if (!weights_path.empty() && std::filesystem::exists(weights_path)) {
    agent.emplace(load_weights(weights_path), built.dqn);
  } else {
    if (!weights_path.empty())
      std::printf("bench: weights file %s not found, training first\n",
                  weights_path.c_str());
    TrainResult tr = train(scenario, built.dqn);
    training_seconds = tr.wall_seconds;
    agent.emplace(std::move(tr.agent));
  }

  const OverlayPlacement start = scenario.reference_placement();

  // Each method is timed against a cold objective cache so the wall times
  // reflect the evaluations that method alone needs.
  scenario.clear_cache();
  const RandomSearchResult random_result =
      random_search(scenario, start, built.dqn.max_steps, 3, built.dqn.seed);

  scenario.clear_cache();
  const ExhaustiveResult exhaustive_result = exhaustive_search(scenario);
  const int optimum = exhaustive_result.best_a_total;

  scenario.clear_cache();
  const EvalResult eval_result = evaluate(
      *agent, scenario, default_eval_starts(scenario), built.dqn.max_steps);

  int dqn_best = 0;
  OverlayPlacement dqn_best_placement = start;
  bool dqn_reached = false;
  for (const auto& r : eval_result.rollouts) {
    if (r.best_a_total > dqn_best) {
      dqn_best = r.best_a_total;
      const auto it = std::find(r.a_totals.begin(), r.a_totals.end(),
                                r.best_a_total);
      dqn_best_placement =
          r.placements[static_cast<std::size_t>(it - r.a_totals.begin())];
    }
    dqn_reached = dqn_reached || r.reached_optimum;
  }

  // Peak directivity shift: best found placement vs the centered reference.
  const PeakGain peak_ref =
      peak_gain_db(scenario.pattern_at(scenario.reference_placement()));
  const PeakGain peak_opt = peak_gain_db(scenario.pattern_at(
      dqn_reached ? dqn_best_placement : exhaustive_result.best));
  const double improvement_db = peak_opt.db - peak_ref.db;

  std::printf("%-12s %12s %12s %s\n", "method", "best_a_total",
              "wall_seconds", "optimum");
  std::printf("%-12s %12d %12.4f %s\n", "random", random_result.best_a_total,
              random_result.wall_seconds,
              random_result.best_a_total == optimum ? "reached" : "missed");
  std::printf("%-12s %12d %12.4f %s\n", "exhaustive", optimum,
              exhaustive_result.wall_seconds, "reached");
  std::printf("%-12s %12d %12.4f %s\n", "dqn", dqn_best,
              eval_result.wall_seconds, dqn_reached ? "reached" : "missed");
  if (training_seconds > 0.0)
    std::printf("training took %.1f s (excluded from the dqn row)\n",
                training_seconds);
  std::printf("peak gain at best placement: %.3f dB vs centered %.3f dB -> "
              "improvement %.3f dB (reference comparison: 1.2 dB)\n",
              peak_opt.db, peak_ref.db, improvement_db);

  if (!out_path.empty()) {
    nlohmann::ordered_json j;
    j["config_hash"] = built.hash;
    j["rows"] = nlohmann::ordered_json::array(
        {{{"method", "random"},
          {"best_a_total", random_result.best_a_total},
          {"wall_seconds", random_result.wall_seconds},
          {"reached_optimum", random_result.best_a_total == optimum}},
         {{"method", "exhaustive"},
          {"best_a_total", optimum},
          {"wall_seconds", exhaustive_result.wall_seconds},
          {"reached_optimum", true}},
         {{"method", "dqn"},
          {"best_a_total", dqn_best},
          {"wall_seconds", eval_result.wall_seconds},
          {"reached_optimum", dqn_reached}}});
    j["training_seconds"] = training_seconds;
    j["peak_db_best"] = peak_opt.db;
    j["peak_db_centered"] = peak_ref.db;
    j["peak_improvement_db"] = improvement_db;
    j["peak_improvement_reference_db"] = 1.2;
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << j.dump(2) << '\n';
    out.close();
    validate_json_file(out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-beam reflectarray overlay-placement optimizer"};
  app.require_subcommand(1);

  CommonArgs common;
  std::uint64_t seed_value = 0;
  app.add_option("--config", common.config_path,
                 "JSON scenario config (defaults apply when omitted)");
  auto* seed_opt =
      app.add_option("--seed", seed_value, "Override the config seed");

  auto* profile = app.add_subcommand(
      "profile", "Synthesize a steered phase profile and save it as JSON");
  std::string direction_arg, profile_out;
  bool with_continuous = false;
  profile->add_option("--direction", direction_arg,
                      "Target direction \"theta,phi\" in degrees "
                      "(default: direction1)");
  profile->add_option("--out", profile_out, "Output JSON path")->required();
  profile->add_flag("--continuous", with_continuous,
                    "Also store the pre-quantization phases");

  auto* farfield = app.add_subcommand(
      "farfield", "Evaluate a far-field pattern and write CSV + summary");
  std::string ff_profile, ff_placement, ff_out, ff_summary;
  farfield->add_option("--profile", ff_profile, "Stored profile JSON");
  farfield->add_option("--placement", ff_placement,
                       "Overlay placement \"cx,cy\"");
  farfield->add_option("--out", ff_out, "Output CSV path")->required();
  farfield->add_option("--summary", ff_summary,
                       "Summary JSON path (default: <out>.summary.json)");

  auto* exhaustive = app.add_subcommand(
      "exhaustive", "Score every window placement and report the best");
  std::string ex_out;
  exhaustive->add_option("--out", ex_out, "Map JSON path");

  auto* random = app.add_subcommand(
      "random", "Seeded random-walk baseline over the window");
  int rd_runs = 3;
  std::string rd_start, rd_out;
  random->add_option("--runs", rd_runs, "Number of walks (default 3)");
  random->add_option("--start", rd_start,
                     "Start placement \"cx,cy\" (default: centered)");
  random->add_option("--out", rd_out, "Trajectories JSON path");

  auto* train_cmd = app.add_subcommand(
      "train", "Train the placement policy; writes curve/weights/manifest");
  std::string tr_out_dir;
  train_cmd->add_option("--out-dir", tr_out_dir, "Output directory")
      ->required();

  auto* eval_cmd = app.add_subcommand(
      "eval", "Greedy rollouts from given starts using saved weights");
  std::string ev_weights, ev_starts, ev_out;
  eval_cmd->add_option("--weights", ev_weights, "Weights JSON path")
      ->required();
  eval_cmd->add_option("--starts", ev_starts,
                       "Starts \"cx,cy[;cx,cy...]\" (default: centered trio)");
  eval_cmd->add_option("--out", ev_out, "Trajectories JSON path");

  auto* bench = app.add_subcommand(
      "bench", "Compare random, exhaustive, and trained-policy search");
  std::string bn_weights, bn_out;
  bench->add_option("--weights", bn_weights,
                    "Weights JSON path (trains when absent)");
  bench->add_option("--out", bn_out, "Report JSON path");

  CLI11_PARSE(app, argc, argv);
  if (!seed_opt->empty()) common.seed = seed_value;

  try {
    if (profile->parsed())
      return cmd_profile(common, direction_arg, profile_out, with_continuous);
    if (farfield->parsed())
      return cmd_farfield(common, ff_profile, ff_placement, ff_out,
                          ff_summary);
    if (exhaustive->parsed()) return cmd_exhaustive(common, ex_out);
    if (random->parsed()) return cmd_random(common, rd_runs, rd_start, rd_out);
    if (train_cmd->parsed()) return cmd_train(common, tr_out_dir);
    if (eval_cmd->parsed()) return cmd_eval(common, ev_weights, ev_starts,
                                            ev_out);
    if (bench->parsed()) return cmd_bench(common, bn_weights, bn_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand given\n";
  return 1;
}
