#include "pasist/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "pasist/checkpoint.hpp"
#include "pasist/errors.hpp"

namespace pasist::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string summary_header(const std::vector<SkillSpec>& skills) {
  std::string h = "iteration,total_reward,task_reward,omega_sil,omega_task,buffer_entries";
  for (const auto& s : skills)
    for (const char* f : {"task_reward", "expected_dtw", "j_dtw", "epsilon", "selection_probability"})
      h += "," + std::string(f) + "_" + s.name;
  return h;
}

std::string summary_row(const MetricsRecord& r) {
  std::ostringstream row;
  row << r.iteration << ',' << num(r.total_reward) << ',' << num(r.task_reward) << ',' << num(r.omega_sil) << ','
      << num(r.omega_task) << ',' << r.buffer_entries;
  for (std::size_t m = 0; m < r.skill_task_reward.size(); ++m)
    row << ',' << num(r.skill_task_reward[m]) << ',' << num(r.expected_dtw[m]) << ',' << num(r.j_dtw[m]) << ','
        << num(r.epsilon[m]) << ',' << num(r.selection_probabilities[m]);
  return row.str();
}

ordered_json manifest(const ExperimentConfig& cfg, const fs::path& out_dir, const std::vector<std::uint64_t>& seeds) {
  ordered_json m;
  m["config_path"] = cfg.config_path.string();
  const ordered_json snapshot = cfg.to_json();
  m["config_hash"] = config_hash(snapshot);
  m["config"] = snapshot;
  m["seeds"] = seeds;
  m["out_dir"] = out_dir.string();
  m["target_poses"] = target_poses_to_json(cfg.targets);
  return m;
}

template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    log << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const InputError& e) {
    log << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFailure;
  }
}

void write_eval(const ExperimentConfig& cfg, const EvalReport& rep, const fs::path& out_dir, ordered_json extra) {
  ordered_json doc = std::move(extra);
  const ordered_json report = rep.to_json(cfg.skills);
  for (const auto& [k, v] : report.items()) doc[k] = v;
  write_json_file(out_dir / "eval_report.json", doc);
}

}  // namespace

ExperimentConfig load_config(const fs::path& path, const Overrides& o) {
  ExperimentConfig cfg = ExperimentConfig::load(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.iterations) cfg.iterations = *o.iterations;
  if (o.mode) cfg.mode = parse_mode(*o.mode);
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

TrainOutcome train_run(const ExperimentConfig& cfg, const fs::path& out_dir, std::vector<std::uint64_t> seed_list,
                       std::ostream& log, bool verbose) {
  TrainOutcome out;
  fs::create_directories(out_dir / "checkpoints");
  write_json_file(out_dir / "manifest.json", manifest(cfg, out_dir, seed_list));

  std::ofstream metrics(out_dir / "metrics.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream summary(out_dir / "summary.csv", std::ios::binary | std::ios::trunc);
  if (!metrics || !summary) throw ConfigError("cannot write outputs in " + out_dir.string());
  summary << summary_header(cfg.skills) << '\n';

  out.trainer.emplace(cfg);
  Trainer& trainer = *out.trainer;
  auto save = [&](int it) {
    write_json_file(out_dir / "checkpoints" / ("iter_" + std::to_string(it) + ".json"), trainer.checkpoint());
  };
  try {
    for (int it = 1; it <= cfg.iterations; ++it) {
      MetricsRecord rec = trainer.train_iteration();
      metrics << rec.to_json(cfg.skills).dump() << '\n';
      metrics.flush();
      summary << summary_row(rec) << '\n';
      summary.flush();
      if (verbose) {
        log << "iter " << it << " r=" << num(rec.total_reward) << " rT=" << num(rec.task_reward);
        for (std::size_t m = 0; m < cfg.skills.size(); ++m)
          log << ' ' << cfg.skills[m].name << ":dtw=" << num(rec.expected_dtw[m]) << ",J=" << num(rec.j_dtw[m]);
        log << '\n';
      }
      if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0 && it != cfg.iterations) save(it);
      out.records.push_back(std::move(rec));
    }
    save(trainer.iteration());
  } catch (const DivergenceError& e) {
    out.status = kDivergence;
    out.error = e.what();
    log << "divergence: " << e.what() << '\n';
  }
  const std::size_t window = std::min<std::size_t>(static_cast<std::size_t>(cfg.final_window), out.records.size());
  for (std::size_t i = out.records.size() - window; i < out.records.size(); ++i) {
    out.final_total_reward += out.records[i].total_reward / static_cast<double>(window);
    out.final_task_reward += out.records[i].task_reward / static_cast<double>(window);
  }
  return out;
}

int cmd_train(const fs::path& config, const Overrides& overrides, const fs::path& out_dir, std::ostream& log,
              bool verbose) {
  return guarded(log, [&] {
    const ExperimentConfig cfg = load_config(config, overrides);
    const TrainOutcome res = train_run(cfg, out_dir, {cfg.seed}, log, verbose);
    return res.status;
  });
}

std::string ablation_header(const std::vector<SkillSpec>& skills) {
  std::string h = "mode,seed,status,final_total_reward,final_task_reward,worst_j_dtw";
  for (const auto& s : skills) h += ",j_dtw_" + s.name;
  for (const auto& s : skills) h += ",eval_dtw_" + s.name;
  return h;
}

int cmd_ablate(const fs::path& config, const std::vector<std::uint64_t>& seeds, const Overrides& overrides,
               const fs::path& out_dir, std::ostream& log, bool verbose) {
  return guarded(log, [&] {
    const ExperimentConfig base = load_config(config, overrides);
    if (seeds.empty()) throw ConfigError("ablate: at least one seed is required");
    fs::create_directories(out_dir);
    {
      ExperimentConfig snapshot = base;
      write_json_file(out_dir / "manifest.json", manifest(snapshot, out_dir, seeds));
    }
    std::ofstream csv(out_dir / "ablation.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw ConfigError("cannot write " + (out_dir / "ablation.csv").string());
    csv << ablation_header(base.skills) << '\n';

    bool all_ok = true;
    for (Mode mode : kAllModes) {
      for (std::uint64_t seed : seeds) {
        ExperimentConfig cfg = base;
        cfg.mode = mode;
        cfg.seed = seed;
        const fs::path run_dir = out_dir / std::string(mode_name(mode)) / ("seed_" + std::to_string(seed));
        log << "ablate: mode=" << mode_name(mode) << " seed=" << seed << '\n';
        std::string status = "ok";
        std::ostringstream row;
        TrainOutcome res;
        std::optional<EvalReport> rep;
        try {
          res = train_run(cfg, run_dir, {seed}, log, verbose);
          if (res.status != kOk) {
            status = "diverged";
          } else {
            rep = evaluate(res.trainer->policy(), cfg, res.trainer->reference_dtw(), cfg.eval.episodes,
                           run_dir / "traces");
            write_eval(cfg, *rep, run_dir, {{"iteration", res.trainer->iteration()}});
          }
        } catch (const std::exception& e) {
          status = "error";
          log << "ablate: run failed: " << e.what() << '\n';
        }
        if (status != "ok") all_ok = false;
        const std::size_t n = cfg.skills.size();
        std::vector<std::optional<double>> jd(n);
        if (!res.records.empty()) jd = res.records.back().j_dtw;
        std::optional<double> worst;
        for (const auto& j : jd)
          if (j) worst = worst ? std::min(*worst, *j) : *j;
        // A skill without buffer entries has no J_DTW; it counts as the worst.
        if (std::any_of(jd.begin(), jd.end(), [](const auto& j) { return !j; })) worst = 0.0;
        row << mode_name(mode) << ',' << seed << ',' << status << ','
            << (res.records.empty() ? "" : num(res.final_total_reward)) << ','
            << (res.records.empty() ? "" : num(res.final_task_reward)) << ',' << num(worst);
        for (const auto& j : jd) row << ',' << num(j);
        for (std::size_t m = 0; m < n; ++m) row << ',' << (rep ? num(rep->expected_dtw[m]) : std::string());
        csv << row.str() << '\n';
        csv.flush();
      }
    }
    return all_ok ? static_cast<int>(kOk) : static_cast<int>(kFailure);
  });
}

int cmd_eval(const fs::path& config, const fs::path& checkpoint, std::optional<int> episodes, const fs::path& out_dir,
             std::ostream& log) {
  return guarded(log, [&] {
    const ExperimentConfig cfg = load_config(config, {});
    const Trainer trainer = Trainer::from_checkpoint(cfg, read_json_file(checkpoint));
    const int n_episodes = episodes.value_or(cfg.eval.episodes);
    const EvalReport rep = evaluate(trainer.policy(), cfg, trainer.reference_dtw(), n_episodes, out_dir / "traces");
    fs::create_directories(out_dir);
    write_eval(cfg, rep, out_dir,
               {{"checkpoint", checkpoint.string()}, {"iteration", trainer.iteration()}, {"episodes", n_episodes}});
    return static_cast<int>(kOk);
  });
}

int cmd_poses(const fs::path& out, int joints, double link_scale, const std::vector<std::string>& names,
              std::ostream& log) {
  return guarded(log, [&] {
    if (joints < 2 || joints % 2 != 0) throw ConfigError("poses: joints must be an even count >= 2");
    const auto defaults = default_skills();
    std::vector<TargetPose> poses;
    for (const auto& name : names) {
      const auto it = std::find_if(defaults.begin(), defaults.end(), [&](const SkillSpec& s) { return s.name == name; });
      if (it == defaults.end()) throw ConfigError("poses: unknown skill '" + name + "'");
      poses.push_back({static_cast<int>(poses.size()), name, analytic_target_pose(*it, joints, link_scale)});
    }
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_json_file(out, target_poses_to_json(poses));
    return static_cast<int>(kOk);
  });
}

ordered_json dtw_matrix_from_traces(const fs::path& trace_dir) {
  std::map<int, std::pair<std::string, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(trace_dir)) {
    if (entry.path().extension() != ".csv") continue;
    const std::string stem = entry.path().stem().string();
    const auto us = stem.find('_');
    if (us == std::string::npos || us == 0) continue;
    const std::string id = stem.substr(0, us);
    if (!std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isdigit(c); })) continue;
    files[std::stoi(id)] = {stem.substr(us + 1), entry.path()};
  }
  if (files.empty()) throw InputError("dtw-matrix: no traces in " + trace_dir.string());
  std::vector<PoseSequence> seqs;
  ordered_json names = ordered_json::array();
  for (const auto& [id, f] : files) {
    names.push_back(f.first);
    seqs.push_back(read_trace_poses(f.second));
  }
  return {{"skills", names}, {"values", dtw_matrix(seqs)}};
}

int cmd_dtw_matrix(const fs::path& trace_dir, const std::optional<fs::path>& out, std::ostream& out_stream,
                   std::ostream& log) {
  return guarded(log, [&] {
    const ordered_json m = dtw_matrix_from_traces(trace_dir);
    if (out) write_json_file(*out, m);
    else out_stream << m.dump(1) << '\n';
    return static_cast<int>(kOk);
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Adversarial self-imitation training on a kinematic legged-robot analog"};
  app.require_subcommand(1);

  fs::path config, out_dir = "runs/train", checkpoint;
  Overrides ov;
  std::uint64_t seed = 0;
  int iterations = 0, workers = 0, episodes = 0;
  std::string mode;
  std::vector<std::uint64_t> seeds{1, 2};
  bool quiet = false;

  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Root seed");
    sub->add_option("--iterations", iterations, "Training iterations");
    sub->add_option("--mode", mode, "full | il-by-tp | no-dtw | no-selector");
    sub->add_option("--workers", workers, "Rollout worker threads");
    sub->add_flag("--quiet", quiet, "No per-iteration progress lines");
  };
  auto collect_overrides = [&](CLI::App* sub) {
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--iterations")) ov.iterations = iterations;
    if (sub->count("--mode")) ov.mode = mode;
    if (sub->count("--workers")) ov.workers = workers;
  };

  auto* train = app.add_subcommand("train", "Train one run");
  train->add_option("--config", config, "Experiment TOML file")->required();
  train->add_option("--out-dir", out_dir, "Output directory");
  add_overrides(train);

  auto* ablate = app.add_subcommand("ablate", "Train every mode for each seed and compare");
  ablate->add_option("--config", config, "Experiment TOML file")->required();
  ablate->add_option("--seeds", seeds, "Seeds to sweep")->delimiter(',');
  ablate->add_option("--out-dir", out_dir, "Output directory");
  add_overrides(ablate);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--config", config, "Experiment TOML file")->required();
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes per skill");
  eval->add_option("--out-dir", out_dir, "Output directory");

  fs::path poses_out;
  int joints = 8;
  double link_scale = 0.35;
  std::vector<std::string> names{"walk", "crawl", "stilt", "bipedal"};
  auto* poses = app.add_subcommand("poses", "Write analytic target poses");
  poses->add_option("--out", poses_out, "Output JSON file")->required();
  poses->add_option("--joints", joints, "Joint count");
  poses->add_option("--link-scale", link_scale, "Link scale in metres");
  poses->add_option("--skills", names, "Skill names in id order")->delimiter(',');

  fs::path traces, matrix_out;
  auto* matrix = app.add_subcommand("dtw-matrix", "Cross-skill DTW matrix from trace CSVs");
  matrix->add_option("--traces", traces, "Directory of <id>_<name>.csv traces")->required();
  matrix->add_option("--out", matrix_out, "Output JSON file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(kConfigError);
  }

  if (train->parsed()) {
    collect_overrides(train);
    return cmd_train(config, ov, out_dir, std::cerr, !quiet);
  }
  if (ablate->parsed()) {
    collect_overrides(ablate);
    return cmd_ablate(config, seeds, ov, out_dir, std::cerr, !quiet);
  }
  if (eval->parsed()) {
    return cmd_eval(config, checkpoint, eval->count("--episodes") ? std::optional<int>(episodes) : std::nullopt,
                    out_dir, std::cerr);
  }
  if (poses->parsed()) return cmd_poses(poses_out, joints, link_scale, names, std::cerr);
  if (matrix->parsed()) {
    return cmd_dtw_matrix(traces, matrix->count("--out") ? std::optional<fs::path>(matrix_out) : std::nullopt,
                          std::cout, std::cerr);
  }
  return static_cast<int>(kFailure);
}

}  // namespace pasist::cli
