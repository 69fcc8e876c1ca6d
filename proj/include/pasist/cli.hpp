#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pasist/config.hpp"
#include "pasist/orchestrator.hpp"

namespace pasist::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDivergence = 3,
  kInputError = 4,
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<std::string> mode;
  std::optional<int> workers;
};

// Loads the file, applies overrides and re-validates.
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides);

struct TrainOutcome {
  int status = kOk;
  std::string error;
  std::vector<MetricsRecord> records;
  std::optional<Trainer> trainer;
  double final_total_reward = 0.0;  // mean over the last final_window records
  double final_task_reward = 0.0;
};

// Trains into out_dir: manifest.json, metrics.jsonl, summary.csv and
// checkpoints/iter_N.json (every checkpoint_every iterations and at the end).
TrainOutcome train_run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                       std::vector<std::uint64_t> seed_list, std::ostream& log, bool verbose);

int cmd_train(const std::filesystem::path& config, const Overrides& overrides, const std::filesystem::path& out_dir,
              std::ostream& log, bool verbose = true);

// Header of the ablation comparison CSV for the given skills.
std::string ablation_header(const std::vector<SkillSpec>& skills);

int cmd_ablate(const std::filesystem::path& config, const std::vector<std::uint64_t>& seeds,
               const Overrides& overrides, const std::filesystem::path& out_dir, std::ostream& log,
               bool verbose = true);

int cmd_eval(const std::filesystem::path& config, const std::filesystem::path& checkpoint,
             std::optional<int> episodes, const std::filesystem::path& out_dir, std::ostream& log);

int cmd_poses(const std::filesystem::path& out, int joints, double link_scale, const std::vector<std::string>& names,
              std::ostream& log);

// Recomputes the cross-skill matrix from "<id>_<name>.csv" traces.
nlohmann::ordered_json dtw_matrix_from_traces(const std::filesystem::path& trace_dir);
int cmd_dtw_matrix(const std::filesystem::path& trace_dir, const std::optional<std::filesystem::path>& out,
                   std::ostream& out_stream, std::ostream& log);

// Full command-line entry point.
int run(int argc, char** argv);

}  // namespace pasist::cli
