#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "prefbench/agentsim.hpp"
#include "prefbench/dataset.hpp"
#include "prefbench/metrics.hpp"
#include "prefbench/models.hpp"

namespace prefbench {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::vector<std::filesystem::path> layouts;  // resolved against the config file's directory
  std::vector<AgentProfile> profiles;
  ScheduleParams schedule{};
  nn::TrainConfig train{};
  double val_fraction = 0.2;
  double tau = 0.1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/canonical";
  EnvParams env{};
  HeightDefaults heights{};
  std::vector<models::ModelKind> models{models::kModelKinds.begin(), models::kModelKinds.end()};

  /// Canonical shape: 4 layouts, 3 profiles, existing files, sane values.
  void validate(bool canonical = true) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

std::filesystem::path dataset_path(const ExperimentConfig& cfg, int layout_id);

struct SimulationSummary {
  std::vector<std::pair<int, std::size_t>> samples_per_layout;  // (layout id, count)
};

/// Simulates every layout and writes <output_dir>/data/layout_<id>.jsonl.
SimulationSummary simulate(const ExperimentConfig& cfg);

/// Pooled identity samples of every configured layout, read back from disk.
std::vector<Sample> load_store(const ExperimentConfig& cfg);

enum class RunStatus { Finished, Diverged };

struct RunOutcome {
  models::ModelKind model = models::ModelKind::GNN;
  int fold = 0;
  int test_layout = 0;
  std::string agent;
  RunStatus status = RunStatus::Finished;
  std::string error;
  nn::TrainResult result;
  RunScore score;
  double seconds = 0.0;
};

struct JobOptions {
  /// Evaluate the validation split in place of the held-out layout.
  bool test_equals_val = false;
};

/// One (model, fold, agent) training run on its own seeded streams.
RunOutcome run_job(std::span<const Sample> store, const Fold& fold, models::ModelKind model,
                   const std::string& agent, const ExperimentConfig& cfg, const JobOptions& opts = {});

struct LoocvResult {
  std::vector<RunOutcome> runs;  // in (model, fold, agent) order
  GsSummary summary;
};

/// All runs of the configured models; `jobs` > 1 trains runs concurrently.
LoocvResult run_loocv(const ExperimentConfig& cfg, std::span<const Sample> store, int jobs,
                      const JobOptions& opts = {}, bool verbose = false);

/// Writes results.csv, gs_summary.csv, gs_detail.csv, curves_<model>.csv/.svg,
/// models.txt and config.json under `dir`.
void write_loocv_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const LoocvResult& res);

/// Text summary of a run directory: GS table, gap markers, hierarchy flags.
std::string render_report(const std::filesystem::path& dir);

}  // namespace prefbench
