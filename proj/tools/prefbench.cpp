#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "prefbench/experiment.hpp"

using namespace prefbench;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> patience;
  std::optional<std::string> out;
  std::vector<std::string> models;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "override the master seed");
  cmd->add_option("--epochs", o.epochs, "override train.epochs");
  cmd->add_option("--lr", o.lr, "override train.learning_rate");
  cmd->add_option("--patience", o.patience, "override train.patience");
  cmd->add_option("--out", o.out, "override output_dir");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.lr) cfg.train.learning_rate = *o.lr;
  if (o.patience) cfg.train.patience = *o.patience;
  if (o.out) cfg.output_dir = *o.out;
  if (!o.models.empty()) {
    cfg.models.clear();
    for (const auto& m : o.models) {
      const auto k = models::parse_model_kind(m);
      if (!k) throw ExperimentError("--models: unknown model '" + m + "' (GNN, CNN2D, CNN1D, MLP)");
      cfg.models.push_back(*k);
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prefbench: spatial-preference generalizability benchmark"};
  app.require_subcommand(1);

  Overrides sim_o, loocv_o;
  auto* sim = app.add_subcommand("simulate", "simulate choice events and write one dataset per layout");
  add_common(sim, sim_o);

  int jobs = 1;
  bool quiet = false;
  JobOptions job_opts;
  auto* loocv = app.add_subcommand("loocv", "leave-one-layout-out training of every model, fold and agent");
  add_common(loocv, loocv_o);
  loocv->add_option("--jobs", jobs, "concurrent training runs")->check(CLI::PositiveNumber);
  loocv->add_option("--models", loocv_o.models, "subset of GNN CNN2D CNN1D MLP");
  loocv->add_flag("--quiet", quiet, "no per-run progress on stderr");
  loocv->add_flag("--test-equals-val", job_opts.test_equals_val,
                  "diagnostic: score each run on its validation split (GS must come out 1)");

  std::string run_dir;
  auto* report = app.add_subcommand("report", "summarize a finished run directory");
  report->add_option("dir", run_dir, "run directory")->required();

  auto* describe = app.add_subcommand("describe", "print the four architectures and their parameter counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const auto cfg = resolve(sim_o);
      const auto s = simulate(cfg);
      std::size_t total = 0;
      for (auto [id, n] : s.samples_per_layout) {
        std::printf("layout %d: %zu samples -> %s\n", id, n, dataset_path(cfg, id).string().c_str());
        total += n;
      }
      std::printf("%zu samples in total\n", total);
    } else if (*loocv) {
      const auto cfg = resolve(loocv_o);
      const auto store = load_store(cfg);
      const auto res = run_loocv(cfg, store, jobs, job_opts, !quiet);
      write_loocv_outputs(cfg.output_dir, cfg, res);
      std::cout << render_report(cfg.output_dir);
    } else if (*report) {
      std::cout << render_report(run_dir);
    } else if (*describe) {
      for (auto k : models::kModelKinds) std::cout << models::describe(models::build(k)) << '\n';
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
