#include <fstream>
#include <set>
#include <unistd.h>

#include "doctest.h"
#include "store.hpp"

using namespace prefbench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path canonical_path() { return testing::source_dir() / "configs" / "canonical.json"; }

json canonical_json() {
  std::ifstream in(canonical_path());
  return json::parse(in);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("prefbench_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string error_of(const json& j) {
  try {
    config_from_json(j, canonical_path().parent_path()).validate();
  } catch (const ExperimentError& e) {
    return e.what();
  }
  return "";
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("canonical config loads") {
  const auto cfg = load_config(canonical_path());
  CHECK(cfg.layouts.size() == 4);
  CHECK(cfg.profiles.size() == 3);
  CHECK(cfg.seed == 7);
  CHECK(cfg.train.epochs == 100);
  CHECK(cfg.train.batch_size == 16);
  CHECK(cfg.train.pos_weight_mode == nn::PosWeightMode::Auto);
  CHECK(cfg.models.size() == 4);
  for (const auto& p : cfg.layouts) CHECK(fs::exists(p));
  // round trip through to_json
  const auto again = config_from_json(to_json(cfg), "/");
  CHECK(again.seed == cfg.seed);
  CHECK(again.layouts == cfg.layouts);
  CHECK(again.profiles.size() == 3);
}

TEST_CASE("config errors name what is wrong") {
  json j = canonical_json();
  j["layouts"][2] = "../data/layouts/nowhere.json";
  const auto e1 = error_of(j);
  CHECK(e1.find("nowhere.json") != std::string::npos);

  j = canonical_json();
  j["surprise"] = 1;
  CHECK(error_of(j).find("surprise") != std::string::npos);

  j = canonical_json();
  j["profiles"][1]["activity_mix"]["Swim"] = 0.1;
  CHECK(error_of(j).find("Swim") != std::string::npos);

  j = canonical_json();
  j["profiles"].erase(2);
  CHECK(error_of(j).find("3 profiles") != std::string::npos);

  j = canonical_json();
  j["profiles"][2]["id"] = "A";
  CHECK(error_of(j).find("duplicate") != std::string::npos);

  j = canonical_json();
  j["train"]["pos_weight"] = "heavy";
  CHECK(error_of(j).find("pos_weight") != std::string::npos);

  j = canonical_json();
  j["val_fraction"] = 1.5;
  CHECK(error_of(j).find("val_fraction") != std::string::npos);

  CHECK_THROWS_WITH_AS(load_config("/no/such/config.json"), doctest::Contains("/no/such/config.json"), ExperimentError);
}

TEST_CASE("simulate writes 120 samples per layout") {
  TempDir tmp("sim");
  auto cfg = load_config(canonical_path());
  cfg.output_dir = tmp.path;
  CHECK_THROWS_WITH_AS(load_store(cfg), doctest::Contains("simulate"), ExperimentError);

  const auto summary = simulate(cfg);
  REQUIRE(summary.samples_per_layout.size() == 4);
  for (auto [id, n] : summary.samples_per_layout) CHECK(n == 120);
  for (int id = 1; id <= 4; ++id) CHECK(fs::exists(dataset_path(cfg, id)));

  const auto store = load_store(cfg);
  CHECK(store.size() == 480);
  CHECK(store == testing::canonical_store(cfg.seed));

  auto other = cfg;
  other.seed = 8;
  other.output_dir = tmp.path / "seed8";
  simulate(other);
  const auto store8 = load_store(other);
  REQUIRE(store8.size() == 480);
  std::map<std::string, int> a, b;
  int differ = 0;
  for (std::size_t i = 0; i < 480; ++i) {
    ++a[store[i].meta.agent_id];
    ++b[store8[i].meta.agent_id];
    differ += store[i].label_index != store8[i].label_index;
  }
  CHECK(a == b);
  CHECK(differ > 100);
}

TEST_CASE("report marks gaps and partial folds") {
  TempDir tmp("report");
  write(tmp.path / "gs_summary.csv",
        "model,test_layout,gs_auprc\n"
        "GNN,1,0.9\nGNN,2,0.8\nGNN,Overall_Avg,0.85\n"
        "CNN2D,1,0.7\nCNN2D,2,0.9\nCNN2D,Overall_Avg,0.8\n"
        "CNN1D,1,gap\nCNN1D,2,0.5\nCNN1D,Overall_Avg,gap\n"
        "MLP,1,0.6\nMLP,2,0.6\nMLP,Overall_Avg,0.6\n");
  const std::string r = render_report(tmp.path);
  CHECK(r.find("0.8500") != std::string::npos);
  CHECK(r.find("gap") != std::string::npos);
  CHECK(r.find("GNN > MLP: yes") != std::string::npos);
  CHECK(r.find("GNN vs CNN1D: gap") != std::string::npos);
  CHECK(r.find("undetermined") != std::string::npos);
  CHECK(r.find("observed ordering: GNN > CNN2D > MLP") != std::string::npos);

  write(tmp.path / "gs_detail.csv",
        "model,fold,test_layout,agent,status,best_epoch,epochs_run,test_auprc,avg_val_auprc,gs,test_roc_auc\n"
        "MLP,1,2,A,finished,3,10,0.1,0.2,0.5,0.7\n"
        "MLP,1,2,B,diverged,,,,,\n");
  const std::string r2 = render_report(tmp.path);
  CHECK(r2.find("0.6000*") != std::string::npos);
  CHECK(r2.find("MLP fold 1 agent B") != std::string::npos);

  write(tmp.path / "gs_summary.csv",
        "model,test_layout,gs_auprc\nGNN,Overall_Avg,0.9\nCNN2D,Overall_Avg,0.8\n"
        "CNN1D,Overall_Avg,0.85\nMLP,Overall_Avg,0.1\n");
  fs::remove(tmp.path / "gs_detail.csv");
  const std::string r3 = render_report(tmp.path);
  CHECK(r3.find("CNN2D > CNN1D: no") != std::string::npos);
  CHECK(r3.find("not reproduced") != std::string::npos);

  write(tmp.path / "gs_summary.csv", "a,b\n");
  CHECK_THROWS_AS(render_report(tmp.path), ExperimentError);
  CHECK_THROWS_AS(render_report(tmp.path / "missing"), ExperimentError);
}

TEST_CASE("GS is exactly one when the test set is the validation set") {
  const auto store = testing::canonical_store();
  auto cfg = load_config(canonical_path());
  cfg.train.epochs = 2;
  cfg.train.patience = 1;
  const auto folds = build_folds(store, cfg.val_fraction, cfg.seed);
  const auto out = run_job(store, folds[1], models::ModelKind::MLP, "B", cfg, JobOptions{true});
  REQUIRE(out.status == RunStatus::Finished);
  CHECK(out.score.gs == 1.0);
  for (const auto& e : out.result.trace) CHECK(e.test_auprc == e.val_auprc);

  // and on the held-out layout the same run differs
  const auto held = run_job(store, folds[1], models::ModelKind::MLP, "B", cfg);
  CHECK(held.result.trace[0].val_auprc == out.result.trace[0].val_auprc);
  CHECK(held.score.gs != 1.0);
}

TEST_CASE("outputs are written and readable by the report") {
  TempDir tmp("outputs");
  const auto store = testing::canonical_store();
  auto cfg = load_config(canonical_path());
  cfg.train.epochs = 1;
  cfg.models = {models::ModelKind::MLP};
  const auto res = run_loocv(cfg, store, 1);
  CHECK(res.runs.size() == 12);
  write_loocv_outputs(tmp.path, cfg, res);
  for (const char* f : {"results.csv", "gs_summary.csv", "gs_detail.csv", "models.txt", "config.json",
                        "curves_MLP.csv", "curves_MLP.svg"})
    CHECK(fs::exists(tmp.path / f));
  std::ifstream in(tmp.path / "results.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "model,fold,agent,epoch,train_loss,val_loss,val_auprc,test_auprc,roc_auc");
  CHECK(render_report(tmp.path).find("MLP") != std::string::npos);
  const auto* m = res.summary.find("MLP");
  REQUIRE(m != nullptr);
  REQUIRE(m->overall_avg.has_value());
  // agents first, then folds
  double folds = 0;
  for (int f = 0; f < 4; ++f) {
    double s = 0;
    for (int a = 0; a < 3; ++a) s += res.runs[static_cast<std::size_t>(f * 3 + a)].score.gs;
    folds += s / 3;
  }
  CHECK(*m->overall_avg == doctest::Approx(folds / 4).epsilon(1e-12));
}
