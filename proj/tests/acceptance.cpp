// Acceptance checks, one line per criterion. Exit status is non-zero only for
// failures outside the known list at the bottom of README.md.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "prefbench/experiment.hpp"
#include "prefbench/nn/loss.hpp"

using namespace prefbench;
using nn::LayerKind;
using nn::Matrix;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

fs::path source_dir() { return PREFBENCH_SOURCE_DIR; }
fs::path canonical_config() { return source_dir() / "configs" / "canonical.json"; }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
  std::string name;
  bool pass = false;
  std::string detail;
  bool known = false;  // documented as unattainable here
  bool report_only = false;
};

std::vector<Line> lines;

void emit(Line l) {
  const char* verdict = l.report_only ? "REPORT" : l.pass ? "PASS" : l.known ? "FAIL (known)" : "FAIL";
  std::printf("[%s] %s: %s\n", verdict, l.name.c_str(), l.detail.c_str());
  std::fflush(stdout);
  lines.push_back(std::move(l));
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

Sample random_sample(Rng& rng, GridDims dims = {}) {
  Sample s;
  s.features.dims = dims;
  s.features.values.resize(static_cast<std::size_t>(dims.size()) * FeatureSchema::kWidth);
  for (auto& v : s.features.values) v = rng.uniform(0, 1);
  s.activity = kActivities[rng.below(4)];
  s.label_index = static_cast<int>(rng.below(static_cast<std::size_t>(dims.size())));
  return s;
}

// ---------------------------------------------------------------------------

void gradient_suite() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  int cases = 0, resampled = 0;
  const GridDims grid{4, 3, 1.0};
  const nn::Adjacency adj = nn::Adjacency::grid8(grid);
  const std::vector<LayerKind> kinds{LayerKind::dense(5, 3), LayerKind::conv1x1(4, 2), LayerKind::conv2d(3, 4, 3),
                                     LayerKind::conv1d(3, 4, 3), LayerKind::gcn(3, 4), LayerKind::relu(),
                                     LayerKind::sigmoid()};
  for (const auto& k : kinds) {
    const nn::BatchGeometry g{2, 12, grid, k.type == nn::LayerType::GCN ? &adj : nullptr};
    for (int done = 0; done < 20;) {
      auto layer = nn::make_layer(k, rng);
      for (nn::Tensor* t : layer->params())
        for (auto& v : t->data) v = rng.uniform(-1, 1);
      const auto r = nn::grad_check_layer(*layer, random_matrix(rng, g.rows(), k.trainable() ? k.in : 3, 2.0), g, rng);
      if (r.near_kink) {
        ++resampled;
        continue;
      }
      worst = std::max(worst, r.max_rel_error);
      ++done;
      ++cases;
    }
  }
  const GridDims small{5, 4, 1.0};
  for (auto kind : models::kModelKinds) {
    const auto layers = models::layers_for(kind, models::kInputWidth, 4);
    nn::BatchGeometry g = models::sample_geometry(kind, small);
    g.samples = 2;
    const int width = kind == models::ModelKind::MLP ? models::kContextCells * models::kInputWidth : models::kInputWidth;
    for (int done = 0; done < 20;) {
      nn::Network net(layers, rng.next());
      const Matrix x = random_matrix(rng, g.rows(), width);
      std::vector<double> y(static_cast<std::size_t>(g.rows()), 0.0);
      y[rng.below(20)] = 1.0;
      y[20 + rng.below(20)] = 1.0;
      const auto r = nn::grad_check(net, x, g, y, nn::auto_pos_weight(y));
      if (r.near_kink) {
        ++resampled;
        continue;
      }
      worst = std::max(worst, r.max_rel_error);
      ++done;
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  emit({"gradient suite", worst < 1e-5 && secs < 60.0,
        fmt("%d cases (7 layer kinds, 4 architectures at width 4, 20 each; %d resampled near a kink), "
            "max rel error %.3g (< 1e-5), %.1f s (< 60 s)",
            cases, resampled, worst, secs)});
}

// Threshold-enumeration AP and pair-counting AUC.
double oracle_ap(const std::vector<double>& s, const std::vector<double>& y) {
  std::set<double> thresholds(s.begin(), s.end());
  double pos = 0;
  for (double v : y) pos += v;
  double ap = 0, prev_recall = 0;
  for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
    double tp = 0, n = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= *it) {
        ++n;
        tp += y[i];
      }
    ap += (tp / pos - prev_recall) * (tp / n);
    prev_recall = tp / pos;
  }
  return ap;
}

double oracle_auc(const std::vector<double>& s, const std::vector<double>& y) {
  double num = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        ++pairs;
        num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return num / pairs;
}

void metric_oracles() {
  Rng rng(202);
  double worst_ap = 0, worst_auc = 0;
  int checked = 0;
  for (int pattern = 1; pattern < 256; ++pattern) {
    std::vector<double> y(8);
    for (int b = 0; b < 8; ++b) y[b] = (pattern >> b) & 1;
    for (int t = 0; t < 50; ++t) {
      std::vector<double> s(8);
      // coarse scores on half the draws so ties occur
      for (auto& v : s) v = t % 2 ? rng.uniform() : static_cast<double>(rng.below(4));
      worst_ap = std::max(worst_ap, std::abs(auprc(s, y) - oracle_ap(s, y)));
      if (pattern != 255) worst_auc = std::max(worst_auc, std::abs(roc_auc(s, y) - oracle_auc(s, y)));
      ++checked;
    }
  }
  // all-zero pattern: no positive, both metrics refuse
  bool refuses = false;
  try {
    auprc(std::vector<double>(8, 0.5), std::vector<double>(8, 0.0));
  } catch (const MetricError&) {
    refuses = true;
  }
  const bool oracles_ok = worst_ap <= 1e-12 && worst_auc <= 1e-12 && refuses;

  const int trials = 10000;
  std::vector<double> s(560), y(560);
  double sum = 0, sq = 0;
  for (int t = 0; t < trials; ++t) {
    std::fill(y.begin(), y.end(), 0.0);
    y[rng.below(560)] = 1.0;
    for (auto& v : s) v = rng.uniform();
    const double a = auprc(s, y);
    sum += a;
    sq += a * a;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  double harmonic = 0;
  for (int k = 1; k <= 560; ++k) harmonic += 1.0 / k;
  const bool random_ok = std::abs(mean - 1.0 / 560) <= 3 * se;
  emit({"metric oracles", oracles_ok && random_ok,
        fmt("%d score vectors over 255 label patterns (all-negative pattern rejected: %s), max |AP - oracle| %.2g, "
            "max |AUC - oracle| %.2g (<= 1e-12); random scorer mean AUPRC %.5f vs 1/560 = %.5f, 3 SE = %.5f "
            "(exact expectation H_560/560 = %.5f)",
            checked, refuses ? "yes" : "no", worst_ap, worst_auc, mean, 1.0 / 560, 3 * se, harmonic / 560),
        !random_ok && oracles_ok});
}

void gs_identity(const std::vector<Sample>& store, const ExperimentConfig& base) {
  auto cfg = base;
  cfg.train.epochs = 3;
  const auto folds = build_folds(store, cfg.val_fraction, cfg.seed);
  bool all = true;
  std::string vals;
  for (auto kind : models::kModelKinds) {
    const auto out = run_job(store, folds[0], kind, cfg.profiles[0].id, cfg, JobOptions{true});
    const bool ok = out.status == RunStatus::Finished && out.score.gs == 1.0;
    all = all && ok;
    vals += fmt(" %s=%.17g", std::string(models::to_string(kind)).c_str(), out.score.gs);
  }
  const bool above = generalizability_score(1.09, 1.0) > 1.0 && generalizability_score(0.51, 0.5) == 0.51 / 0.5;
  emit({"GS identity", all && above,
        "test set = validation set gives GS" + vals + fmt("; GS above 1 representable: %s", above ? "yes" : "no")});
}

void parameter_budget() {
  bool all = true;
  std::string vals;
  for (auto kind : models::kModelKinds) {
    const auto spec = models::build(kind);
    const long n = models::count_params(spec.layers);
    all = all && n >= 74000 && n <= 76000 && nn::Network(spec.layers, 1).param_count() == n;
    vals += fmt(" %s=%ld", std::string(models::to_string(kind)).c_str(), n);
  }
  emit({"parameter budget", all, "counts" + vals + " (all in [74000, 76000])"});
}

void augmentation_algebra(const std::vector<Sample>& store, const ExperimentConfig& cfg) {
  // composition checked against the cell maps on a non-square grid
  const GridDims d{5, 3, 1.0};
  bool table = true;
  for (Transform a : kTransforms)
    for (Transform b : kTransforms)
      for (int i = 0; i < d.size(); ++i)
        table = table && transform_index(d, transform_index(d, i, a), b) == transform_index(d, i, compose(a, b));
  bool one_positive = true;
  const auto expanded = expand_augmented(store);
  for (const auto& s : expanded) {
    const auto g = s.label_grid();
    one_positive = one_positive && std::count(g.begin(), g.end(), 1.0) == 1;
  }
  bool clean_tests = true, augmented_train = true;
  for (const auto& f : build_folds(store, cfg.val_fraction, cfg.seed)) {
    for (const auto& r : f.test) clean_tests = clean_tests && r.aug == Transform::Identity && store[r.index].meta.aug == Transform::Identity;
    for (const auto& r : f.val) clean_tests = clean_tests && r.aug == Transform::Identity;
    std::set<Transform> seen;
    for (const auto& r : f.train) seen.insert(r.aug);
    augmented_train = augmented_train && seen.size() == 4;
  }
  emit({"augmentation algebra", table && one_positive && clean_tests && augmented_train,
        fmt("16-entry composition table %s; %zu augmented samples with exactly one positive: %s; test/val refs "
            "identity-only: %s",
            table ? "holds" : "broken", expanded.size(), one_positive ? "yes" : "no", clean_tests ? "yes" : "no")});
}

void equivariance() {
  Rng rng(303);
  double gcn_err = 0, cnn_err = 0;
  const auto gnn = models::build(models::ModelKind::GNN);
  const int n = 30;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<int, int>> edges, permuted;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < 0.15) edges.emplace_back(i, j);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (auto [i, j] : edges) permuted.emplace_back(perm[i], perm[j]);
    const auto a = nn::Adjacency::from_edges(n, edges);
    const auto b = nn::Adjacency::from_edges(n, permuted);
    const Matrix x = random_matrix(rng, n, models::kInputWidth);
    Matrix xp(n, models::kInputWidth);
    for (int i = 0; i < n; ++i) xp.row(perm[i]) = x.row(i);
    nn::Network net(gnn.layers, rng.next());
    const Matrix y = net.forward(x, nn::BatchGeometry{1, n, GridDims{1, n, 1.0}, &a});
    const Matrix& yp = net.forward(xp, nn::BatchGeometry{1, n, GridDims{1, n, 1.0}, &b});
    for (int i = 0; i < n; ++i) gcn_err = std::max(gcn_err, std::abs(yp(perm[i], 0) - y(i, 0)));
  }
  const auto cnn = models::build(models::ModelKind::CNN2D);
  const GridDims dims{};
  const auto geom = models::sample_geometry(models::ModelKind::CNN2D, dims);
  for (int trial = 0; trial < 10; ++trial) {
    const int dr = static_cast<int>(rng.below(3)) - 1, dc = static_cast<int>(rng.below(3)) - 1;
    const Matrix x = random_matrix(rng, dims.size(), models::kInputWidth);
    Matrix xs = random_matrix(rng, dims.size(), models::kInputWidth);
    for (int r = 0; r < dims.rows; ++r)
      for (int c = 0; c < dims.cols; ++c)
        if (dims.contains(r - dr, c - dc)) xs.row(dims.index(r, c)) = x.row(dims.index(r - dr, c - dc));
    nn::Network net(cnn.layers, rng.next());
    const Matrix y = net.forward(x, geom);
    const Matrix& ys = net.forward(xs, geom);
    for (int r = 4; r < dims.rows - 4; ++r)
      for (int c = 4; c < dims.cols - 4; ++c)
        cnn_err = std::max(cnn_err, std::abs(ys(dims.index(r, c), 0) - y(dims.index(r - dr, c - dc), 0)));
  }
  emit({"equivariance", gcn_err < 1e-10 && cnn_err < 1e-10,
        fmt("GCN stack under node permutation max err %.3g; CNN2D interior under unit shifts max err %.3g "
            "(10 cases each, < 1e-10)",
            gcn_err, cnn_err)});
}

// Park cells at distance >= `outside` whose perturbation moves the target.
int leaks(models::ModelKind kind, int outside, std::uint64_t seed) {
  Rng rng(seed);
  const GridDims dims{};
  const int tr = 14, tc = 10, target = dims.index(tr, tc);
  const auto spec = models::build(kind);
  nn::Network net(spec.layers, rng.next());
  const auto geom = models::sample_geometry(kind, dims);
  const Sample s = random_sample(rng, dims);
  const Matrix y0 = net.forward(models::model_input(kind, s), geom);
  int moved = 0;
  for (int c = 0; c < dims.size(); ++c) {
    if (std::max(std::abs(dims.row_of(c) - tr), std::abs(dims.col_of(c) - tc)) < outside) continue;
    Sample sp = s;
    for (int f = 0; f < sp.features.width; ++f)
      sp.features.values[static_cast<std::size_t>(c * sp.features.width + f)] += rng.uniform(-1, 1);
    const Matrix& y = net.forward(models::model_input(kind, sp), geom);
    moved += y(target, 0) != y0(target, 0);
  }
  return moved;
}

void receptive_fields() {
  const int mlp = leaks(models::ModelKind::MLP, 2, 404);
  const int cnn = leaks(models::ModelKind::CNN2D, 4, 405);
  emit({"receptive fields", mlp == 0 && cnn == 0,
        fmt("centre prediction moved by %d perturbed cells outside the MLP 3x3 context and by %d at Chebyshev "
            "distance >= 4 for CNN2D",
            mlp, cnn)});
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Every output file of a run, concatenated in name order.
std::string run_bytes(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.lexically_relative(dir).string() + "\n" + file_bytes(f);
  return all;
}

void end_to_end(const ExperimentConfig& base) {
  const fs::path scratch = fs::temp_directory_path() / ("prefbench_accept_" + std::to_string(::getpid()));
  fs::remove_all(scratch);

  // Byte-determinism: the whole pipeline twice with a short training budget.
  bool same = false;
  std::size_t bytes = 0;
  {
    // same directory both times: config.json records output_dir
    auto cfg = base;
    cfg.train.epochs = 1;
    cfg.output_dir = scratch / "rerun";
    std::string runs[2];
    for (auto& bytes_out : runs) {
      fs::remove_all(cfg.output_dir);
      simulate(cfg);
      const auto store = load_store(cfg);
      write_loocv_outputs(cfg.output_dir, cfg, run_loocv(cfg, store, 1));
      bytes_out = run_bytes(cfg.output_dir);
    }
    same = runs[0] == runs[1];
    bytes = runs[0].size();
  }

  // Timed canonical run, abandoned once the limit has passed.
  const double limit = 30 * 60;
  const auto t0 = Clock::now();
  auto cfg = base;
  cfg.output_dir = scratch / "timed";
  simulate(cfg);
  const auto store = load_store(cfg);
  const auto folds = build_folds(store, cfg.val_fraction, cfg.seed);
  int done = 0, total = 0, epochs = 0;
  for (auto kind : cfg.models)
    for (const auto& f : folds)
      for (const auto& p : cfg.profiles) {
        ++total;
        if (seconds_since(t0) > limit) continue;
        const auto out = run_job(store, f, kind, p.id, cfg);
        epochs += static_cast<int>(out.result.trace.size());
        ++done;
      }
  const double secs = seconds_since(t0);
  fs::remove_all(scratch);
  const bool fast = done == total && secs < limit;
  emit({"end-to-end run", fast && same,
        fmt("%d of %d runs (%d epochs) in %.1f min, limit 30 min%s; two pipeline reruns (1 epoch) byte-identical "
            "over %zu bytes: %s",
            done, total, epochs, secs / 60, fast ? "" : fmt(", projected %.0f min", secs / 60 * total / std::max(done, 1)).c_str(),
            bytes, same ? "yes" : "no"),
        !fast && same});
}

void directional_trend() {
  const fs::path dir = source_dir() / "results" / "canonical";
  if (!fs::exists(dir / "gs_summary.csv")) {
    emit({"directional trend", false, "no shipped canonical results at " + dir.string(), false, true});
    return;
  }
  const std::string report = render_report(dir);
  std::string ordering, verdict;
  std::istringstream in(report);
  for (std::string line; std::getline(in, line);) {
    if (line.find("observed ordering:") != std::string::npos) ordering = line.substr(line.find(':') + 2);
    if (line.find("hierarchy ") != std::string::npos) verdict = line.substr(line.find("hierarchy "));
  }
  emit({"directional trend", verdict == "hierarchy reproduced",
        "shipped seed, Overall_Avg GS ordering " + ordering + ", " + verdict, false, true});
}

}  // namespace

// Optional argument: run only criteria whose key contains it
// (gradient, metric, gs, budget, augmentation, equivariance, receptive, e2e, trend).
int main(int argc, char** argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  auto want = [&](const char* key) { return only.empty() || std::string(key).find(only) != std::string::npos; };
  const auto cfg = load_config(canonical_config());
  const auto t0 = Clock::now();

  if (want("gradient")) gradient_suite();
  if (want("metric")) metric_oracles();
  if (want("gs budget augmentation")) {
    auto sim = cfg;
    sim.output_dir = fs::temp_directory_path() / ("prefbench_accept_store_" + std::to_string(::getpid()));
    simulate(sim);
    const auto store = load_store(sim);
    fs::remove_all(sim.output_dir);
    if (want("gs")) gs_identity(store, cfg);
    if (want("budget")) parameter_budget();
    if (want("augmentation")) augmentation_algebra(store, cfg);
  }
  if (want("equivariance")) equivariance();
  if (want("receptive")) receptive_fields();
  if (want("e2e")) end_to_end(cfg);
  if (want("trend")) directional_trend();

  int unexpected = 0, known = 0;
  for (const auto& l : lines) {
    if (l.pass || l.report_only) continue;
    (l.known ? known : unexpected)++;
  }
  std::printf("%zu criteria, %d unexpected failure(s), %d known failure(s), %.1f min\n", lines.size(), unexpected,
              known, seconds_since(t0) / 60);
  return unexpected == 0 ? 0 : 1;
}
