#include "prefbench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace prefbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fixed formatting keeps output files byte-stable across runs and platforms
// that share the same floating-point results.
std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void require_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ExperimentError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ExperimentError(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ExperimentError(where + "." + key + ": " + e.what());
  }
}

AgentProfile profile_from_json(const json& j, std::size_t i) {
  const std::string where = "profiles[" + std::to_string(i) + "]";
  require_keys(j, {"id", "weights", "activity_mix", "shade_seeking", "social_affinity"}, where);
  AgentProfile p;
  if (!j.contains("id")) throw ExperimentError(where + ": missing id");
  read_opt(j, "id", p.id, where);
  read_opt(j, "weights", p.weights, where);
  read_opt(j, "shade_seeking", p.shade_seeking, where);
  read_opt(j, "social_affinity", p.social_affinity, where);
  if (j.contains("activity_mix")) {
    const json& mix = j.at("activity_mix");
    if (!mix.is_object()) throw ExperimentError(where + ".activity_mix: expected {activity: probability}");
    p.activity_mix.fill(0.0);
    for (const auto& [name, value] : mix.items()) {
      const auto a = parse_activity(name);
      if (!a) throw ExperimentError(where + ".activity_mix: unknown activity '" + name + "'");
      p.activity_mix[static_cast<std::size_t>(*a)] = value.get<double>();
    }
  }
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ExperimentError(where + ": " + e.what());
  }
  return p;
}

json profile_to_json(const AgentProfile& p) {
  json mix = json::object();
  for (Activity a : kActivities) mix[std::string(to_string(a))] = p.activity_mix[static_cast<std::size_t>(a)];
  return {{"id", p.id},
          {"weights", p.weights},
          {"activity_mix", mix},
          {"shade_seeking", p.shade_seeking},
          {"social_affinity", p.social_affinity}};
}

void env_from_json(const json& j, EnvParams& e) {
  const std::string w = "env";
  require_keys(j, {"max_ray_cells", "base_temperature", "temperature_amplitude", "shade_penalty",
                   "min_temperature", "shade_light_factor", "night_elevation"},
               w);
  read_opt(j, "max_ray_cells", e.max_ray_cells, w);
  read_opt(j, "base_temperature", e.base_temperature, w);
  read_opt(j, "temperature_amplitude", e.temperature_amplitude, w);
  read_opt(j, "shade_penalty", e.shade_penalty, w);
  read_opt(j, "min_temperature", e.min_temperature, w);
  read_opt(j, "shade_light_factor", e.shade_light_factor, w);
  read_opt(j, "night_elevation", e.night_elevation, w);
}

json env_to_json(const EnvParams& e) {
  return {{"max_ray_cells", e.max_ray_cells},         {"base_temperature", e.base_temperature},
          {"temperature_amplitude", e.temperature_amplitude}, {"shade_penalty", e.shade_penalty},
          {"min_temperature", e.min_temperature},     {"shade_light_factor", e.shade_light_factor},
          {"night_elevation", e.night_elevation}};
}

void heights_from_json(const json& j, HeightDefaults& h) {
  const std::string w = "heights";
  require_keys(j, {"tree", "monument", "bush", "playground", "bench", "picnic_table", "amenity"}, w);
  read_opt(j, "tree", h.tree, w);
  read_opt(j, "monument", h.monument, w);
  read_opt(j, "bush", h.bush, w);
  read_opt(j, "playground", h.playground, w);
  read_opt(j, "bench", h.bench, w);
  read_opt(j, "picnic_table", h.picnic_table, w);
  read_opt(j, "amenity", h.amenity, w);
}

json heights_to_json(const HeightDefaults& h) {
  return {{"tree", h.tree},   {"monument", h.monument},         {"bush", h.bush},      {"playground", h.playground},
          {"bench", h.bench}, {"picnic_table", h.picnic_table}, {"amenity", h.amenity}};
}

Layout load_layout_checked(const fs::path& path, const HeightDefaults& heights) {
  if (!fs::exists(path)) throw ExperimentError("layout file not found: " + path.string());
  try {
    return load_layout_file(path, heights);
  } catch (const std::exception& e) {
    throw ExperimentError(path.string() + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate(bool canonical) const {
  if (layouts.empty()) throw ExperimentError("config: no layouts");
  if (profiles.empty()) throw ExperimentError("config: no profiles");
  if (canonical && layouts.size() != 4) {
    throw ExperimentError("config: the canonical experiment needs 4 layouts, got " + std::to_string(layouts.size()));
  }
  if (canonical && profiles.size() != 3) {
    throw ExperimentError("config: the canonical experiment needs 3 profiles, got " + std::to_string(profiles.size()));
  }
  for (const auto& p : layouts)
    if (!fs::exists(p)) throw ExperimentError("layout file not found: " + p.string());
  std::set<std::string> ids;
  for (const auto& p : profiles) {
    if (p.id.empty()) throw ExperimentError("config: profile with empty id");
    if (!ids.insert(p.id).second) throw ExperimentError("config: duplicate profile id '" + p.id + "'");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ExperimentError("config: val_fraction must be in (0, 1)");
  if (!(tau >= 0.0)) throw ExperimentError("config: tau must be >= 0");
  if (schedule.events_per_agent < 1) throw ExperimentError("config: schedule.events_per_agent must be >= 1");
  if (schedule.hours.empty()) throw ExperimentError("config: schedule.hours is empty");
  if (models.empty()) throw ExperimentError("config: no models selected");
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ExperimentError(std::string("config: ") + e.what());
  }
}

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  require_keys(j, {"layouts", "profiles", "schedule", "train", "val_fraction", "tau", "seed", "output_dir", "env",
                   "heights", "models"},
               "config");
  ExperimentConfig cfg;
  if (!j.contains("layouts") || !j.at("layouts").is_array()) throw ExperimentError("config: layouts must be a list");
  for (const auto& p : j.at("layouts")) {
    fs::path path = p.get<std::string>();
    cfg.layouts.push_back(path.is_absolute() ? path : (base_dir / path).lexically_normal());
  }
  if (!j.contains("profiles") || !j.at("profiles").is_array()) throw ExperimentError("config: profiles must be a list");
  for (std::size_t i = 0; i < j.at("profiles").size(); ++i) cfg.profiles.push_back(profile_from_json(j.at("profiles")[i], i));

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    require_keys(s, {"events_per_agent", "hours"}, "schedule");
    read_opt(s, "events_per_agent", cfg.schedule.events_per_agent, "schedule");
    read_opt(s, "hours", cfg.schedule.hours, "schedule");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    require_keys(t, {"epochs", "learning_rate", "patience", "batch_size", "pos_weight"}, "train");
    read_opt(t, "epochs", cfg.train.epochs, "train");
    read_opt(t, "learning_rate", cfg.train.learning_rate, "train");
    read_opt(t, "patience", cfg.train.patience, "train");
    read_opt(t, "batch_size", cfg.train.batch_size, "train");
    if (t.contains("pos_weight")) {
      const json& pw = t.at("pos_weight");
      if (pw.is_string() && pw.get<std::string>() == "auto") {
        cfg.train.pos_weight_mode = nn::PosWeightMode::Auto;
      } else if (pw.is_number()) {
        cfg.train.pos_weight_mode = nn::PosWeightMode::Fixed;
        cfg.train.pos_weight = pw.get<double>();
      } else {
        throw ExperimentError("train.pos_weight: expected \"auto\" or a number");
      }
    }
  }
  read_opt(j, "val_fraction", cfg.val_fraction, "config");
  read_opt(j, "tau", cfg.tau, "config");
  read_opt(j, "seed", cfg.seed, "config");
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("env")) env_from_json(j.at("env"), cfg.env);
  if (j.contains("heights")) heights_from_json(j.at("heights"), cfg.heights);
  if (j.contains("models")) {
    cfg.models.clear();
    for (const auto& m : j.at("models")) {
      const auto k = models::parse_model_kind(m.get<std::string>());
      if (!k) throw ExperimentError("config.models: unknown model '" + m.get<std::string>() + "'");
      cfg.models.push_back(*k);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ExperimentError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ExperimentError(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j, path.parent_path());
  } catch (const ExperimentError& e) {
    throw ExperimentError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw ExperimentError(path.string() + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["layouts"] = json::array();
  for (const auto& p : cfg.layouts) j["layouts"].push_back(p.string());
  j["profiles"] = json::array();
  for (const auto& p : cfg.profiles) j["profiles"].push_back(profile_to_json(p));
  j["schedule"] = {{"events_per_agent", cfg.schedule.events_per_agent}, {"hours", cfg.schedule.hours}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"learning_rate", cfg.train.learning_rate},
                {"patience", cfg.train.patience},
                {"batch_size", cfg.train.batch_size}};
  if (cfg.train.pos_weight_mode == nn::PosWeightMode::Auto) {
    j["train"]["pos_weight"] = "auto";
  } else {
    j["train"]["pos_weight"] = cfg.train.pos_weight;
  }
  j["val_fraction"] = cfg.val_fraction;
  j["tau"] = cfg.tau;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();
  j["env"] = env_to_json(cfg.env);
  j["heights"] = heights_to_json(cfg.heights);
  j["models"] = json::array();
  for (auto m : cfg.models) j["models"].push_back(std::string(models::to_string(m)));
  return j;
}

fs::path dataset_path(const ExperimentConfig& cfg, int layout_id) {
  return cfg.output_dir / "data" / ("layout_" + std::to_string(layout_id) + ".jsonl");
}

SimulationSummary simulate(const ExperimentConfig& cfg) {
  cfg.validate(false);
  const auto schedule = default_schedule(cfg.profiles, cfg.schedule, cfg.seed);
  SimulationSummary summary;
  std::set<int> seen;
  fs::create_directories(cfg.output_dir / "data");
  for (const auto& path : cfg.layouts) {
    const Layout layout = load_layout_checked(path, cfg.heights);
    if (!seen.insert(layout.id()).second) {
      throw ExperimentError(path.string() + ": duplicate layout id " + std::to_string(layout.id()));
    }
    std::vector<ChoiceEvent> events;
    try {
      require_all_activities_afforded(layout);
      events = run_simulation(layout, cfg.profiles, schedule, SimulationParams{cfg.tau, cfg.env}, cfg.seed);
    } catch (const std::exception& e) {
      throw ExperimentError(path.string() + ": " + e.what());
    }
    const auto samples = samples_from_events(layout, events, cfg.env);
    write_dataset_file(dataset_path(cfg, layout.id()), samples);
    summary.samples_per_layout.emplace_back(layout.id(), samples.size());
  }
  return summary;
}

std::vector<Sample> load_store(const ExperimentConfig& cfg) {
  std::vector<Sample> store;
  for (const auto& path : cfg.layouts) {
    const Layout layout = load_layout_checked(path, cfg.heights);
    const fs::path data = dataset_path(cfg, layout.id());
    if (!fs::exists(data)) throw ExperimentError("dataset file not found: " + data.string() + " (run simulate first)");
    auto samples = read_dataset_file(data);
    for (auto& s : samples) {
      if (s.meta.layout_id != layout.id()) {
        throw ExperimentError(data.string() + ": sample of layout " + std::to_string(s.meta.layout_id) +
                              " in the file of layout " + std::to_string(layout.id()));
      }
      store.push_back(std::move(s));
    }
  }
  return store;
}

RunOutcome run_job(std::span<const Sample> store, const Fold& fold, models::ModelKind model, const std::string& agent,
                   const ExperimentConfig& cfg, const JobOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome out;
  out.model = model;
  out.fold = fold.plan.fold_id;
  out.test_layout = fold.plan.test_layout;
  out.agent = agent;

  const std::string name(models::to_string(model));
  const models::ArchSpec spec = models::build(model);
  const std::uint64_t job_seed =
      Rng(cfg.seed, {key_of("job"), key_of(name), static_cast<std::uint64_t>(fold.plan.fold_id), key_of(agent)}).next();
  nn::Network net(spec.layers, job_seed);
  nn::TrainConfig tc = cfg.train;
  tc.seed = job_seed;

  const models::SampleView train_set(model, store, fold.train, agent);
  const models::SampleView val_set(model, store, fold.val, agent);
  const models::SampleView test_set(model, store, opts.test_equals_val ? fold.val : fold.test, agent);
  if (train_set.size() == 0 || val_set.size() == 0 || test_set.size() == 0) {
    throw ExperimentError("fold " + std::to_string(out.fold) + ", agent " + agent + ": empty train/val/test split");
  }
  const auto geom = models::sample_geometry(model, store[train_set.refs().front().index].features.dims);

  out.score.model = name;
  out.score.fold = out.fold;
  out.score.test_layout = out.test_layout;
  out.score.agent = agent;
  try {
    out.result = nn::train(net, train_set, val_set, &test_set, geom, tc);
    const auto& best = out.result.best();
    out.score.finished = true;
    out.score.test_auprc = best.test_auprc;
    out.score.avg_val_auprc = best.val_auprc;
    out.score.gs = generalizability_score(best.test_auprc, best.val_auprc);
  } catch (const nn::TrainingDiverged& e) {
    out.status = RunStatus::Diverged;
    out.error = e.what();
  } catch (const MetricError& e) {
    out.status = RunStatus::Diverged;
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

LoocvResult run_loocv(const ExperimentConfig& cfg, std::span<const Sample> store, int jobs, const JobOptions& opts,
                      bool verbose) {
  cfg.validate(false);
  const auto folds = build_folds(store, cfg.val_fraction, cfg.seed);

  struct Job {
    models::ModelKind model;
    std::size_t fold;
    std::string agent;
  };
  std::vector<Job> list;
  for (auto m : cfg.models)
    for (std::size_t f = 0; f < folds.size(); ++f)
      for (const auto& p : cfg.profiles) list.push_back({m, f, p.id});

  LoocvResult res;
  res.runs.resize(list.size());
  std::vector<std::string> errors(list.size());
  const int n = static_cast<int>(list.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs)) if (jobs > 1)
  for (int i = 0; i < n; ++i) {
    const Job& job = list[static_cast<std::size_t>(i)];
    try {
      res.runs[static_cast<std::size_t>(i)] = run_job(store, folds[job.fold], job.model, job.agent, cfg, opts);
      if (verbose) {
        const RunOutcome& r = res.runs[static_cast<std::size_t>(i)];
#pragma omp critical(prefbench_log)
        std::fprintf(stderr, "[%2d/%d] %-5s fold %d agent %s: %s, best epoch %d of %zu, GS %s (%.1f s)\n", i + 1, n,
                     std::string(models::to_string(r.model)).c_str(), r.fold, r.agent.c_str(),
                     r.status == RunStatus::Finished ? "finished" : "diverged", r.result.best_epoch,
                     r.result.trace.size(), r.score.finished ? num(r.score.gs).c_str() : "-", r.seconds);
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ExperimentError(e);

  std::vector<RunScore> scores;
  for (const auto& r : res.runs) scores.push_back(r.score);
  std::vector<std::string> model_names, agents;
  for (auto m : cfg.models) model_names.emplace_back(models::to_string(m));
  for (const auto& p : cfg.profiles) agents.push_back(p.id);
  std::vector<std::pair<int, int>> fold_pairs;
  for (const auto& f : folds) fold_pairs.emplace_back(f.plan.fold_id, f.plan.test_layout);
  res.summary = summarize_gs(scores, model_names, fold_pairs, agents);
  return res;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExperimentError("cannot write " + path.string());
  out << text;
}

struct CurvePoint {
  int epoch;
  double mean, sd;
  int runs;
};

// Per epoch: each agent's test AUPRC averaged over the folds still running,
// then mean and population standard deviation across agents.
std::vector<CurvePoint> curve_for(const std::vector<const RunOutcome*>& runs) {
  std::size_t max_epochs = 0;
  for (const auto* r : runs) max_epochs = std::max(max_epochs, r->result.trace.size());
  std::vector<CurvePoint> pts;
  for (std::size_t e = 0; e < max_epochs; ++e) {
    std::map<std::string, std::pair<double, int>> per_agent;
    int active = 0;
    for (const auto* r : runs) {
      if (e >= r->result.trace.size()) continue;
      auto& [sum, cnt] = per_agent[r->agent];
      sum += r->result.trace[e].test_auprc;
      ++cnt;
      ++active;
    }
    double mean = 0.0;
    for (const auto& [a, sc] : per_agent) mean += sc.first / sc.second;
    mean /= static_cast<double>(per_agent.size());
    double var = 0.0;
    for (const auto& [a, sc] : per_agent) var += std::pow(sc.first / sc.second - mean, 2);
    var /= static_cast<double>(per_agent.size());
    pts.push_back({static_cast<int>(e + 1), mean, std::sqrt(var), active});
  }
  return pts;
}

std::string curve_svg(const std::string& model, const std::vector<CurvePoint>& pts) {
  const double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
  double ymax = 0.0;
  for (const auto& p : pts) ymax = std::max(ymax, p.mean + p.sd);
  ymax = ymax > 0.0 ? ymax * 1.1 : 1.0;
  const double xmax = std::max<double>(2.0, pts.empty() ? 2.0 : pts.back().epoch);
  auto X = [&](double e) { return L + (e - 1.0) / (xmax - 1.0) * (W - L - R); };
  auto Y = [&](double v) { return H - B - v / ymax * (H - T - B); };
  char buf[128];
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n"
     << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
     << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" << model
     << ": test AUPRC vs epoch (mean and std across agents)</text>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L, H - B,
                W - R, H - B);
  os << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L, T, L,
                H - B);
  os << buf;
  for (int k = 0; k <= 4; ++k) {
    const double v = ymax * k / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">%.4f</text>\n",
                  L - 6, Y(v) + 4, v);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">epoch "
                "(1 to %d)</text>\n",
                (L + W - R) / 2, H - 15, static_cast<int>(xmax));
  os << buf;
  if (!pts.empty()) {
    os << "<polygon fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(p.epoch), Y(p.mean + p.sd));
      os << buf;
    }
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(it->epoch), Y(std::max(0.0, it->mean - it->sd)));
      os << buf;
    }
    os << "\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(p.epoch), Y(p.mean));
      os << buf;
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

void write_loocv_outputs(const fs::path& dir, const ExperimentConfig& cfg, const LoocvResult& res) {
  fs::create_directories(dir);

  std::string results = "model,fold,agent,epoch,train_loss,val_loss,val_auprc,test_auprc,roc_auc\n";
  for (const auto& r : res.runs) {
    const std::string name(models::to_string(r.model));
    for (const auto& e : r.result.trace) {
      results += name + "," + std::to_string(r.fold) + "," + r.agent + "," + std::to_string(e.epoch) + "," +
                 num(e.train_loss) + "," + num(e.val_loss) + "," + num(e.val_auprc) + "," + num(e.test_auprc) + "," +
                 num(e.roc_auc) + "\n";
    }
  }
  write_file(dir / "results.csv", results);

  std::string summary = "model,test_layout,gs_auprc\n";
  for (const auto& m : res.summary.models) {
    for (const auto& f : m.folds) {
      summary += m.model + "," + std::to_string(f.test_layout) + "," + (f.gs ? num(*f.gs) : std::string("gap")) + "\n";
    }
    summary += m.model + ",Overall_Avg," + (m.overall_avg ? num(*m.overall_avg) : std::string("gap")) + "\n";
  }
  write_file(dir / "gs_summary.csv", summary);

  std::string detail = "model,fold,test_layout,agent,status,best_epoch,epochs_run,test_auprc,avg_val_auprc,gs,test_roc_auc\n";
  for (const auto& r : res.runs) {
    detail += std::string(models::to_string(r.model)) + "," + std::to_string(r.fold) + "," +
              std::to_string(r.test_layout) + "," + r.agent + "," +
              (r.status == RunStatus::Finished ? "finished" : "diverged") + ",";
    if (r.status == RunStatus::Finished) {
      detail += std::to_string(r.result.best_epoch) + "," + std::to_string(r.result.trace.size()) + "," +
                num(r.score.test_auprc) + "," + num(r.score.avg_val_auprc) + "," + num(r.score.gs) + "," +
                num(r.result.best().roc_auc) + "\n";
    } else {
      detail += ",,,,,\n";
    }
  }
  write_file(dir / "gs_detail.csv", detail);

  std::string descr;
  for (auto m : cfg.models) descr += models::describe(models::build(m)) + "\n";
  write_file(dir / "models.txt", descr);
  write_file(dir / "config.json", to_json(cfg).dump(2) + "\n");

  for (auto m : cfg.models) {
    const std::string name(models::to_string(m));
    std::vector<const RunOutcome*> runs;
    for (const auto& r : res.runs)
      if (r.model == m && r.status == RunStatus::Finished) runs.push_back(&r);
    const auto pts = curve_for(runs);
    std::string csv = "epoch,mean_test_auprc,std_test_auprc,runs\n";
    for (const auto& p : pts)
      csv += std::to_string(p.epoch) + "," + num(p.mean) + "," + num(p.sd) + "," + std::to_string(p.runs) + "\n";
    write_file(dir / ("curves_" + name + ".csv"), csv);
    write_file(dir / ("curves_" + name + ".svg"), curve_svg(name, pts));
  }
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ExperimentError("missing " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw ExperimentError(path.string() + ": empty file");
  return rows;
}

}  // namespace

std::string render_report(const fs::path& dir) {
  const auto summary = read_csv(dir / "gs_summary.csv");
  if (summary[0] != std::vector<std::string>{"model", "test_layout", "gs_auprc"}) {
    throw ExperimentError((dir / "gs_summary.csv").string() + ": unexpected header");
  }
  std::vector<std::string> model_order, layout_order;
  std::map<std::string, std::map<std::string, std::string>> table;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const auto& row = summary[i];
    if (row.size() != 3) throw ExperimentError((dir / "gs_summary.csv").string() + ": malformed line " + std::to_string(i + 1));
    if (!table.count(row[0])) model_order.push_back(row[0]);
    if (row[1] != "Overall_Avg" && std::find(layout_order.begin(), layout_order.end(), row[1]) == layout_order.end()) {
      layout_order.push_back(row[1]);
    }
    table[row[0]][row[1]] = row[2];
  }

  // Partial folds and diverged runs come from the per-run detail when present.
  std::map<std::string, std::map<std::string, int>> finished;
  std::map<std::string, std::map<std::string, int>> expected;
  std::vector<std::string> diverged;
  const bool have_detail = fs::exists(dir / "gs_detail.csv");
  if (have_detail) {
    const auto detail = read_csv(dir / "gs_detail.csv");
    for (std::size_t i = 1; i < detail.size(); ++i) {
      const auto& row = detail[i];
      if (row.size() < 5) continue;
      ++expected[row[0]][row[2]];
      if (row[4] == "finished") {
        ++finished[row[0]][row[2]];
      } else {
        diverged.push_back(row[0] + " fold " + row[1] + " agent " + row[3]);
      }
    }
  }

  std::ostringstream os;
  os << "Generalizability score GS = test AUPRC / mean validation AUPRC\n"
     << "(cells pooled per layout; agents averaged first, then folds)\n\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-8s", "model");
  os << buf;
  for (const auto& l : layout_order) {
    std::snprintf(buf, sizeof buf, " %12s", ("Layout " + l).c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf, " %12s\n", "Overall_Avg");
  os << buf;

  std::map<std::string, double> overall;
  bool gaps = false;
  for (const auto& m : model_order) {
    std::snprintf(buf, sizeof buf, "%-8s", m.c_str());
    os << buf;
    auto cell = [&](const std::string& key, const std::string& layout) {
      const auto it = table[m].find(key);
      std::string text = it == table[m].end() || it->second == "gap" ? "gap" : it->second;
      if (text == "gap") {
        gaps = true;
      } else {
        std::snprintf(buf, sizeof buf, "%.4f", std::stod(text));
        text = buf;
        if (have_detail && !layout.empty() && finished[m][layout] < expected[m][layout]) {
          text += "*";
          gaps = true;
        }
      }
      std::snprintf(buf, sizeof buf, " %12s", text.c_str());
      os << buf;
    };
    for (const auto& l : layout_order) cell(l, l);
    cell("Overall_Avg", "");
    os << '\n';
    const auto it = table[m].find("Overall_Avg");
    if (it != table[m].end() && it->second != "gap") overall[m] = std::stod(it->second);
  }
  if (gaps) os << "\ngap = no finished run; * = some agents missing from that fold\n";
  if (!diverged.empty()) {
    os << "\ndiverged runs:\n";
    for (const auto& d : diverged) os << "  " << d << '\n';
  }

  os << "\nheadline trend (GNN and CNN2D above MLP and CNN1D on Overall_Avg):\n";
  bool all = true, holds = true;
  for (const char* hi : {"GNN", "CNN2D"}) {
    for (const char* lo : {"MLP", "CNN1D"}) {
      if (!overall.count(hi) || !overall.count(lo)) {
        os << "  " << hi << " vs " << lo << ": gap\n";
        all = false;
        continue;
      }
      const bool ok = overall[hi] > overall[lo];
      holds = holds && ok;
      os << "  " << hi << " > " << lo << ": " << (ok ? "yes" : "no") << '\n';
    }
  }
  std::vector<std::pair<double, std::string>> order;
  for (const auto& [m, v] : overall) order.emplace_back(v, m);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  os << "  observed ordering:";
  for (std::size_t i = 0; i < order.size(); ++i) os << (i ? " > " : " ") << order[i].second;
  os << "\n  hierarchy " << (!all ? "undetermined (gaps)" : holds ? "reproduced" : "not reproduced") << '\n';
  return os.str();
}

}  // namespace prefbench
