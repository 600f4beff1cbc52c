#include "prefbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

namespace prefbench {

std::vector<double> Sample::label_grid() const {
  std::vector<double> grid(static_cast<std::size_t>(features.dims.size()), 0.0);
  grid.at(static_cast<std::size_t>(label_index)) = 1.0;
  return grid;
}

Sample sample_from_event(const Layout& layout, const ChoiceEvent& event, const EnvParams& env) {
  Sample s;
  s.features = encode_features(layout, event.hour, compute_env(layout, event.hour, env), event.occupancy);
  s.activity = event.activity;
  s.label_index = event.chosen_cell;
  s.meta = {layout.id(), event.agent_id, event.hour, Transform::Identity};
  return s;
}

std::vector<Sample> samples_from_events(const Layout& layout, std::span<const ChoiceEvent> events,
                                        const EnvParams& env) {
  std::map<double, EnvField> cache;
  std::vector<Sample> out;
  out.reserve(events.size());
  for (const auto& ev : events) {
    auto it = cache.find(ev.hour);
    if (it == cache.end()) it = cache.emplace(ev.hour, compute_env(layout, ev.hour, env)).first;
    Sample s;
    s.features = encode_features(layout, ev.hour, it->second, ev.occupancy);
    s.activity = ev.activity;
    s.label_index = ev.chosen_cell;
    s.meta = {layout.id(), ev.agent_id, ev.hour, Transform::Identity};
    out.push_back(std::move(s));
  }
  return out;
}

Sample augment(const Sample& sample, Transform t) {
  Sample out;
  out.features = transform(sample.features, t);
  out.activity = sample.activity;
  out.label_index = transform_index(sample.features.dims, sample.label_index, t);
  out.meta = sample.meta;
  out.meta.aug = compose(sample.meta.aug, t);
  return out;
}

std::vector<Sample> expand_augmented(std::span<const Sample> samples) {
  std::vector<Sample> out;
  out.reserve(samples.size() * kTransforms.size());
  for (const auto& s : samples)
    for (Transform t : kTransforms) out.push_back(augment(s, t));
  return out;
}

std::vector<Sample> Fold::materialize(std::span<const Sample> store, std::span<const SampleRef> refs) {
  std::vector<Sample> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(augment(store[r.index], r.aug));
  return out;
}

std::vector<Fold> build_folds(std::span<const Sample> store, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw DatasetError("build_folds: val_fraction must lie in (0, 1)");
  }
  std::set<int> layouts;
  for (const auto& s : store) layouts.insert(s.meta.layout_id);
  if (layouts.size() < 2) throw DatasetError("build_folds: need samples from at least two layouts");

  std::vector<Fold> folds;
  int fold_id = 0;
  for (int test_layout : layouts) {
    Fold fold;
    fold.plan.fold_id = ++fold_id;
    fold.plan.test_layout = test_layout;
    fold.plan.val_fraction = val_fraction;
    for (int l : layouts)
      if (l != test_layout) fold.plan.train_layouts.push_back(l);

    std::map<std::pair<int, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < store.size(); ++i) {
      const auto& m = store[i].meta;
      if (m.aug != Transform::Identity) {
        throw DatasetError("build_folds: store must hold unaugmented samples only");
      }
      if (m.layout_id == test_layout) {
        fold.test.push_back({i, Transform::Identity});
      } else {
        groups[{m.layout_id, m.agent_id}].push_back(i);
      }
    }

    std::vector<std::size_t> train_base, val_base;
    for (auto& [key, members] : groups) {
      Rng rng(seed, {key_of("folds"), static_cast<std::uint64_t>(fold.plan.fold_id),
                     static_cast<std::uint64_t>(key.first), key_of(key.second)});
      std::vector<std::size_t> order = members;
      rng.shuffle(order);
      const auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(order.size())));
      val_base.insert(val_base.end(), order.begin(), order.begin() + static_cast<long>(n_val));
      train_base.insert(train_base.end(), order.begin() + static_cast<long>(n_val), order.end());
    }
    std::sort(train_base.begin(), train_base.end());
    std::sort(val_base.begin(), val_base.end());
    for (std::size_t i : train_base)
      for (Transform t : kTransforms) fold.train.push_back({i, t});
    for (std::size_t i : val_base) fold.val.push_back({i, Transform::Identity});
    folds.push_back(std::move(fold));
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json to_json(const Sample& s) {
  nlohmann::json j;
  j["layout_id"] = s.meta.layout_id;
  j["agent_id"] = s.meta.agent_id;
  j["hour"] = s.meta.hour;
  j["activity"] = std::string(to_string(s.activity));
  j["aug"] = std::string(to_string(s.meta.aug));
  j["rows"] = s.features.dims.rows;
  j["cols"] = s.features.dims.cols;
  j["F"] = s.features.width;
  j["features"] = s.features.values;
  j["label_index"] = s.label_index;
  return j;
}

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DatasetError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DatasetError(std::string("field '") + key + "' has the wrong type");
  }
}

Sample from_json(const nlohmann::json& j) {
  Sample s;
  s.meta.layout_id = field<int>(j, "layout_id");
  s.meta.agent_id = field<std::string>(j, "agent_id");
  s.meta.hour = field<double>(j, "hour");
  const auto act = parse_activity(field<std::string>(j, "activity"));
  if (!act) throw DatasetError("unknown activity");
  s.activity = *act;
  const auto aug = parse_transform(field<std::string>(j, "aug"));
  if (!aug) throw DatasetError("unknown augmentation tag");
  s.meta.aug = *aug;
  s.features.layout_id = s.meta.layout_id;
  s.features.hour = s.meta.hour;
  s.features.dims = GridDims{field<int>(j, "rows"), field<int>(j, "cols"), kCanonicalDims.cell_size};
  s.features.width = field<int>(j, "F");
  if (s.features.dims.rows < 1 || s.features.dims.cols < 1 || s.features.width < 1) {
    throw DatasetError("rows, cols and F must be positive");
  }
  s.features.values = field<std::vector<double>>(j, "features");
  if (s.features.values.size() !=
      static_cast<std::size_t>(s.features.dims.size()) * static_cast<std::size_t>(s.features.width)) {
    throw DatasetError("features length does not equal rows*cols*F");
  }
  s.label_index = field<int>(j, "label_index");
  if (s.label_index < 0 || s.label_index >= s.features.dims.size()) {
    throw DatasetError("label_index out of range");
  }
  return s;
}

}  // namespace

void write_dataset(std::ostream& out, std::span<const Sample> samples) {
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

std::vector<Sample> read_dataset(std::istream& in) {
  std::vector<Sample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DatasetError& e) {
      throw DatasetError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_dataset_file(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write dataset file: " + path.string());
  write_dataset(out, samples);
}

std::vector<Sample> read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset file: " + path.string());
  try {
    return read_dataset(in);
  } catch (const DatasetError& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
}

}  // namespace prefbench
