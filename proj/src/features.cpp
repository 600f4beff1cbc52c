#include "prefbench/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prefbench {

namespace {

constexpr std::array<std::string_view, FeatureSchema::kWidth> kNames{
    "bench",        "picnic_table", "playground",          "monument",
    "amenity",      "trail",        "grass",               "soil",
    "running_track", "bush",        "tree",                "has_object",
    "temperature",  "light",        "shadow",              "occupancy_own",
    "occupancy_neighbors", "nearest_agent_distance"};

int one_hot_slot(ElementKind kind) {
  switch (kind) {
    case ElementKind::Bench: return FeatureSchema::kBench;
    case ElementKind::PicnicTable: return FeatureSchema::kPicnicTable;
    case ElementKind::Playground: return FeatureSchema::kPlayground;
    case ElementKind::Monument: return FeatureSchema::kMonument;
    case ElementKind::Amenity: return FeatureSchema::kAmenity;
    case ElementKind::Trail: return FeatureSchema::kTrail;
    case ElementKind::Grass: return FeatureSchema::kGrass;
    case ElementKind::Soil: return FeatureSchema::kSoil;
    case ElementKind::RunningTrack: return FeatureSchema::kRunningTrack;
    case ElementKind::Bush: return FeatureSchema::kBush;
    case ElementKind::Tree: return FeatureSchema::kTree;
    case ElementKind::Empty: return -1;
  }
  return -1;
}

double clip_count(int count) { return std::min(count, 3) / 3.0; }

}  // namespace

std::span<const std::string_view> FeatureSchema::names() { return kNames; }

std::optional<int> FeatureSchema::index_of(std::string_view name) {
  for (int i = 0; i < kWidth; ++i)
    if (kNames[static_cast<std::size_t>(i)] == name) return i;
  return std::nullopt;
}

FeatureTensor transform(const FeatureTensor& tensor, Transform t) {
  FeatureTensor out = tensor;
  out.values = transform_grid<double>(tensor.dims, tensor.values, tensor.width, t);
  return out;
}

FeatureTensor encode_features(const Layout& layout, double hour, const EnvField& env,
                              std::span<const int> occupancy) {
  const GridDims& dims = layout.dims();
  const auto n = static_cast<std::size_t>(dims.size());
  if (env.temperature.size() != n || env.light.size() != n || env.shadow.size() != n ||
      occupancy.size() != n) {
    throw std::invalid_argument("encode_features: field sizes do not match the layout grid");
  }

  std::vector<int> occupied;
  for (int idx = 0; idx < dims.size(); ++idx)
    if (occupancy[static_cast<std::size_t>(idx)] > 0) occupied.push_back(idx);
  const double diagonal = std::max(
      1.0, std::hypot(static_cast<double>(dims.rows - 1), static_cast<double>(dims.cols - 1)));

  FeatureTensor out;
  out.layout_id = layout.id();
  out.hour = hour;
  out.dims = dims;
  out.values.assign(n * FeatureSchema::kWidth, 0.0);

  for (int idx = 0; idx < dims.size(); ++idx) {
    const Cell& cell = layout.at(idx);
    const auto i = static_cast<std::size_t>(idx);
    double* x = out.values.data() + i * FeatureSchema::kWidth;

    if (cell.element != ElementKind::Empty) x[one_hot_slot(cell.element)] = 1.0;
    x[one_hot_slot(cell.terrain)] = 1.0;
    if (cell.obstacle) x[one_hot_slot(*cell.obstacle)] = 1.0;
    x[FeatureSchema::kHasObject] = cell.has_object() ? 1.0 : 0.0;

    x[FeatureSchema::kTemperature] = std::clamp((env.temperature[i] - 10.0) / 20.0, 0.0, 1.0);
    x[FeatureSchema::kLight] = std::clamp(env.light[i], 0.0, 1.0);
    x[FeatureSchema::kShadow] = std::clamp(env.shadow[i], 0.0, 1.0);

    x[FeatureSchema::kOccupancyOwn] = clip_count(occupancy[i]);
    int around = 0;
    for (int j : neighbors8(dims, idx)) around += occupancy[static_cast<std::size_t>(j)];
    x[FeatureSchema::kOccupancyNeighbors] = clip_count(around);

    if (!occupied.empty()) {
      double best = std::numeric_limits<double>::infinity();
      for (int j : occupied) {
        best = std::min(best, std::hypot(static_cast<double>(dims.row_of(j) - cell.row),
                                         static_cast<double>(dims.col_of(j) - cell.col)));
      }
      x[FeatureSchema::kNearestAgentDistance] = best / diagonal;
    }
  }
  return out;
}

}  // namespace prefbench
