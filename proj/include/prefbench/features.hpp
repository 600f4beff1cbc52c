#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "prefbench/envdyn.hpp"
#include "prefbench/layout.hpp"

namespace prefbench {

/// Canonical per-cell feature layout. Categorical attributes are one-hot; all
/// continuous entries are normalized into [0, 1].
struct FeatureSchema {
  enum Index : int {
    kBench = 0,
    kPicnicTable,
    kPlayground,
    kMonument,
    kAmenity,
    kTrail,
    kGrass,
    kSoil,
    kRunningTrack,
    kBush,
    kTree,
    kHasObject,
    kTemperature,
    kLight,
    kShadow,
    kOccupancyOwn,
    kOccupancyNeighbors,
    kNearestAgentDistance,
    kCount,
  };

  static constexpr int kWidth = kCount;

  static std::span<const std::string_view> names();
  static std::optional<int> index_of(std::string_view name);
};

/// Per-cell feature vectors for one snapshot (layout x hour x occupancy).
struct FeatureTensor {
  int layout_id = 0;
  double hour = 0.0;
  GridDims dims{};
  int width = FeatureSchema::kWidth;
  std::vector<double> values;  // rows * cols * width, row-major

  std::span<const double> cell(int idx) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(idx) * width,
                                                   static_cast<std::size_t>(width));
  }
  bool operator==(const FeatureTensor&) const = default;
};

FeatureTensor transform(const FeatureTensor& tensor, Transform t);

/// Encodes every cell. `occupancy` holds the agent count per cell.
///   temperature -> (T - 10) / 20
///   occupancy counts -> min(count, 3) / 3 (own cell and 8-neighbor sum)
///   nearest-agent distance -> Euclidean cell distance / grid diagonal, 0 when
///   the park holds no agents
FeatureTensor encode_features(const Layout& layout, double hour, const EnvField& env,
                              std::span<const int> occupancy);

}  // namespace prefbench
