#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prefbench {

enum class ElementKind : std::uint8_t {
  Bench,
  PicnicTable,
  Playground,
  Monument,
  Amenity,
  Trail,
  Grass,
  Soil,
  RunningTrack,
  Bush,
  Tree,
  Empty,
};

enum class ElementCategory : std::uint8_t { Furniture, Terrain, Obstacle, None };

ElementCategory category_of(ElementKind kind);
std::string_view to_string(ElementKind kind);
std::optional<ElementKind> parse_element_kind(std::string_view name);

inline constexpr std::array<ElementKind, 5> kFurnitureKinds{
    ElementKind::Bench, ElementKind::PicnicTable, ElementKind::Playground,
    ElementKind::Monument, ElementKind::Amenity};
inline constexpr std::array<ElementKind, 4> kTerrainKinds{
    ElementKind::Trail, ElementKind::Grass, ElementKind::Soil, ElementKind::RunningTrack};
inline constexpr std::array<ElementKind, 2> kObstacleKinds{ElementKind::Bush, ElementKind::Tree};

/// Grid discretization. Rows run along the 21 m side, columns along the 15 m
/// side; cells are addressed row-major.
struct GridDims {
  int rows = 28;
  int cols = 20;
  double cell_size = 0.75;

  int size() const { return rows * cols; }
  int index(int row, int col) const { return row * cols + col; }
  int row_of(int idx) const { return idx / cols; }
  int col_of(int idx) const { return idx % cols; }
  bool contains(int row, int col) const {
    return row >= 0 && row < rows && col >= 0 && col < cols;
  }
  bool operator==(const GridDims&) const = default;
};

inline constexpr GridDims kCanonicalDims{28, 20, 0.75};

/// Default object heights in meters, used by the shadow caster.
struct HeightDefaults {
  double tree = 5.0;
  double monument = 4.0;
  double bush = 1.0;
  double playground = 2.5;
  double bench = 0.9;
  double picnic_table = 0.9;
  double amenity = 2.0;

  double of(ElementKind kind) const;
};

struct Cell {
  int row = 0;
  int col = 0;
  ElementKind element = ElementKind::Empty;
  ElementKind terrain = ElementKind::Grass;
  std::optional<ElementKind> obstacle;
  double height = 0.0;

  bool has_object() const { return element != ElementKind::Empty || obstacle.has_value(); }
  bool operator==(const Cell&) const = default;
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable discretized park. Construction validates every cell invariant.
class Layout {
 public:
  Layout(int id, GridDims dims, std::vector<Cell> cells);

  int id() const { return id_; }
  const GridDims& dims() const { return dims_; }
  std::span<const Cell> cells() const { return cells_; }
  const Cell& at(int idx) const { return cells_.at(static_cast<std::size_t>(idx)); }
  const Cell& at(int row, int col) const { return at(dims_.index(row, col)); }

  std::vector<double> heights() const;

  bool operator==(const Layout&) const = default;

 private:
  int id_;
  GridDims dims_;
  std::vector<Cell> cells_;
};

/// Parses the JSON layout schema:
///   { id, rows, cols, cell_size_m, default_terrain,
///     terrain:    [ {kind, row0, col0, row1, col1} ... ]   inclusive, later wins
///     placements: [ {kind, row, col, [height_m]} ... ] }
Layout load_layout(std::string_view source, const HeightDefaults& heights = {});
Layout load_layout_file(const std::filesystem::path& path, const HeightDefaults& heights = {});

// ---------------------------------------------------------------------------
// Augmentation transforms (Klein four-group acting on the grid).

enum class Transform : std::uint8_t { Identity, Rot180, HFlip, VFlip };

inline constexpr std::array<Transform, 4> kTransforms{
    Transform::Identity, Transform::Rot180, Transform::HFlip, Transform::VFlip};

std::string_view to_string(Transform t);
std::optional<Transform> parse_transform(std::string_view name);

/// Transform equivalent to applying `first` and then `second`.
Transform compose(Transform first, Transform second);

int transform_index(const GridDims& dims, int idx, Transform t);
Layout transform(const Layout& layout, Transform t);

/// Moves per-cell blocks of `channels` values to their transformed cells.
template <class T>
std::vector<T> transform_grid(const GridDims& dims, std::span<const T> values, int channels,
                              Transform t) {
  const auto n = static_cast<std::size_t>(dims.size());
  const auto ch = static_cast<std::size_t>(channels);
  if (values.size() != n * ch) throw std::invalid_argument("transform_grid: size mismatch");
  std::vector<T> out(values.size());
  for (int idx = 0; idx < dims.size(); ++idx) {
    const auto dst = static_cast<std::size_t>(transform_index(dims, idx, t));
    const auto src = static_cast<std::size_t>(idx);
    for (std::size_t k = 0; k < ch; ++k) out[dst * ch + k] = values[src * ch + k];
  }
  return out;
}

/// In-bounds Moore neighbors of `idx`, ascending, excluding `idx` itself.
std::vector<int> neighbors8(const GridDims& dims, int idx);

}  // namespace prefbench
