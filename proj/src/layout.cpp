#include "prefbench/layout.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace prefbench {

namespace {

constexpr std::array<std::string_view, 12> kElementNames{
    "Bench", "PicnicTable", "Playground", "Monument",     "Amenity", "Trail",
    "Grass", "Soil",        "RunningTrack", "Bush",       "Tree",    "Empty"};

std::string cell_text(int row, int col) {
  return "(" + std::to_string(row) + "," + std::to_string(col) + ")";
}

int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

ElementKind kind_field(const nlohmann::json& entry, const std::string& where) {
  if (!entry.contains("kind") || !entry["kind"].is_string()) {
    throw LayoutError(where + ": missing string field 'kind'");
  }
  const auto name = entry["kind"].get<std::string>();
  const auto kind = parse_element_kind(name);
  if (!kind) throw LayoutError(where + ": unknown element kind '" + name + "'");
  return *kind;
}

int int_field(const nlohmann::json& entry, const char* key, const std::string& where) {
  if (!entry.contains(key) || !entry[key].is_number_integer()) {
    throw LayoutError(where + ": missing integer field '" + key + "'");
  }
  return entry[key].get<int>();
}

}  // namespace

ElementCategory category_of(ElementKind kind) {
  switch (kind) {
    case ElementKind::Bench:
    case ElementKind::PicnicTable:
    case ElementKind::Playground:
    case ElementKind::Monument:
    case ElementKind::Amenity:
      return ElementCategory::Furniture;
    case ElementKind::Trail:
    case ElementKind::Grass:
    case ElementKind::Soil:
    case ElementKind::RunningTrack:
      return ElementCategory::Terrain;
    case ElementKind::Bush:
    case ElementKind::Tree:
      return ElementCategory::Obstacle;
    case ElementKind::Empty:
      return ElementCategory::None;
  }
  return ElementCategory::None;
}

std::string_view to_string(ElementKind kind) { return kElementNames[static_cast<std::size_t>(kind)]; }

std::optional<ElementKind> parse_element_kind(std::string_view name) {
  for (std::size_t i = 0; i < kElementNames.size(); ++i) {
    if (kElementNames[i] == name) return static_cast<ElementKind>(i);
  }
  return std::nullopt;
}

double HeightDefaults::of(ElementKind kind) const {
  switch (kind) {
    case ElementKind::Tree: return tree;
    case ElementKind::Monument: return monument;
    case ElementKind::Bush: return bush;
    case ElementKind::Playground: return playground;
    case ElementKind::Bench: return bench;
    case ElementKind::PicnicTable: return picnic_table;
    case ElementKind::Amenity: return amenity;
    default: return 0.0;
  }
}

Layout::Layout(int id, GridDims dims, std::vector<Cell> cells)
    : id_(id), dims_(dims), cells_(std::move(cells)) {
  if (dims_.rows < 1 || dims_.cols < 1 || !(dims_.cell_size > 0.0)) {
    throw LayoutError("layout " + std::to_string(id_) + ": invalid grid dimensions");
  }
  if (cells_.size() != static_cast<std::size_t>(dims_.size())) {
    throw LayoutError("layout " + std::to_string(id_) + ": expected " +
                      std::to_string(dims_.size()) + " cells, got " + std::to_string(cells_.size()));
  }
  for (int idx = 0; idx < dims_.size(); ++idx) {
    const Cell& c = cells_[static_cast<std::size_t>(idx)];
    const std::string where = "layout " + std::to_string(id_) + " cell " + cell_text(c.row, c.col);
    if (c.row != dims_.row_of(idx) || c.col != dims_.col_of(idx)) {
      throw LayoutError(where + ": stored indices do not match position " + std::to_string(idx));
    }
    const auto ec = category_of(c.element);
    if (ec != ElementCategory::Furniture && ec != ElementCategory::None) {
      throw LayoutError(where + ": element slot holds non-furniture kind");
    }
    if (category_of(c.terrain) != ElementCategory::Terrain) {
      throw LayoutError(where + ": terrain slot holds non-terrain kind");
    }
    if (c.obstacle && category_of(*c.obstacle) != ElementCategory::Obstacle) {
      throw LayoutError(where + ": obstacle slot holds non-obstacle kind");
    }
    if (c.height < 0.0 || (c.height > 0.0) != c.has_object()) {
      throw LayoutError(where + ": height must be positive exactly when an object is present");
    }
  }
}

std::vector<double> Layout::heights() const {
  std::vector<double> h(cells_.size());
  std::transform(cells_.begin(), cells_.end(), h.begin(), [](const Cell& c) { return c.height; });
  return h;
}

Layout load_layout(std::string_view source, const HeightDefaults& heights) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source.begin(), source.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw LayoutError("layout parse error at line " + std::to_string(line_of_offset(source, e.byte)) +
                      ": " + e.what());
  }
  if (!doc.is_object()) throw LayoutError("layout: top level must be an object");

  const int id = int_field(doc, "id", "layout");
  GridDims dims;
  dims.rows = int_field(doc, "rows", "layout");
  dims.cols = int_field(doc, "cols", "layout");
  if (!doc.contains("cell_size_m") || !doc["cell_size_m"].is_number()) {
    throw LayoutError("layout: missing numeric field 'cell_size_m'");
  }
  dims.cell_size = doc["cell_size_m"].get<double>();
  if (dims.rows < 1 || dims.cols < 1 || !(dims.cell_size > 0.0)) {
    throw LayoutError("layout: rows, cols and cell_size_m must be positive");
  }

  ElementKind default_terrain = ElementKind::Grass;
  if (doc.contains("default_terrain")) {
    default_terrain = kind_field({{"kind", doc["default_terrain"]}}, "layout default_terrain");
    if (category_of(default_terrain) != ElementCategory::Terrain) {
      throw LayoutError("layout: default_terrain must be a terrain kind");
    }
  }

  std::vector<Cell> cells(static_cast<std::size_t>(dims.size()));
  for (int idx = 0; idx < dims.size(); ++idx) {
    auto& c = cells[static_cast<std::size_t>(idx)];
    c.row = dims.row_of(idx);
    c.col = dims.col_of(idx);
    c.terrain = default_terrain;
  }

  if (doc.contains("terrain")) {
    int n = 0;
    for (const auto& patch : doc["terrain"]) {
      const std::string where = "terrain patch #" + std::to_string(n++);
      const ElementKind kind = kind_field(patch, where);
      if (category_of(kind) != ElementCategory::Terrain) {
        throw LayoutError(where + ": '" + std::string(to_string(kind)) + "' is not a terrain kind");
      }
      const int r0 = int_field(patch, "row0", where), c0 = int_field(patch, "col0", where);
      const int r1 = int_field(patch, "row1", where), c1 = int_field(patch, "col1", where);
      if (!dims.contains(r0, c0) || !dims.contains(r1, c1) || r0 > r1 || c0 > c1) {
        throw LayoutError(where + ": rectangle " + cell_text(r0, c0) + "-" + cell_text(r1, c1) +
                          " out of bounds for " + std::to_string(dims.rows) + "x" +
                          std::to_string(dims.cols) + " grid");
      }
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) cells[static_cast<std::size_t>(dims.index(r, c))].terrain = kind;
    }
  }

  if (doc.contains("placements")) {
    int n = 0;
    for (const auto& p : doc["placements"]) {
      const std::string where = "placement #" + std::to_string(n++);
      const ElementKind kind = kind_field(p, where);
      const int row = int_field(p, "row", where), col = int_field(p, "col", where);
      if (!dims.contains(row, col)) {
        throw LayoutError(where + ": " + std::string(to_string(kind)) + " at " + cell_text(row, col) +
                          " out of bounds for " + std::to_string(dims.rows) + "x" +
                          std::to_string(dims.cols) + " grid");
      }
      double h = heights.of(kind);
      if (p.contains("height_m")) {
        if (!p["height_m"].is_number() || !(p["height_m"].get<double>() > 0.0)) {
          throw LayoutError(where + ": height_m must be a positive number");
        }
        h = p["height_m"].get<double>();
      }
      Cell& cell = cells[static_cast<std::size_t>(dims.index(row, col))];
      switch (category_of(kind)) {
        case ElementCategory::Furniture:
          if (cell.element != ElementKind::Empty) {
            throw LayoutError(where + ": cell " + cell_text(row, col) + " already holds " +
                              std::string(to_string(cell.element)));
          }
          cell.element = kind;
          break;
        case ElementCategory::Obstacle:
          if (cell.obstacle) {
            throw LayoutError(where + ": cell " + cell_text(row, col) + " already holds " +
                              std::string(to_string(*cell.obstacle)));
          }
          cell.obstacle = kind;
          break;
        default:
          throw LayoutError(where + ": '" + std::string(to_string(kind)) +
                            "' cannot be placed; use a terrain patch");
      }
      cell.height = std::max(cell.height, h);
    }
  }
  return Layout(id, dims, std::move(cells));
}

Layout load_layout_file(const std::filesystem::path& path, const HeightDefaults& heights) {
  std::ifstream in(path);
  if (!in) throw LayoutError("cannot open layout file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_layout(buf.str(), heights);
  } catch (const LayoutError& e) {
    throw LayoutError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::Identity: return "Identity";
    case Transform::Rot180: return "Rot180";
    case Transform::HFlip: return "HFlip";
    case Transform::VFlip: return "VFlip";
  }
  return "Identity";
}

std::optional<Transform> parse_transform(std::string_view name) {
  for (Transform t : kTransforms)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

Transform compose(Transform first, Transform second) {
  // Each element is encoded as (row flip, col flip); composition is XOR.
  auto bits = [](Transform t) -> unsigned {
    switch (t) {
      case Transform::Identity: return 0b00;
      case Transform::VFlip: return 0b10;
      case Transform::HFlip: return 0b01;
      case Transform::Rot180: return 0b11;
    }
    return 0;
  };
  switch (bits(first) ^ bits(second)) {
    case 0b10: return Transform::VFlip;
    case 0b01: return Transform::HFlip;
    case 0b11: return Transform::Rot180;
    default: return Transform::Identity;
  }
}

int transform_index(const GridDims& dims, int idx, Transform t) {
  int r = dims.row_of(idx), c = dims.col_of(idx);
  if (t == Transform::Rot180 || t == Transform::VFlip) r = dims.rows - 1 - r;
  if (t == Transform::Rot180 || t == Transform::HFlip) c = dims.cols - 1 - c;
  return dims.index(r, c);
}

Layout transform(const Layout& layout, Transform t) {
  const GridDims& dims = layout.dims();
  std::vector<Cell> cells(layout.cells().size());
  for (int idx = 0; idx < dims.size(); ++idx) {
    const int dst = transform_index(dims, idx, t);
    Cell c = layout.at(idx);
    c.row = dims.row_of(dst);
    c.col = dims.col_of(dst);
    cells[static_cast<std::size_t>(dst)] = c;
  }
  return Layout(layout.id(), dims, std::move(cells));
}

std::vector<int> neighbors8(const GridDims& dims, int idx) {
  if (idx < 0 || idx >= dims.size()) {
    throw std::out_of_range("neighbors8: index " + std::to_string(idx) + " out of range");
  }
  const int r = dims.row_of(idx), c = dims.col_of(idx);
  std::vector<int> out;
  out.reserve(8);
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      if ((dr == 0 && dc == 0) || !dims.contains(r + dr, c + dc)) continue;
      out.push_back(dims.index(r + dr, c + dc));
    }
  return out;
}

}  // namespace prefbench
