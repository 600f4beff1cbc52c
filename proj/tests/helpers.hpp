#pragma once

#include <filesystem>
#include <string>

#include "prefbench/layout.hpp"
#include "prefbench/rng.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return PREFBENCH_SOURCE_DIR; }

inline std::filesystem::path layout_file(int id) {
  return source_dir() / "data" / "layouts" / ("layout" + std::to_string(id) + ".json");
}

// Small layout on a custom grid: every cell Grass, then the given
// furniture/obstacle placements.
inline prefbench::Layout make_layout(int rows, int cols, const std::string& placements_json,
                                     const std::string& terrain_json = "[]", int id = 9) {
  const std::string doc = "{\"id\":" + std::to_string(id) + ",\"rows\":" + std::to_string(rows) +
                          ",\"cols\":" + std::to_string(cols) +
                          ",\"cell_size_m\":0.75,\"default_terrain\":\"Grass\",\"terrain\":" + terrain_json +
                          ",\"placements\":" + placements_json + "}";
  return prefbench::load_layout(doc);
}

}  // namespace testing
