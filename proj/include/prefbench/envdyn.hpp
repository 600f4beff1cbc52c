#pragma once

#include <cstdint>
#include <vector>

#include "prefbench/layout.hpp"

namespace prefbench {

/// Simulated sun. Azimuth is measured clockwise from grid-north, which is the
/// +row direction; azimuth 90 points along +col.
struct SunState {
  double hour = 12.0;
  double elevation = 90.0;  // degrees
  double azimuth = 90.0;    // degrees in [0, 360)
};

/// Tunables of the environment model; every field can be overridden from the
/// experiment config.
struct EnvParams {
  double max_ray_cells = 16.0;
  double base_temperature = 18.0;
  double temperature_amplitude = 12.0;
  double shade_penalty = 4.0;
  double min_temperature = 10.0;
  double shade_light_factor = 0.8;
  double night_elevation = -10.0;
};

struct EnvField {
  std::vector<double> temperature;
  std::vector<double> light;
  std::vector<double> shadow;
};

SunState sun_state(double hour, const EnvParams& params = {});

/// Binary shadow per cell (1 = shadowed). A cell is shadowed at night, or when
/// an occluder on the ray toward the sun, at horizontal distance d cells with
/// d <= max_ray_cells, is taller than d * cell_size * tan(elevation).
std::vector<std::uint8_t> shadow_map(const Layout& layout, const SunState& sun,
                                     const EnvParams& params = {});

std::vector<double> light_map(const Layout& layout, const SunState& sun,
                              const EnvParams& params = {});
std::vector<double> temperature_map(const Layout& layout, const SunState& sun,
                                    const EnvParams& params = {});

/// All three fields for one hour, sharing a single shadow pass.
EnvField compute_env(const Layout& layout, double hour, const EnvParams& params = {});

}  // namespace prefbench
