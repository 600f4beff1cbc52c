#include "prefbench/envdyn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace prefbench {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// sin(pi * (hour - 6) / 12), evaluated from the nearer end of the day so that
// sunrise and sunset both give exactly zero.
double day_sine(double hour) {
  const double x = (hour - 6.0) / 12.0;
  if (x == 0.0 || x == 1.0) return 0.0;
  if (x > 0.0 && x < 1.0) return std::sin(std::numbers::pi * std::min(x, 1.0 - x));
  return std::sin(std::numbers::pi * x);
}

// Snap to a 1e-9 lattice so that e.g. sin(30 deg) is exactly 0.5 and rays
// toward opposite azimuths are exact mirror images.
double snap(double v) { return std::round(v * 1e9) / 1e9; }

}  // namespace

SunState sun_state(double hour, const EnvParams& params) {
  if (!(hour >= 0.0 && hour < 24.0)) {
    throw std::out_of_range("sun_state: hour " + std::to_string(hour) + " outside [0, 24)");
  }
  SunState s;
  s.hour = hour;
  s.elevation = (hour >= 6.0 && hour <= 18.0) ? 90.0 * day_sine(hour) : params.night_elevation;
  double az = std::fmod(90.0 + 15.0 * (hour - 12.0), 360.0);
  if (az < 0.0) az += 360.0;
  s.azimuth = az;
  return s;
}

std::vector<std::uint8_t> shadow_map(const Layout& layout, const SunState& sun,
                                     const EnvParams& params) {
  const GridDims& dims = layout.dims();
  std::vector<std::uint8_t> shadow(static_cast<std::size_t>(dims.size()), 1);
  if (sun.elevation <= 0.0) return shadow;

  const double tan_elev = std::tan(sun.elevation * kDegToRad);
  const double dr = snap(std::cos(sun.azimuth * kDegToRad));
  const double dc = snap(std::sin(sun.azimuth * kDegToRad));
  const std::vector<double> heights = layout.heights();
  constexpr double kStep = 0.25;
  const int max_steps = static_cast<int>(std::ceil((params.max_ray_cells + 1.0) / kStep));

  for (int idx = 0; idx < dims.size(); ++idx) {
    const int r0 = dims.row_of(idx), c0 = dims.col_of(idx);
    int last_r = r0, last_c = c0;
    bool shaded = false;
    for (int k = 1; k <= max_steps && !shaded; ++k) {
      const double s = kStep * k;
      // round the offset, not the position, so opposite rays mirror exactly
      const int r = r0 + static_cast<int>(std::lround(s * dr));
      const int c = c0 + static_cast<int>(std::lround(s * dc));
      if (!dims.contains(r, c)) break;
      if (r == last_r && c == last_c) continue;
      last_r = r;
      last_c = c;
      const double d = std::hypot(static_cast<double>(r - r0), static_cast<double>(c - c0));
      if (d > params.max_ray_cells) continue;
      if (heights[static_cast<std::size_t>(dims.index(r, c))] > d * dims.cell_size * tan_elev) {
        shaded = true;
      }
    }
    shadow[static_cast<std::size_t>(idx)] = shaded ? 1 : 0;
  }
  return shadow;
}

namespace {

std::vector<double> light_from_shadow(const std::vector<std::uint8_t>& shadow, const SunState& sun,
                                      const EnvParams& params) {
  const double clear = std::max(0.0, std::sin(sun.elevation * kDegToRad));
  std::vector<double> light(shadow.size());
  for (std::size_t i = 0; i < shadow.size(); ++i) {
    light[i] = clear * (1.0 - params.shade_light_factor * shadow[i]);
  }
  return light;
}

std::vector<double> temperature_from_shadow(const std::vector<std::uint8_t>& shadow,
                                            const SunState& sun, const EnvParams& params) {
  const double base =
      params.base_temperature + params.temperature_amplitude * std::max(0.0, day_sine(sun.hour));
  std::vector<double> temp(shadow.size());
  for (std::size_t i = 0; i < shadow.size(); ++i) {
    temp[i] = std::max(params.min_temperature, base - params.shade_penalty * shadow[i]);
  }
  return temp;
}

}  // namespace

std::vector<double> light_map(const Layout& layout, const SunState& sun, const EnvParams& params) {
  return light_from_shadow(shadow_map(layout, sun, params), sun, params);
}

std::vector<double> temperature_map(const Layout& layout, const SunState& sun,
                                    const EnvParams& params) {
  return temperature_from_shadow(shadow_map(layout, sun, params), sun, params);
}

EnvField compute_env(const Layout& layout, double hour, const EnvParams& params) {
  const SunState sun = sun_state(hour, params);
  const auto shadow = shadow_map(layout, sun, params);
  EnvField env;
  env.temperature = temperature_from_shadow(shadow, sun, params);
  env.light = light_from_shadow(shadow, sun, params);
  env.shadow.assign(shadow.begin(), shadow.end());
  return env;
}

}  // namespace prefbench
