#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prefbench/envdyn.hpp"
#include "prefbench/features.hpp"
#include "prefbench/layout.hpp"
#include "prefbench/rng.hpp"

namespace prefbench {

enum class Activity : std::uint8_t { Walk, Sit, Eat, Play };

inline constexpr std::array<Activity, 4> kActivities{Activity::Walk, Activity::Sit, Activity::Eat,
                                                     Activity::Play};

std::string_view to_string(Activity a);
std::optional<Activity> parse_activity(std::string_view name);

/// Walk -> Trail/RunningTrack terrain, Sit -> Bench, Eat -> PicnicTable,
/// Play -> Playground.
bool affords(const Cell& cell, Activity activity);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsatisfiableActivity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws UnsatisfiableActivity naming the first activity no cell affords.
void require_all_activities_afforded(const Layout& layout);

struct AgentProfile {
  std::string id;
  std::map<std::string, double> weights;  // feature name -> utility weight
  std::array<double, 4> activity_mix{0.25, 0.25, 0.25, 0.25};
  double shade_seeking = 0.0;
  double social_affinity = 0.0;

  /// Checks weight keys against the feature schema and the mix against the
  /// probability simplex.
  void validate() const;
  std::array<double, FeatureSchema::kWidth> weight_vector() const;
};

/// u = sum_k w_k x_k + shade_seeking * shadow
///     + social_affinity * (own-cell occupancy + 8-neighbor occupancy)
double utility(const AgentProfile& profile, std::span<const double> features);

struct ChoiceEvent {
  int layout_id = 0;
  std::string agent_id;
  Activity activity = Activity::Walk;
  double hour = 0.0;
  int chosen_cell = -1;
  std::vector<int> occupancy;  // agent count per cell at decision time

  bool operator==(const ChoiceEvent&) const = default;
};

/// Argmax of utility (+ optional Gumbel noise of scale `tau`) over the cells
/// that afford `activity`; ties go to the lowest flat index.
int choose_cell(const AgentProfile& profile, Activity activity, const Layout& layout,
                const FeatureTensor& features, double tau, Rng& rng);

struct ScheduledEvent {
  double hour = 12.0;
  int agent = 0;  // index into the profile list
  Activity activity = Activity::Walk;
};

struct ScheduleParams {
  int events_per_agent = 40;
  std::vector<double> hours{8, 10, 12, 14, 16, 18};
};

/// Round-robin schedule: event j of every agent happens at
/// hours[j * |hours| / events_per_agent]; activities are drawn from each
/// profile's mix with a per-agent seeded stream.
std::vector<ScheduledEvent> default_schedule(std::span<const AgentProfile> profiles,
                                             const ScheduleParams& params, std::uint64_t seed);

struct SimulationParams {
  double tau = 0.1;
  EnvParams env{};
};

/// Processes the schedule in order. Each agent stays on its chosen cell until
/// its next event, so later decisions see the updated occupancy.
std::vector<ChoiceEvent> run_simulation(const Layout& layout, std::span<const AgentProfile> profiles,
                                        std::span<const ScheduledEvent> schedule,
                                        const SimulationParams& params, std::uint64_t seed);

}  // namespace prefbench
