#include "prefbench/agentsim.hpp"

#include <cmath>
#include <numeric>

namespace prefbench {

namespace {
constexpr std::array<std::string_view, 4> kActivityNames{"Walk", "Sit", "Eat", "Play"};
}

std::string_view to_string(Activity a) { return kActivityNames[static_cast<std::size_t>(a)]; }

std::optional<Activity> parse_activity(std::string_view name) {
  for (Activity a : kActivities)
    if (to_string(a) == name) return a;
  return std::nullopt;
}

bool affords(const Cell& cell, Activity activity) {
  switch (activity) {
    case Activity::Walk:
      return cell.terrain == ElementKind::Trail || cell.terrain == ElementKind::RunningTrack;
    case Activity::Sit: return cell.element == ElementKind::Bench;
    case Activity::Eat: return cell.element == ElementKind::PicnicTable;
    case Activity::Play: return cell.element == ElementKind::Playground;
  }
  return false;
}

void require_all_activities_afforded(const Layout& layout) {
  for (Activity a : kActivities) {
    bool any = false;
    for (const Cell& c : layout.cells()) any = any || affords(c, a);
    if (!any) {
      throw UnsatisfiableActivity("layout " + std::to_string(layout.id()) +
                                  ": no cell affords activity " + std::string(to_string(a)));
    }
  }
}

void AgentProfile::validate() const {
  (void)weight_vector();
  double total = 0.0;
  for (double p : activity_mix) {
    if (!(p >= 0.0)) throw ConfigError("profile " + id + ": activity_mix entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("profile " + id + ": activity_mix sums to " + std::to_string(total));
  }
}

std::array<double, FeatureSchema::kWidth> AgentProfile::weight_vector() const {
  std::array<double, FeatureSchema::kWidth> w{};
  for (const auto& [name, value] : weights) {
    const auto slot = FeatureSchema::index_of(name);
    if (!slot) throw ConfigError("profile " + id + ": unknown feature '" + name + "' in weights");
    w[static_cast<std::size_t>(*slot)] = value;
  }
  return w;
}

namespace {

double utility_with(const std::array<double, FeatureSchema::kWidth>& w, const AgentProfile& profile,
                    std::span<const double> x) {
  double u = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) u += w[k] * x[k];
  u += profile.shade_seeking * x[FeatureSchema::kShadow];
  u += profile.social_affinity *
       (x[FeatureSchema::kOccupancyOwn] + x[FeatureSchema::kOccupancyNeighbors]);
  return u;
}

// Standard Gumbel draw; the uniform is shifted into the open interval (0, 1).
double gumbel(Rng& rng) {
  const double u = (static_cast<double>(rng.next() >> 11) + 0.5) * 0x1.0p-53;
  return -std::log(-std::log(u));
}

}  // namespace

double utility(const AgentProfile& profile, std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(FeatureSchema::kWidth)) {
    throw std::invalid_argument("utility: feature vector has wrong width");
  }
  return utility_with(profile.weight_vector(), profile, features);
}

int choose_cell(const AgentProfile& profile, Activity activity, const Layout& layout,
                const FeatureTensor& features, double tau, Rng& rng) {
  if (features.dims != layout.dims()) throw std::invalid_argument("choose_cell: grid mismatch");
  const auto w = profile.weight_vector();
  int best = -1;
  double best_score = 0.0;
  for (int idx = 0; idx < layout.dims().size(); ++idx) {
    if (!affords(layout.at(idx), activity)) continue;
    double score = utility_with(w, profile, features.cell(idx));
    if (tau > 0.0) score += tau * gumbel(rng);
    if (best < 0 || score > best_score) {
      best = idx;
      best_score = score;
    }
  }
  if (best < 0) {
    throw UnsatisfiableActivity("layout " + std::to_string(layout.id()) + ": no cell affords " +
                                std::string(to_string(activity)));
  }
  return best;
}

std::vector<ScheduledEvent> default_schedule(std::span<const AgentProfile> profiles,
                                             const ScheduleParams& params, std::uint64_t seed) {
  if (params.events_per_agent < 1 || params.hours.empty()) {
    throw ConfigError("schedule: events_per_agent and hours must be non-empty");
  }
  std::vector<Rng> streams;
  for (const auto& p : profiles) streams.emplace_back(seed, std::initializer_list<std::uint64_t>{key_of("schedule"), key_of(p.id)});

  std::vector<ScheduledEvent> out;
  const auto n_hours = params.hours.size();
  for (int j = 0; j < params.events_per_agent; ++j) {
    const double hour =
        params.hours[static_cast<std::size_t>(j) * n_hours / static_cast<std::size_t>(params.events_per_agent)];
    for (std::size_t a = 0; a < profiles.size(); ++a) {
      const double u = streams[a].uniform();
      double acc = 0.0;
      Activity pick = kActivities.back();
      for (Activity act : kActivities) {
        const double p = profiles[a].activity_mix[static_cast<std::size_t>(act)];
        acc += p;
        if (p > 0.0 && u < acc) {
          pick = act;
          break;
        }
      }
      // Guard against rounding leaving u above the cumulative sum.
      while (profiles[a].activity_mix[static_cast<std::size_t>(pick)] <= 0.0 &&
             pick != kActivities.front()) {
        pick = static_cast<Activity>(static_cast<int>(pick) - 1);
      }
      out.push_back({hour, static_cast<int>(a), pick});
    }
  }
  return out;
}

std::vector<ChoiceEvent> run_simulation(const Layout& layout, std::span<const AgentProfile> profiles,
                                        std::span<const ScheduledEvent> schedule,
                                        const SimulationParams& params, std::uint64_t seed) {
  if (schedule.empty()) throw ConfigError("run_simulation: empty schedule");
  for (const auto& p : profiles) p.validate();

  const GridDims& dims = layout.dims();
  Rng rng(seed, {key_of("simulation"), static_cast<std::uint64_t>(layout.id())});
  std::vector<int> occupancy(static_cast<std::size_t>(dims.size()), 0);
  std::vector<int> position(profiles.size(), -1);
  std::map<double, EnvField> env_cache;

  std::vector<ChoiceEvent> events;
  events.reserve(schedule.size());
  for (const auto& ev : schedule) {
    if (ev.agent < 0 || static_cast<std::size_t>(ev.agent) >= profiles.size()) {
      throw ConfigError("run_simulation: schedule references unknown agent index " +
                        std::to_string(ev.agent));
    }
    const auto a = static_cast<std::size_t>(ev.agent);
    if (position[a] >= 0) --occupancy[static_cast<std::size_t>(position[a])];

    auto it = env_cache.find(ev.hour);
    if (it == env_cache.end()) it = env_cache.emplace(ev.hour, compute_env(layout, ev.hour, params.env)).first;
    const FeatureTensor features = encode_features(layout, ev.hour, it->second, occupancy);

    ChoiceEvent ce;
    ce.layout_id = layout.id();
    ce.agent_id = profiles[a].id;
    ce.activity = ev.activity;
    ce.hour = ev.hour;
    ce.occupancy = occupancy;
    ce.chosen_cell = choose_cell(profiles[a], ev.activity, layout, features, params.tau, rng);

    position[a] = ce.chosen_cell;
    ++occupancy[static_cast<std::size_t>(ce.chosen_cell)];
    events.push_back(std::move(ce));
  }
  return events;
}

}  // namespace prefbench
