#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "prefbench/agentsim.hpp"
#include "prefbench/features.hpp"
#include "prefbench/layout.hpp"

namespace prefbench {

struct SampleMeta {
  int layout_id = 0;
  std::string agent_id;
  double hour = 0.0;
  Transform aug = Transform::Identity;
  bool operator==(const SampleMeta&) const = default;
};

/// One choice event: the snapshot features, the activity, and the single
/// chosen cell.
struct Sample {
  FeatureTensor features;
  Activity activity = Activity::Walk;
  int label_index = -1;
  SampleMeta meta;

  std::vector<double> label_grid() const;
  bool operator==(const Sample&) const = default;
};

Sample sample_from_event(const Layout& layout, const ChoiceEvent& event, const EnvParams& env = {});
std::vector<Sample> samples_from_events(const Layout& layout, std::span<const ChoiceEvent> events,
                                        const EnvParams& env = {});

/// Applies `t` to the features and label jointly; the tag composes with any
/// transform already applied.
Sample augment(const Sample& sample, Transform t);

/// Every sample under all four transforms (4n samples).
std::vector<Sample> expand_augmented(std::span<const Sample> samples);

struct FoldPlan {
  int fold_id = 0;
  int test_layout = 0;
  std::vector<int> train_layouts;
  double val_fraction = 0.2;
};

/// A sample of the pooled store, viewed under a transform.
struct SampleRef {
  std::size_t index = 0;
  Transform aug = Transform::Identity;
  bool operator==(const SampleRef&) const = default;
};

struct Fold {
  FoldPlan plan;
  std::vector<SampleRef> train;  // augmented: 4 refs per base sample
  std::vector<SampleRef> val;    // identity only
  std::vector<SampleRef> test;   // identity only

  /// Copies of the referenced samples with augmentation applied.
  static std::vector<Sample> materialize(std::span<const Sample> store, std::span<const SampleRef> refs);
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Leave-one-layout-out folds over a pooled store. Fold k holds out the k-th
/// smallest layout id. The remaining samples are split into train and val per
/// (layout, agent) group with round(val_fraction * n) validation samples drawn
/// from a stream keyed by the fold id; only the train part is augmented.
std::vector<Fold> build_folds(std::span<const Sample> store, double val_fraction, std::uint64_t seed);

/// Line-delimited JSON, one record per sample:
///   {layout_id, agent_id, hour, activity, aug, rows, cols, F, features, label_index}
void write_dataset(std::ostream& out, std::span<const Sample> samples);
std::vector<Sample> read_dataset(std::istream& in);
void write_dataset_file(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> read_dataset_file(const std::filesystem::path& path);

}  // namespace prefbench
