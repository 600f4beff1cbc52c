#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prefbench/dataset.hpp"
#include "prefbench/nn/network.hpp"
#include "prefbench/nn/trainer.hpp"

namespace prefbench::models {

enum class ModelKind : std::uint8_t { GNN, CNN2D, CNN1D, MLP };

inline constexpr std::array<ModelKind, 4> kModelKinds{ModelKind::GNN, ModelKind::CNN2D, ModelKind::CNN1D,
                                                      ModelKind::MLP};

std::string_view to_string(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view name);

/// Per-cell features plus the activity one-hot.
inline constexpr int kInputWidth = FeatureSchema::kWidth + static_cast<int>(kActivities.size());
inline constexpr int kContextCells = 9;

struct Budget {
  long lo = 74000;
  long hi = 76000;
  bool contains(long n) const { return n >= lo && n <= hi; }
};

struct ArchSpec {
  ModelKind kind = ModelKind::GNN;
  int input_width = kInputWidth;
  int hidden_width = 0;
  std::vector<nn::LayerKind> layers;
  long param_count = 0;
  bool trimmed = false;

  /// Width of one row of network input (198 for the MLP's 3x3 context).
  int row_width() const { return kind == ModelKind::MLP ? kContextCells * input_width : input_width; }
  bool operator==(const ArchSpec&) const = default;
};

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

long count_params(std::span<const nn::LayerKind> layers);

/// Layer list of `kind` with a uniform hidden width `h`.
std::vector<nn::LayerKind> layers_for(ModelKind kind, int input_width, int h);

struct BudgetFit {
  int hidden_width = 0;
  std::vector<nn::LayerKind> layers;
  long param_count = 0;
  bool trimmed = false;
};

/// Smallest h with count >= lo. If that overshoots hi, the widest hidden layer
/// (first on ties) is narrowed one unit at a time until the count fits.
BudgetFit fit_budget(const std::function<std::vector<nn::LayerKind>(int)>& family, Budget budget,
                     int max_width = 4096);

ArchSpec build(ModelKind kind, int input_width = kInputWidth, Budget budget = {});

/// Cached 8-neighbor adjacency for a grid.
const nn::Adjacency& grid_adjacency(const GridDims& dims);

/// Geometry of a single sample for `kind` on `dims`.
nn::BatchGeometry sample_geometry(ModelKind kind, const GridDims& dims);

/// Writes the model input of one sample, viewed under `t`, into rows
/// [row0, row0 + cells) of `out`.
void encode_input(ModelKind kind, const Sample& sample, Transform t, nn::Matrix& out, int row0);
nn::Matrix model_input(ModelKind kind, const Sample& sample, Transform t = Transform::Identity);

/// Store samples selected by reference, optionally filtered to one agent.
class SampleView final : public nn::SampleSet {
 public:
  SampleView(ModelKind kind, std::span<const Sample> store, std::span<const SampleRef> refs,
             std::string_view agent = {});

  std::size_t size() const override { return refs_.size(); }
  int group_of(std::size_t i) const override;
  void assemble(std::span<const std::size_t> indices, nn::Matrix& inputs,
                std::vector<double>& labels) const override;
  const std::vector<SampleRef>& refs() const { return refs_; }

 private:
  ModelKind kind_;
  std::span<const Sample> store_;
  std::vector<SampleRef> refs_;
};

/// Per-cell probabilities for one sample.
std::vector<double> predict(nn::Network& net, const ArchSpec& spec, const Sample& sample);

/// Layer list and exact parameter count, one model per line block.
std::string describe(const ArchSpec& spec);

}  // namespace prefbench::models
