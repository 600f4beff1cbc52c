#include "prefbench/models.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace prefbench::models {

using nn::LayerKind;
using nn::Matrix;

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::GNN: return "GNN";
    case ModelKind::CNN2D: return "CNN2D";
    case ModelKind::CNN1D: return "CNN1D";
    case ModelKind::MLP: return "MLP";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (ModelKind k : kModelKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

long count_params(std::span<const LayerKind> layers) {
  long n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

std::vector<LayerKind> layers_for(ModelKind kind, int in, int h) {
  if (in < 1 || h < 1) throw std::invalid_argument("layers_for: widths must be positive");
  std::vector<LayerKind> L;
  switch (kind) {
    case ModelKind::GNN:
      for (int i = 0; i < 5; ++i) {
        L.push_back(LayerKind::gcn(i == 0 ? in : h, h));
        L.push_back(LayerKind::relu());
      }
      L.push_back(LayerKind::gcn(h, 1));
      break;
    case ModelKind::CNN2D:
      for (int i = 0; i < 3; ++i) {
        L.push_back(LayerKind::conv2d(i == 0 ? in : h, h, 3));
        L.push_back(LayerKind::relu());
      }
      L.push_back(LayerKind::conv1x1(h, 1));
      break;
    case ModelKind::CNN1D:
      L.push_back(LayerKind::conv1d(in, h, 3));
      L.push_back(LayerKind::relu());
      L.push_back(LayerKind::conv1d(h, h, 3));
      L.push_back(LayerKind::relu());
      L.push_back(LayerKind::conv1d(h, 1, 3));
      break;
    case ModelKind::MLP:
      for (int i = 0; i < 3; ++i) {
        L.push_back(LayerKind::dense(i == 0 ? kContextCells * in : h, h));
        L.push_back(LayerKind::relu());
      }
      L.push_back(LayerKind::dense(h, 1));
      break;
  }
  L.push_back(LayerKind::sigmoid());
  return L;
}

namespace {

// Narrows the widest non-output trainable layer by one unit.
bool trim_once(std::vector<LayerKind>& layers) {
  std::vector<std::size_t> trainable;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].trainable()) trainable.push_back(i);
  if (trainable.size() < 2) return false;
  std::size_t widest = trainable[0];
  std::size_t next = trainable[1];
  for (std::size_t j = 0; j + 1 < trainable.size(); ++j) {
    if (layers[trainable[j]].out > layers[widest].out) {
      widest = trainable[j];
      next = trainable[j + 1];
    }
  }
  if (layers[widest].out <= 1) return false;
  --layers[widest].out;
  --layers[next].in;
  return true;
}

}  // namespace

BudgetFit fit_budget(const std::function<std::vector<LayerKind>(int)>& family, Budget budget, int max_width) {
  if (budget.lo > budget.hi) throw BuildError("budget: lower bound above upper bound");
  for (int h = 1; h <= max_width; ++h) {
    auto layers = family(h);
    long n = count_params(layers);
    if (n < budget.lo) continue;
    BudgetFit fit{h, std::move(layers), n, false};
    while (fit.param_count > budget.hi) {
      if (!trim_once(fit.layers)) break;
      fit.param_count = count_params(fit.layers);
      fit.trimmed = true;
    }
    if (!budget.contains(fit.param_count)) {
      throw BuildError("budget [" + std::to_string(budget.lo) + ", " + std::to_string(budget.hi) +
                       "] infeasible: width " + std::to_string(h) + " gives " + std::to_string(n) +
                       " parameters and trimming ends at " + std::to_string(fit.param_count));
    }
    return fit;
  }
  throw BuildError("budget lower bound " + std::to_string(budget.lo) + " not reached below width " +
                   std::to_string(max_width));
}

ArchSpec build(ModelKind kind, int input_width, Budget budget) {
  BudgetFit fit;
  try {
    fit = fit_budget([&](int h) { return layers_for(kind, input_width, h); }, budget);
  } catch (const BuildError& e) {
    throw BuildError(std::string(to_string(kind)) + ": " + e.what());
  }
  return ArchSpec{kind, input_width, fit.hidden_width, std::move(fit.layers), fit.param_count, fit.trimmed};
}

const nn::Adjacency& grid_adjacency(const GridDims& dims) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<nn::Adjacency>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{dims.rows, dims.cols}];
  if (!slot) slot = std::make_unique<nn::Adjacency>(nn::Adjacency::grid8(dims));
  return *slot;
}

nn::BatchGeometry sample_geometry(ModelKind kind, const GridDims& dims) {
  nn::BatchGeometry g;
  g.samples = 1;
  g.nodes = dims.size();
  g.grid = dims;
  if (kind == ModelKind::GNN) g.adjacency = &grid_adjacency(dims);
  return g;
}

void encode_input(ModelKind kind, const Sample& sample, Transform t, Matrix& out, int row0) {
  const FeatureTensor& f = sample.features;
  const GridDims& dims = f.dims;
  const int F = f.width;
  const int width = F + static_cast<int>(kActivities.size());
  const int row_width = kind == ModelKind::MLP ? kContextCells * width : width;
  if (f.values.size() != static_cast<std::size_t>(dims.size()) * F) {
    throw std::invalid_argument("encode_input: feature tensor size does not match its grid");
  }
  if (out.cols() != row_width || row0 < 0 || row0 + dims.size() > out.rows()) {
    throw std::invalid_argument("encode_input: output block has shape " + std::to_string(out.rows()) + "x" +
                                std::to_string(out.cols()) + ", need " + std::to_string(row_width) +
                                " columns and " + std::to_string(dims.size()) + " rows from " +
                                std::to_string(row0));
  }
  const int act = static_cast<int>(sample.activity);

  // Cell d of the transformed grid reads cell t(d) of the stored one; every
  // transform is its own inverse.
  auto base = [&](int d, double* dst) {
    const auto src = f.cell(transform_index(dims, d, t));
    std::copy(src.begin(), src.end(), dst);
    for (int a = 0; a < static_cast<int>(kActivities.size()); ++a) dst[F + a] = a == act ? 1.0 : 0.0;
  };

  if (kind != ModelKind::MLP) {
    for (int d = 0; d < dims.size(); ++d) base(d, out.row(row0 + d).data());
    return;
  }
  for (int d = 0; d < dims.size(); ++d) {
    double* row = out.row(row0 + d).data();
    const int r = dims.row_of(d), c = dims.col_of(d);
    int slot = 0;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc, ++slot) {
        double* dst = row + slot * width;
        if (dims.contains(r + dr, c + dc)) {
          base(dims.index(r + dr, c + dc), dst);
        } else {
          std::fill(dst, dst + width, 0.0);
        }
      }
    }
  }
}

Matrix model_input(ModelKind kind, const Sample& sample, Transform t) {
  const int width = sample.features.width + static_cast<int>(kActivities.size());
  Matrix m(sample.features.dims.size(), kind == ModelKind::MLP ? kContextCells * width : width);
  encode_input(kind, sample, t, m, 0);
  return m;
}

SampleView::SampleView(ModelKind kind, std::span<const Sample> store, std::span<const SampleRef> refs,
                       std::string_view agent)
    : kind_(kind), store_(store) {
  for (const auto& r : refs) {
    if (r.index >= store.size()) throw std::out_of_range("SampleView: reference past the end of the store");
    if (agent.empty() || store[r.index].meta.agent_id == agent) refs_.push_back(r);
  }
}

int SampleView::group_of(std::size_t i) const { return store_[refs_.at(i).index].meta.layout_id; }

void SampleView::assemble(std::span<const std::size_t> indices, Matrix& inputs,
                          std::vector<double>& labels) const {
  if (indices.empty()) throw std::invalid_argument("SampleView: empty batch");
  const GridDims dims = store_[refs_.at(indices[0]).index].features.dims;
  const int nodes = dims.size();
  const int width = FeatureSchema::kWidth + static_cast<int>(kActivities.size());
  inputs.resize(static_cast<Eigen::Index>(indices.size()) * nodes,
                kind_ == ModelKind::MLP ? kContextCells * width : width);
  labels.assign(indices.size() * static_cast<std::size_t>(nodes), 0.0);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const SampleRef& ref = refs_.at(indices[b]);
    const Sample& s = store_[ref.index];
    if (s.features.dims.size() != nodes) throw std::invalid_argument("SampleView: mixed grid sizes in one batch");
    encode_input(kind_, s, ref.aug, inputs, static_cast<int>(b) * nodes);
    labels[b * nodes + static_cast<std::size_t>(transform_index(dims, s.label_index, ref.aug))] = 1.0;
  }
}

std::vector<double> predict(nn::Network& net, const ArchSpec& spec, const Sample& sample) {
  if (sample.features.width + static_cast<int>(kActivities.size()) != spec.input_width) {
    throw std::invalid_argument("predict: sample width " + std::to_string(sample.features.width) +
                                " plus activity does not match model input width " +
                                std::to_string(spec.input_width));
  }
  const Matrix x = model_input(spec.kind, sample);
  const Matrix& p = net.forward(x, sample_geometry(spec.kind, sample.features.dims));
  return {p.data(), p.data() + p.size()};
}

std::string describe(const ArchSpec& spec) {
  std::ostringstream os;
  os << to_string(spec.kind) << " (input " << spec.row_width() << " per cell, hidden width " << spec.hidden_width
     << (spec.trimmed ? ", trimmed" : "") << ")\n";
  for (const auto& l : spec.layers) os << "  " << l.describe() << '\n';
  os << "  parameters: " << spec.param_count << '\n';
  return os.str();
}

}  // namespace prefbench::models
