#include "prefbench/nn/network.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prefbench::nn {

Network::Network(std::vector<LayerKind> kinds, std::uint64_t seed) : kinds_(std::move(kinds)) {
  if (kinds_.empty()) throw std::invalid_argument("Network: empty layer list");
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    Rng rng(seed, {key_of("init"), static_cast<std::uint64_t>(i)});
    layers_.push_back(make_layer(kinds_[i], rng));
  }
  inputs_.assign(layers_.size(), nullptr);
}

long Network::param_count() const {
  long total = 0;
  for (const auto& k : kinds_) total += k.param_count();
  return total;
}

const Matrix& Network::forward(const Matrix& x, const BatchGeometry& geom) {
  const Matrix* cur = &x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    inputs_[i] = cur;
    cur = &layers_[i]->forward(*cur, geom);
  }
  return *cur;
}

void Network::backward_range(const Matrix& grad, std::size_t end, const BatchGeometry& geom) {
  const Matrix* g = &grad;
  for (std::size_t i = end; i-- > 0;) {
    g = &layers_[i]->backward(*g, geom, i > 0);
  }
}

void Network::backward(const Matrix& d_output, const BatchGeometry& geom) {
  backward_range(d_output, layers_.size(), geom);
}

void Network::backward_from_logits(const Matrix& d_logits, const BatchGeometry& geom) {
  if (kinds_.back().type != LayerType::Sigmoid) {
    throw std::logic_error("backward_from_logits: last layer is not a Sigmoid");
  }
  backward_range(d_logits, layers_.size() - 1, geom);
}

void Network::zero_grad() {
  for (Tensor* t : params()) std::fill(t->grad.begin(), t->grad.end(), 0.0);
}

std::vector<Tensor*> Network::params() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (Tensor* t : l->params()) out.push_back(t);
  return out;
}

std::vector<std::vector<double>> Network::snapshot() const {
  std::vector<std::vector<double>> out;
  for (const auto& l : layers_)
    for (Tensor* t : l->params()) out.push_back(t->data);
  return out;
}

void Network::restore(const std::vector<std::vector<double>>& values) {
  auto ps = params();
  if (ps.size() != values.size()) throw std::invalid_argument("Network::restore: tensor count mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i]->data.size() != values[i].size()) {
      throw std::invalid_argument("Network::restore: tensor size mismatch");
    }
    ps[i]->data = values[i];
  }
}

double Network::min_abs_relu_input() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (kinds_[i].type != LayerType::ReLU || inputs_[i] == nullptr) continue;
    m = std::min(m, inputs_[i]->cwiseAbs().minCoeff());
  }
  return m;
}

nlohmann::json Network::to_json() const {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& k : kinds_) {
    j["layers"].push_back({{"type", to_string(k.type)}, {"in", k.in}, {"out", k.out}, {"k", k.kernel}});
  }
  j["params"] = nlohmann::json::array();
  for (const auto& l : layers_)
    for (Tensor* t : l->params()) j["params"].push_back({{"shape", t->shape}, {"data", t->data}});
  return j;
}

Network Network::from_json(const nlohmann::json& j) {
  std::vector<LayerKind> kinds;
  for (const auto& l : j.at("layers")) {
    kinds.push_back({parse_layer_type(l.at("type").get<std::string>()), l.at("in").get<int>(),
                     l.at("out").get<int>(), l.at("k").get<int>()});
  }
  Network net(std::move(kinds), 0);
  auto ps = net.params();
  const auto& stored = j.at("params");
  if (stored.size() != ps.size()) throw std::invalid_argument("Network::from_json: tensor count mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (stored[i].at("shape").get<std::vector<int>>() != ps[i]->shape) {
      throw std::invalid_argument("Network::from_json: shape mismatch in tensor " + std::to_string(i));
    }
    ps[i]->data = stored[i].at("data").get<std::vector<double>>();
  }
  return net;
}

}  // namespace prefbench::nn
