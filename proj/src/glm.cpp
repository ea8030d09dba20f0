#include "sgdbench/glm.hpp"

#include <cmath>
#include <stdexcept>

namespace sgdbench {

const char* task_name(Task t) { return t == Task::LR ? "lr" : "svm"; }

std::optional<Task> task_from_name(std::string_view name) {
  if (name == "lr") return Task::LR;
  if (name == "svm") return Task::SVM;
  return std::nullopt;
}

void Hyperparams::validate(std::size_t n_examples) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (batch_b < 1 || batch_b > n_examples)
    throw std::invalid_argument("batch size must be in [1, N]");
  if (epochs < 1) throw std::invalid_argument("epoch count must be >= 1");
  if (!(step_decay > 0.0)) throw std::invalid_argument("step decay must be positive");
}

double point_loss_from_margin(Task task, double z, double y) {
  double m = y * z;
  if (task == Task::LR) return stable_softplus(-m);  // log(1 + e^{-y x.w})
  return m < 1.0 ? 1.0 - m : 0.0;                    // max(0, 1 - y x.w)
}

double point_gradient_coefficient(Task task, double z, double y) {
  double m = y * z;
  if (task == Task::LR) return stable_sigmoid(-m) * -y;  // -y e^{-m} / (1 + e^{-m})
  return m < 1.0 ? -y : 0.0;  // zero subgradient at the margin itself
}

namespace {

void check_dims(const SparseVec& x, std::size_t dim) {
  for (std::uint32_t j : x.indices)
    if (j >= dim) throw std::invalid_argument("example index out of model range");
}

}  // namespace

double point_loss(Task task, std::span<const double> w, const SparseVec& x, double y) {
  check_dims(x, w.size());
  return point_loss_from_margin(task, example_dot(x.view(), w.data()), y);
}

double point_loss(Task task, const Dataset& ds, std::size_t e, std::span<const double> w) {
  if (w.size() != ds.n_features) throw std::invalid_argument("model/dataset dim mismatch");
  double z = 0.0;
  for_example(ds, e, [&](std::uint32_t j, double x) { z += x * w[j]; });
  return point_loss_from_margin(task, z, ds.labels[e]);
}

SparseVec point_gradient(Task task, std::span<const double> w, const SparseVec& x, double y) {
  check_dims(x, w.size());
  double c = point_gradient_coefficient(task, example_dot(x.view(), w.data()), y);
  SparseVec g;
  g.indices.reserve(x.size());
  g.values.reserve(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x.values[s] == 0.0) continue;
    g.indices.push_back(x.indices[s]);
    g.values.push_back(c * x.values[s]);
  }
  return g;
}

SparseVec point_gradient(Task task, const Dataset& ds, std::size_t e, std::span<const double> w) {
  if (w.size() != ds.n_features) throw std::invalid_argument("model/dataset dim mismatch");
  double z = 0.0;
  for_example(ds, e, [&](std::uint32_t j, double x) { z += x * w[j]; });
  double c = point_gradient_coefficient(task, z, ds.labels[e]);
  SparseVec g;
  for_example(ds, e, [&](std::uint32_t j, double x) {
    if (x == 0.0) return;
    g.indices.push_back(j);
    g.values.push_back(c * x);
  });
  return g;
}

double dataset_loss(Task task, const Dataset& ds, std::span<const double> w) {
  if (w.size() != ds.n_features) throw std::invalid_argument("model/dataset dim mismatch");
  double total = 0.0;
  for (std::size_t e = 0; e < ds.n_examples; ++e) {
    double z = 0.0;
    for_example(ds, e, [&](std::uint32_t j, double x) { z += x * w[j]; });
    total += point_loss_from_margin(task, z, ds.labels[e]);
  }
  return total;
}

}  // namespace sgdbench
