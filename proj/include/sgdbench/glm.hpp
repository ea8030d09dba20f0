#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sgdbench/dataset.hpp"
#include "sgdbench/math.hpp"

namespace sgdbench {

enum class Task { LR, SVM };

const char* task_name(Task t);
std::optional<Task> task_from_name(std::string_view name);

// Step size alpha, batch size B, epoch count t and the task. The optional
// per-epoch decay multiplier defaults to 1 (constant step size).
struct Hyperparams {
  double alpha = 0.01;
  std::size_t batch_b = 1;
  std::size_t epochs = 10;
  Task task = Task::LR;
  double step_decay = 1.0;

  double step_size(std::size_t epoch) const {  // epoch is 1-based
    double a = alpha;
    for (std::size_t i = 1; i < epoch; ++i) a *= step_decay;
    return a;
  }
  void validate(std::size_t n_examples) const;
};

// Gradient over an example's support: parallel index/value arrays.
struct SparseVec {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t size() const { return indices.size(); }
  ExampleView view() const { return ExampleView{values.data(), indices.data(), indices.size(), 1}; }
};

// z = x . w in ascending slot order. Padded sentinel slots contribute
// value 0 * w[d]; callers passing raw pointers for padded data must provide
// the d+1 guard slot (SharedModel does); plain-vector callers go through
// the checked overloads below which skip sentinels.
inline double example_dot(const ExampleView& x, const double* w) {
  double z = 0.0;
  for (std::size_t s = 0; s < x.len; ++s) z += x.value(s) * w[x.index(s)];
  return z;
}

// Scalar cores. z is the margin x . w for the example.
double point_loss_from_margin(Task task, double z, double y);

// c such that the point gradient is c * x over x's support.
double point_gradient_coefficient(Task task, double z, double y);

// Checked entry points used by tests and the public surface.
double point_loss(Task task, std::span<const double> w, const SparseVec& x, double y);
double point_loss(Task task, const Dataset& ds, std::size_t e, std::span<const double> w);
SparseVec point_gradient(Task task, std::span<const double> w, const SparseVec& x, double y);
SparseVec point_gradient(Task task, const Dataset& ds, std::size_t e, std::span<const double> w);

// Eq-style objective: sum of point losses over all examples, accumulated in
// ascending example id order.
double dataset_loss(Task task, const Dataset& ds, std::span<const double> w);

}  // namespace sgdbench
