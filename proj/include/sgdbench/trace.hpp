#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace sgdbench {

// Wall-clock source used by the engines to time epochs. Injectable so tests
// can substitute a fake clock and check what the timed region covers.
struct Clock {
  std::function<double()> now_seconds = [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double seconds = 0.0;   // compute time for this epoch; loss evaluation excluded
};

struct LossTrace {
  std::vector<EpochRecord> epochs;
  bool diverged = false;
  std::string divergence_note;

  std::vector<double> losses() const {
    std::vector<double> out;
    out.reserve(epochs.size());
    for (const auto& e : epochs) out.push_back(e.loss);
    return out;
  }
  double final_loss() const { return epochs.empty() ? 0.0 : epochs.back().loss; }
  double min_loss() const {
    double m = epochs.empty() ? 0.0 : epochs.front().loss;
    for (const auto& e : epochs) m = std::min(m, e.loss);
    return m;
  }
  double total_seconds() const {
    double s = 0.0;
    for (const auto& e : epochs) s += e.seconds;
    return s;
  }
};

}  // namespace sgdbench
