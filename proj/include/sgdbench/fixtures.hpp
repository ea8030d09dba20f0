#pragma once

#include <cstdint>

#include "sgdbench/dataset.hpp"

namespace sgdbench::fixtures {

// Dense low-dimensional classification data (row-major): uniform feature
// values, labels from a hidden linear model with a fraction of flipped
// labels.
Dataset dense_classification(std::size_t n, std::size_t d, std::uint64_t seed,
                             double label_noise = 0.1);

// Sparse high-dimensional data (CSR) with power-law nnz per example
// (Pareto-tailed, mean approximately avg_nnz), uniform values on the sampled
// coordinates, labels as above.
Dataset sparse_classification(std::size_t n, std::size_t d, double avg_nnz,
                              std::uint64_t seed, double label_noise = 0.1);

}  // namespace sgdbench::fixtures
