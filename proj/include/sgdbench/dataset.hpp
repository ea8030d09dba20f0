#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sgdbench {

// Physical layouts for the training matrix. CSR is the canonical parse
// target; the dense layouts and the padded format are materialized on demand.
enum class Layout { DenseRowMajor, DenseColMajor, Csr, PaddedDense };

const char* layout_name(Layout layout);
std::optional<Layout> layout_from_name(std::string_view name);

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::size_t line_number;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Labeled training examples in one of four physical layouts. Immutable after
// construction; safe to share read-only across any number of workers.
//
// Storage per layout:
//   DenseRowMajor: values[e * d + j]
//   DenseColMajor: values[j * n + e]
//   Csr:           values/indices per example, row_offsets of length n+1
//   PaddedDense:   fixed width = max nnz per example, slot-major:
//                  values[s * n + e], indices[s * n + e]; padded slots carry
//                  value 0 and index d (one past the last valid feature)
struct Dataset {
  std::size_t n_examples = 0;
  std::size_t n_features = 0;  // d
  Layout layout = Layout::Csr;
  std::vector<double> labels;  // +1/-1, length n_examples

  std::vector<double> values;
  std::vector<std::uint32_t> indices;    // Csr / PaddedDense only
  std::vector<std::size_t> row_offsets;  // Csr only
  std::size_t padded_width = 0;          // PaddedDense only

  std::uint32_t pad_sentinel() const { return static_cast<std::uint32_t>(n_features); }
  bool is_sparse_layout() const { return layout == Layout::Csr || layout == Layout::PaddedDense; }

  // Stored nonzero count (padding slots excluded).
  std::size_t nnz() const;

  // Checks the structural invariants; throws std::invalid_argument on violation.
  void validate() const;
};

// Strided view of one example, uniform across layouts. For dense layouts
// idx == nullptr and the coordinate of slot s is s itself. For PaddedDense
// the view covers all padded_width slots including sentinels.
struct ExampleView {
  const double* val = nullptr;
  const std::uint32_t* idx = nullptr;
  std::size_t len = 0;
  std::size_t stride = 1;

  double value(std::size_t s) const { return val[s * stride]; }
  std::uint32_t index(std::size_t s) const {
    return idx ? idx[s * stride] : static_cast<std::uint32_t>(s);
  }
};

ExampleView example_view(const Dataset& ds, std::size_t e);

// Visits the (index, value) slots of example e in storage order, skipping
// padded sentinel slots. Dense layouts visit all d coordinates.
template <class F>
void for_example(const Dataset& ds, std::size_t e, F&& f) {
  ExampleView v = example_view(ds, e);
  const std::uint32_t sentinel = ds.pad_sentinel();
  for (std::size_t s = 0; s < v.len; ++s) {
    std::uint32_t j = v.index(s);
    if (j == sentinel) continue;
    f(j, v.value(s));
  }
}

// Canonical content: per example, the ascending (index, value) pairs with
// zero values dropped. Layout conversions preserve this exactly.
using CanonicalExample = std::vector<std::pair<std::uint32_t, double>>;
std::vector<CanonicalExample> canonical_content(const Dataset& ds);

// --- LIBSVM ingestion -------------------------------------------------------
//
// One example per nonempty line: "label idx:val idx:val ..." with strictly
// increasing 1-based indices. Labels are normalized to {+1,-1}: nonpositive
// labels and the {1,2}-coded negative class (2) map to -1, every other
// positive label maps to +1. Explicit zero values are dropped at ingestion so
// that all layouts carry identical canonical content.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> declared_d = std::nullopt);
Dataset parse_libsvm_file(const std::string& path,
                          std::optional<std::size_t> declared_d = std::nullopt);
void write_libsvm(const Dataset& ds, std::ostream& out);
void write_libsvm_file(const Dataset& ds, const std::string& path);

// Binary cache: round-trips bit-exactly to the parsed representation.
void save_binary(const Dataset& ds, const std::string& path);
Dataset load_binary(const std::string& path);

// --- Layout conversion ------------------------------------------------------

inline constexpr std::size_t kDefaultMaxDenseBytes = std::size_t{2} << 30;  // 2 GiB

// Lossless conversion between layouts. Densification of wide sparse data is
// refused when the dense value array would exceed max_dense_bytes.
Dataset convert_layout(const Dataset& ds, Layout target,
                       std::size_t max_dense_bytes = kDefaultMaxDenseBytes);

// Intercept handling at ingestion: appends a constant-1 feature (the new
// last coordinate) to every example. Returns CSR; trained models then carry
// the bias as coordinate d. No bias is trained unless this is applied.
Dataset append_bias_feature(const Dataset& ds);

// Materialized storage transpose for dense data: DenseRowMajor becomes
// DenseColMajor and vice versa. The stored array becomes the transpose of the
// input's stored array; logical content, dimensions and labels are unchanged,
// so applying it twice restores the input exactly.
Dataset transpose_dense(const Dataset& ds);

// --- Worker assignment ------------------------------------------------------

enum class Strategy { RoundRobin, Chunk };

const char* strategy_name(Strategy s);

// Ordered per-worker example lists. With replication_k = 0 the lists
// partition [0, n). With k > 0 each worker additionally gets the k ids that
// follow its last base id, wrapping modulo n.
struct Assignment {
  std::size_t worker_count = 0;
  Strategy strategy = Strategy::Chunk;
  std::size_t replication_k = 0;
  std::vector<std::vector<std::uint32_t>> per_worker;

  std::size_t total_assigned() const {
    std::size_t t = 0;
    for (const auto& w : per_worker) t += w.size();
    return t;
  }
};

Assignment assign(std::size_t n, std::size_t workers, Strategy strategy, std::size_t k);

}  // namespace sgdbench
