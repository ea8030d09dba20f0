#include "sgdbench/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sgdbench {

const char* layout_name(Layout layout) {
  switch (layout) {
    case Layout::DenseRowMajor: return "dense-row";
    case Layout::DenseColMajor: return "dense-col";
    case Layout::Csr: return "csr";
    case Layout::PaddedDense: return "padded";
  }
  return "?";
}

std::optional<Layout> layout_from_name(std::string_view name) {
  if (name == "dense-row") return Layout::DenseRowMajor;
  if (name == "dense-col") return Layout::DenseColMajor;
  if (name == "csr") return Layout::Csr;
  if (name == "padded") return Layout::PaddedDense;
  return std::nullopt;
}

const char* strategy_name(Strategy s) {
  return s == Strategy::RoundRobin ? "round-robin" : "chunk";
}

std::size_t Dataset::nnz() const {
  switch (layout) {
    case Layout::Csr:
      return values.size();
    case Layout::PaddedDense: {
      std::size_t count = 0;
      const std::uint32_t sentinel = pad_sentinel();
      for (std::size_t i = 0; i < indices.size(); ++i)
        if (indices[i] != sentinel) ++count;
      return count;
    }
    case Layout::DenseRowMajor:
    case Layout::DenseColMajor: {
      std::size_t count = 0;
      for (double v : values)
        if (v != 0.0) ++count;
      return count;
    }
  }
  return 0;
}

void Dataset::validate() const {
  if (labels.size() != n_examples)
    throw std::invalid_argument("label count does not match example count");
  for (double y : labels)
    if (y != 1.0 && y != -1.0) throw std::invalid_argument("label not in {+1,-1}");

  switch (layout) {
    case Layout::Csr: {
      if (row_offsets.size() != n_examples + 1)
        throw std::invalid_argument("csr row_offsets size mismatch");
      if (row_offsets.front() != 0 || row_offsets.back() != values.size())
        throw std::invalid_argument("csr row_offsets endpoints invalid");
      for (std::size_t i = 0; i + 1 < row_offsets.size(); ++i)
        if (row_offsets[i] > row_offsets[i + 1])
          throw std::invalid_argument("csr row_offsets not nondecreasing");
      if (indices.size() != values.size())
        throw std::invalid_argument("csr index/value size mismatch");
      for (std::uint32_t j : indices)
        if (j >= n_features) throw std::invalid_argument("csr feature index out of range");
      break;
    }
    case Layout::PaddedDense: {
      if (values.size() != n_examples * padded_width ||
          indices.size() != n_examples * padded_width)
        throw std::invalid_argument("padded storage size mismatch");
      const std::uint32_t sentinel = pad_sentinel();
      for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] > sentinel)
          throw std::invalid_argument("padded feature index out of range");
        if (indices[i] == sentinel && values[i] != 0.0)
          throw std::invalid_argument("padded sentinel slot with nonzero value");
      }
      break;
    }
    case Layout::DenseRowMajor:
    case Layout::DenseColMajor:
      if (values.size() != n_examples * n_features)
        throw std::invalid_argument("dense storage size mismatch");
      break;
  }
}

ExampleView example_view(const Dataset& ds, std::size_t e) {
  ExampleView v;
  switch (ds.layout) {
    case Layout::DenseRowMajor:
      v.val = ds.values.data() + e * ds.n_features;
      v.len = ds.n_features;
      v.stride = 1;
      break;
    case Layout::DenseColMajor:
      v.val = ds.values.data() + e;
      v.len = ds.n_features;
      v.stride = ds.n_examples;
      break;
    case Layout::Csr: {
      std::size_t b = ds.row_offsets[e];
      v.val = ds.values.data() + b;
      v.idx = ds.indices.data() + b;
      v.len = ds.row_offsets[e + 1] - b;
      v.stride = 1;
      break;
    }
    case Layout::PaddedDense:
      v.val = ds.values.data() + e;
      v.idx = ds.indices.data() + e;
      v.len = ds.padded_width;
      v.stride = ds.n_examples;
      break;
  }
  return v;
}

std::vector<CanonicalExample> canonical_content(const Dataset& ds) {
  std::vector<CanonicalExample> out(ds.n_examples);
  for (std::size_t e = 0; e < ds.n_examples; ++e) {
    for_example(ds, e, [&](std::uint32_t j, double x) {
      if (x != 0.0) out[e].emplace_back(j, x);
    });
    std::sort(out[e].begin(), out[e].end());
  }
  return out;
}

namespace {

double normalize_label(double raw) {
  if (raw <= 0.0) return -1.0;
  if (raw == 2.0) return -1.0;
  return 1.0;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);  // from_chars rejects '+'
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_index(std::string_view s, std::uint64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> declared_d) {
  Dataset ds;
  ds.layout = Layout::Csr;
  ds.row_offsets.push_back(0);

  std::uint64_t max_index_seen = 0;  // 0-based + 1
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments and trailing CR.
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;

    std::string_view rest(line.data() + start, line.size() - start);
    auto next_token = [&rest]() -> std::string_view {
      std::size_t b = rest.find_first_not_of(" \t");
      if (b == std::string_view::npos) return {};
      std::size_t e = rest.find_first_of(" \t", b);
      std::string_view tok = rest.substr(b, e == std::string_view::npos ? e : e - b);
      rest = e == std::string_view::npos ? std::string_view{} : rest.substr(e);
      return tok;
    };

    std::string_view label_tok = next_token();
    double raw_label;
    if (!parse_double(label_tok, raw_label))
      throw ParseError("malformed label '" + std::string(label_tok) + "'", line_no);
    ds.labels.push_back(normalize_label(raw_label));

    std::uint64_t prev_index = 0;  // 1-based; 0 means none yet
    for (std::string_view tok = next_token(); !tok.empty(); tok = next_token()) {
      std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError("malformed feature '" + std::string(tok) + "', expected idx:val",
                         line_no);
      std::uint64_t index1;
      double value;
      if (!parse_index(tok.substr(0, colon), index1) || index1 == 0)
        throw ParseError("malformed feature index in '" + std::string(tok) + "'", line_no);
      if (!parse_double(tok.substr(colon + 1), value))
        throw ParseError("malformed feature value in '" + std::string(tok) + "'", line_no);
      if (index1 <= prev_index)
        throw ParseError("feature indices not strictly increasing", line_no);
      prev_index = index1;
      if (declared_d && index1 > *declared_d)
        throw ParseError("feature index " + std::to_string(index1) + " exceeds declared " +
                             std::to_string(*declared_d),
                         line_no);
      max_index_seen = std::max(max_index_seen, index1);
      if (value == 0.0) continue;  // canonicalize: drop explicit zeros
      ds.values.push_back(value);
      ds.indices.push_back(static_cast<std::uint32_t>(index1 - 1));
    }
    ds.row_offsets.push_back(ds.values.size());
  }

  ds.n_examples = ds.labels.size();
  ds.n_features = declared_d ? *declared_d : static_cast<std::size_t>(max_index_seen);
  return ds;
}

Dataset parse_libsvm_file(const std::string& path, std::optional<std::size_t> declared_d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_libsvm(in, declared_d);
}

void write_libsvm(const Dataset& ds, std::ostream& out) {
  char buf[64];
  for (std::size_t e = 0; e < ds.n_examples; ++e) {
    out << (ds.labels[e] > 0 ? "+1" : "-1");
    for_example(ds, e, [&](std::uint32_t j, double x) {
      if (x == 0.0) return;
      std::snprintf(buf, sizeof(buf), " %u:%.17g", j + 1, x);
      out << buf;
    });
    out << '\n';
  }
}

void write_libsvm_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_libsvm(ds, out);
}

namespace {

constexpr char kBinaryMagic[8] = {'s', 'g', 'd', 'b', 'd', 's', '0', '1'};

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  write_pod(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

template <class T>
void read_vec(std::istream& in, std::vector<T>& v) {
  std::uint64_t n = 0;
  read_pod(in, n);
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}

}  // namespace

void save_binary(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  write_pod(out, static_cast<std::uint64_t>(ds.n_examples));
  write_pod(out, static_cast<std::uint64_t>(ds.n_features));
  write_pod(out, static_cast<std::uint32_t>(ds.layout));
  write_pod(out, static_cast<std::uint64_t>(ds.padded_width));
  write_vec(out, ds.labels);
  write_vec(out, ds.values);
  write_vec(out, ds.indices);
  write_vec(out, ds.row_offsets);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a dataset cache file: " + path);
  Dataset ds;
  std::uint64_t n = 0, d = 0, pw = 0;
  std::uint32_t layout = 0;
  read_pod(in, n);
  read_pod(in, d);
  read_pod(in, layout);
  read_pod(in, pw);
  ds.n_examples = n;
  ds.n_features = d;
  ds.layout = static_cast<Layout>(layout);
  ds.padded_width = pw;
  read_vec(in, ds.labels);
  read_vec(in, ds.values);
  read_vec(in, ds.indices);
  read_vec(in, ds.row_offsets);
  if (!in) throw std::runtime_error("truncated dataset cache file: " + path);
  ds.validate();
  return ds;
}

namespace {

// Rebuilds CSR arrays from canonical content order (storage order per example,
// zeros dropped, ascending indices guaranteed by construction sites).
Dataset to_csr(const Dataset& ds) {
  if (ds.layout == Layout::Csr) return ds;
  Dataset out;
  out.n_examples = ds.n_examples;
  out.n_features = ds.n_features;
  out.layout = Layout::Csr;
  out.labels = ds.labels;
  out.row_offsets.reserve(ds.n_examples + 1);
  out.row_offsets.push_back(0);
  for (std::size_t e = 0; e < ds.n_examples; ++e) {
    for_example(ds, e, [&](std::uint32_t j, double x) {
      if (x == 0.0) return;
      out.indices.push_back(j);
      out.values.push_back(x);
    });
    out.row_offsets.push_back(out.values.size());
  }
  return out;
}

Dataset csr_to_dense(const Dataset& csr, Layout target, std::size_t max_dense_bytes) {
  std::size_t n = csr.n_examples, d = csr.n_features;
  if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d / sizeof(double))
    throw CapacityError("dense materialization overflows size arithmetic");
  std::size_t bytes = n * d * sizeof(double);
  if (bytes > max_dense_bytes)
    throw CapacityError("dense materialization of " + std::to_string(n) + "x" +
                        std::to_string(d) + " needs " + std::to_string(bytes) +
                        " bytes, above the " + std::to_string(max_dense_bytes) + " byte cap");
  Dataset out;
  out.n_examples = n;
  out.n_features = d;
  out.layout = target;
  out.labels = csr.labels;
  out.values.assign(n * d, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t s = csr.row_offsets[e]; s < csr.row_offsets[e + 1]; ++s) {
      std::uint32_t j = csr.indices[s];
      if (target == Layout::DenseRowMajor)
        out.values[e * d + j] = csr.values[s];
      else
        out.values[static_cast<std::size_t>(j) * n + e] = csr.values[s];
    }
  }
  return out;
}

Dataset csr_to_padded(const Dataset& csr) {
  std::size_t n = csr.n_examples;
  std::size_t width = 0;
  for (std::size_t e = 0; e < n; ++e)
    width = std::max(width, csr.row_offsets[e + 1] - csr.row_offsets[e]);
  Dataset out;
  out.n_examples = n;
  out.n_features = csr.n_features;
  out.layout = Layout::PaddedDense;
  out.labels = csr.labels;
  out.padded_width = width;
  out.values.assign(n * width, 0.0);
  out.indices.assign(n * width, out.pad_sentinel());
  for (std::size_t e = 0; e < n; ++e) {
    std::size_t b = csr.row_offsets[e];
    std::size_t len = csr.row_offsets[e + 1] - b;
    for (std::size_t s = 0; s < len; ++s) {
      out.values[s * n + e] = csr.values[b + s];
      out.indices[s * n + e] = csr.indices[b + s];
    }
  }
  return out;
}

}  // namespace

Dataset convert_layout(const Dataset& ds, Layout target, std::size_t max_dense_bytes) {
  if (ds.layout == target) return ds;
  if (ds.layout == Layout::DenseRowMajor && target == Layout::DenseColMajor)
    return transpose_dense(ds);
  if (ds.layout == Layout::DenseColMajor && target == Layout::DenseRowMajor)
    return transpose_dense(ds);
  Dataset csr = to_csr(ds);
  switch (target) {
    case Layout::Csr: return csr;
    case Layout::PaddedDense: return csr_to_padded(csr);
    case Layout::DenseRowMajor:
    case Layout::DenseColMajor: return csr_to_dense(csr, target, max_dense_bytes);
  }
  throw std::invalid_argument("unknown target layout");
}

Dataset transpose_dense(const Dataset& ds) {
  if (ds.layout != Layout::DenseRowMajor && ds.layout != Layout::DenseColMajor)
    throw std::invalid_argument("transpose_dense requires a dense layout");
  Dataset out;
  out.n_examples = ds.n_examples;
  out.n_features = ds.n_features;
  out.labels = ds.labels;
  out.layout = ds.layout == Layout::DenseRowMajor ? Layout::DenseColMajor
                                                  : Layout::DenseRowMajor;
  // Rows and columns of the stored array, before transposition.
  std::size_t rows = ds.layout == Layout::DenseRowMajor ? ds.n_examples : ds.n_features;
  std::size_t cols = ds.layout == Layout::DenseRowMajor ? ds.n_features : ds.n_examples;
  out.values.resize(ds.values.size());
  constexpr std::size_t kBlock = 64;  // cache-blocked transpose
  for (std::size_t rb = 0; rb < rows; rb += kBlock) {
    std::size_t re = std::min(rows, rb + kBlock);
    for (std::size_t cb = 0; cb < cols; cb += kBlock) {
      std::size_t ce = std::min(cols, cb + kBlock);
      for (std::size_t r = rb; r < re; ++r)
        for (std::size_t c = cb; c < ce; ++c)
          out.values[c * rows + r] = ds.values[r * cols + c];
    }
  }
  return out;
}

Dataset append_bias_feature(const Dataset& ds) {
  Dataset out;
  out.n_examples = ds.n_examples;
  out.n_features = ds.n_features + 1;
  out.layout = Layout::Csr;
  out.labels = ds.labels;
  const std::uint32_t bias_index = static_cast<std::uint32_t>(ds.n_features);
  out.row_offsets.reserve(ds.n_examples + 1);
  out.row_offsets.push_back(0);
  for (std::size_t e = 0; e < ds.n_examples; ++e) {
    for_example(ds, e, [&](std::uint32_t j, double x) {
      if (x == 0.0) return;
      out.indices.push_back(j);
      out.values.push_back(x);
    });
    out.indices.push_back(bias_index);
    out.values.push_back(1.0);
    out.row_offsets.push_back(out.values.size());
  }
  return out;
}

Assignment assign(std::size_t n, std::size_t workers, Strategy strategy, std::size_t k) {
  if (workers < 1) throw std::invalid_argument("assign: workers must be >= 1");
  if (n < 1) throw std::invalid_argument("assign: n must be >= 1");
  Assignment a;
  a.worker_count = workers;
  a.strategy = strategy;
  a.replication_k = k;
  a.per_worker.resize(workers);

  if (strategy == Strategy::RoundRobin) {
    for (std::size_t w = 0; w < workers; ++w)
      for (std::size_t i = w; i < n; i += workers)
        a.per_worker[w].push_back(static_cast<std::uint32_t>(i));
  } else {
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      std::size_t b = w * chunk;
      std::size_t e = std::min(n, b + chunk);
      for (std::size_t i = b; i < e; ++i)
        a.per_worker[w].push_back(static_cast<std::uint32_t>(i));
    }
  }

  if (k > 0) {
    for (std::size_t w = 0; w < workers; ++w) {
      auto& list = a.per_worker[w];
      if (list.empty()) continue;  // workers beyond n get no extras
      std::size_t boundary = static_cast<std::size_t>(list.back()) + 1;
      for (std::size_t i = 0; i < k; ++i)
        list.push_back(static_cast<std::uint32_t>((boundary + i) % n));
    }
  }
  return a;
}

}  // namespace sgdbench
