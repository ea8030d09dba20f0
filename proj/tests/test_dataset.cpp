#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <random>
#include <set>
#include <sstream>

#include "sgdbench/dataset.hpp"

using namespace sgdbench;

namespace {

Dataset random_sparse(std::size_t n, std::size_t d, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uval(-2.0, 2.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Dataset ds;
  ds.n_examples = n;
  ds.n_features = d;
  ds.layout = Layout::Csr;
  ds.row_offsets.push_back(0);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::uint32_t j = 0; j < d; ++j) {
      if (u01(rng) < density) {
        double v = uval(rng);
        if (v == 0.0) v = 1.0;
        ds.indices.push_back(j);
        ds.values.push_back(v);
      }
    }
    ds.row_offsets.push_back(ds.values.size());
    ds.labels.push_back(u01(rng) < 0.5 ? 1.0 : -1.0);
  }
  return ds;
}

}  // namespace

TEST_CASE("parse_libsvm reads the basic format") {
  std::istringstream in("+1 1:0.5 3:2.0\n-1 2:1.0\n");
  Dataset ds = parse_libsvm(in);
  CHECK(ds.n_examples == 2);
  CHECK(ds.n_features == 3);
  CHECK(ds.nnz() == 3);
  CHECK(ds.labels[0] == 1.0);
  CHECK(ds.labels[1] == -1.0);
  CHECK(ds.values[0] == 0.5);
  CHECK(ds.indices[0] == 0);  // 1-based in the file, 0-based in memory
  CHECK(ds.indices[1] == 2);
  ds.validate();
}

TEST_CASE("parse_libsvm normalizes label codings to +1/-1") {
  std::istringstream in("0 1:1\n1 1:1\n2 1:1\n-1 1:1\n+1 1:1\n3 1:1\n");
  Dataset ds = parse_libsvm(in);
  CHECK(ds.labels == std::vector<double>{-1, 1, -1, -1, 1, 1});
}

TEST_CASE("parse_libsvm handles empty input and feature-free lines") {
  std::istringstream empty("");
  Dataset ds = parse_libsvm(empty);
  CHECK(ds.n_examples == 0);
  CHECK(ds.n_features == 0);

  std::istringstream bare("+1\n-1 1:2.0\n");
  Dataset ds2 = parse_libsvm(bare);
  CHECK(ds2.n_examples == 2);
  CHECK(ds2.row_offsets[1] == 0);  // first example has no features
}

TEST_CASE("parse_libsvm rejects malformed input with line numbers") {
  std::istringstream bad_pair("+1 1:0.5\n-1 oops\n");
  CHECK_THROWS_WITH_AS(parse_libsvm(bad_pair),
                       doctest::Contains("line 2"), ParseError);

  std::istringstream nonmono("+1 3:1.0 2:1.0\n");
  CHECK_THROWS_AS(parse_libsvm(nonmono), ParseError);

  std::istringstream oob("+1 5:1.0\n");
  CHECK_THROWS_AS(parse_libsvm(oob, 4), ParseError);

  std::istringstream bad_label("maybe 1:1\n");
  CHECK_THROWS_AS(parse_libsvm(bad_label), ParseError);
}

TEST_CASE("parse_libsvm honors declared dimensionality") {
  std::istringstream in("+1 1:1.0\n");
  Dataset ds = parse_libsvm(in, 54);
  CHECK(ds.n_features == 54);
}

TEST_CASE("libsvm round trip preserves content") {
  Dataset ds = random_sparse(40, 30, 0.2, 7);
  std::ostringstream out;
  write_libsvm(ds, out);
  std::istringstream in(out.str());
  Dataset back = parse_libsvm(in, ds.n_features);
  CHECK(back.n_examples == ds.n_examples);
  CHECK(back.labels == ds.labels);
  CHECK(canonical_content(back) == canonical_content(ds));
}

TEST_CASE("binary cache round trips bit-exactly") {
  Dataset ds = random_sparse(25, 40, 0.15, 11);
  std::string path = "test_dataset_cache.bin";
  save_binary(ds, path);
  Dataset back = load_binary(path);
  std::remove(path.c_str());
  CHECK(back.n_examples == ds.n_examples);
  CHECK(back.n_features == ds.n_features);
  CHECK(back.layout == ds.layout);
  REQUIRE(back.values.size() == ds.values.size());
  CHECK(std::memcmp(back.values.data(), ds.values.data(),
                    ds.values.size() * sizeof(double)) == 0);
  CHECK(back.indices == ds.indices);
  CHECK(back.row_offsets == ds.row_offsets);
  CHECK(std::memcmp(back.labels.data(), ds.labels.data(),
                    ds.labels.size() * sizeof(double)) == 0);
}

TEST_CASE("convert_layout densifies as defined") {
  Dataset csr;
  csr.n_examples = 2;
  csr.n_features = 3;
  csr.layout = Layout::Csr;
  csr.labels = {1.0, -1.0};
  csr.values = {1.0, 3.0};
  csr.indices = {0, 2};
  csr.row_offsets = {0, 1, 2};

  Dataset dense = convert_layout(csr, Layout::DenseRowMajor);
  CHECK(dense.values == std::vector<double>{1, 0, 0, 0, 0, 3});

  Dataset back = convert_layout(dense, Layout::Csr);
  CHECK(canonical_content(back) == canonical_content(csr));
  CHECK(back.values == csr.values);
  CHECK(back.indices == csr.indices);
  CHECK(back.row_offsets == csr.row_offsets);
}

TEST_CASE("padded width is the max per-example nnz and sentinels are skipped") {
  Dataset csr;
  csr.n_examples = 3;
  csr.n_features = 6;
  csr.layout = Layout::Csr;
  csr.labels = {1.0, -1.0, 1.0};
  csr.values = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  csr.indices = {0, 1, 3, 5, 2, 4};
  csr.row_offsets = {0, 1, 4, 6};  // per-row nnz 1, 3, 2

  Dataset padded = convert_layout(csr, Layout::PaddedDense);
  CHECK(padded.padded_width == 3);
  padded.validate();
  CHECK(canonical_content(padded) == canonical_content(csr));

  std::size_t sentinels = 0;
  for (std::uint32_t j : padded.indices)
    if (j == padded.pad_sentinel()) ++sentinels;
  CHECK(sentinels == 3 * 3 - 6);
}

TEST_CASE("densification of very wide sparse data is refused") {
  Dataset wide;
  wide.n_examples = 3;
  wide.n_features = 1u << 30;
  wide.layout = Layout::Csr;
  wide.labels = {1.0, -1.0, 1.0};
  wide.values = {1.0, 1.0, 1.0};
  wide.indices = {0, 5, static_cast<std::uint32_t>(wide.n_features - 1)};
  wide.row_offsets = {0, 1, 2, 3};
  CHECK_THROWS_AS(convert_layout(wide, Layout::DenseRowMajor), CapacityError);
  CHECK_NOTHROW(convert_layout(wide, Layout::PaddedDense));
}

TEST_CASE("transpose_dense rearranges storage as the transpose") {
  Dataset ds;
  ds.n_examples = 2;
  ds.n_features = 2;
  ds.layout = Layout::DenseRowMajor;
  ds.labels = {1.0, -1.0};
  ds.values = {1, 2, 3, 4};

  Dataset t = transpose_dense(ds);
  CHECK(t.layout == Layout::DenseColMajor);
  CHECK(t.values == std::vector<double>{1, 3, 2, 4});
  CHECK(canonical_content(t) == canonical_content(ds));
}

TEST_CASE("transpose of a single row keeps the storage contiguous") {
  Dataset ds;
  ds.n_examples = 1;
  ds.n_features = 4;
  ds.layout = Layout::DenseRowMajor;
  ds.labels = {1.0};
  ds.values = {5, 6, 7, 8};
  Dataset t = transpose_dense(ds);
  CHECK(t.values == ds.values);  // a 1 x d row is already its own column order
  CHECK(t.layout == Layout::DenseColMajor);
}

TEST_CASE("double transpose is the identity on a random 7x5 matrix") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Dataset ds;
  ds.n_examples = 7;
  ds.n_features = 5;
  ds.layout = Layout::DenseRowMajor;
  ds.labels.assign(7, 1.0);
  ds.values.resize(35);
  for (double& v : ds.values) v = u(rng);

  Dataset tt = transpose_dense(transpose_dense(ds));
  CHECK(tt.layout == Layout::DenseRowMajor);
  CHECK(tt.values == ds.values);
}

TEST_CASE("assign: round-robin and chunk base cases") {
  Assignment rr = assign(5, 2, Strategy::RoundRobin, 0);
  CHECK(rr.per_worker[0] == std::vector<std::uint32_t>{0, 2, 4});
  CHECK(rr.per_worker[1] == std::vector<std::uint32_t>{1, 3});

  Assignment ch = assign(6, 2, Strategy::Chunk, 2);
  CHECK(ch.per_worker[0] == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
  CHECK(ch.per_worker[1] == std::vector<std::uint32_t>{3, 4, 5, 0, 1});

  Assignment ceilchunk = assign(10, 3, Strategy::Chunk, 0);
  CHECK(ceilchunk.per_worker[0] == std::vector<std::uint32_t>{0, 1, 2, 3});
  CHECK(ceilchunk.per_worker[1] == std::vector<std::uint32_t>{4, 5, 6, 7});
  CHECK(ceilchunk.per_worker[2] == std::vector<std::uint32_t>{8, 9});
}

TEST_CASE("assign: more workers than examples leaves the tail empty") {
  Assignment a = assign(3, 5, Strategy::Chunk, 0);
  CHECK(a.per_worker[0].size() == 1);
  CHECK(a.per_worker[3].empty());
  CHECK(a.total_assigned() == 3);
}

TEST_CASE("assign property: k=0 is a partition, k>0 adds T*k wrapped ids") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 1 + rng() % 80;
    std::size_t workers = 1 + rng() % 8;
    Strategy strategy = (rng() & 1) ? Strategy::RoundRobin : Strategy::Chunk;
    std::size_t k = rng() % 5;

    Assignment base = assign(n, workers, strategy, 0);
    std::set<std::uint32_t> seen;
    for (const auto& list : base.per_worker)
      for (std::uint32_t id : list) CHECK(seen.insert(id).second);
    CHECK(seen.size() == n);

    if (k > 0) {
      Assignment rep = assign(n, workers, strategy, k);
      std::size_t populated = 0;
      for (const auto& list : base.per_worker)
        if (!list.empty()) ++populated;
      // Ceiling chunking can leave trailing workers empty; only populated
      // workers carry the k boundary extras.
      CHECK(rep.total_assigned() == n + populated * k);
      if (populated == workers) CHECK(rep.total_assigned() == n + workers * k);
      for (std::size_t w = 0; w < workers; ++w) {
        const auto& b = base.per_worker[w];
        const auto& r = rep.per_worker[w];
        if (b.empty()) {
          CHECK(r.empty());
          continue;
        }
        REQUIRE(r.size() == b.size() + k);
        for (std::size_t i = 0; i < b.size(); ++i) CHECK(r[i] == b[i]);
        std::size_t boundary = b.back() + 1;
        for (std::size_t i = 0; i < k; ++i)
          CHECK(r[b.size() + i] == (boundary + i) % n);
      }
    }
  }
}

TEST_CASE("layout conversions preserve canonical content") {
  std::mt19937_64 rng(1234);
  const Layout layouts[] = {Layout::DenseRowMajor, Layout::DenseColMajor, Layout::Csr,
                            Layout::PaddedDense};
  for (int trial = 0; trial < 25; ++trial) {
    Dataset ds = random_sparse(1 + rng() % 20, 1 + rng() % 15, 0.3, rng());
    auto reference = canonical_content(ds);
    for (Layout a : layouts) {
      Dataset in_a = convert_layout(ds, a);
      in_a.validate();
      CHECK(canonical_content(in_a) == reference);
      for (Layout b : layouts) {
        Dataset in_b = convert_layout(in_a, b);
        CHECK(canonical_content(in_b) == reference);
      }
    }
  }
}

TEST_CASE("append_bias_feature adds a trailing constant coordinate") {
  Dataset ds = random_sparse(15, 8, 0.3, 21);
  Dataset with_bias = append_bias_feature(ds);
  CHECK(with_bias.n_features == ds.n_features + 1);
  CHECK(with_bias.n_examples == ds.n_examples);
  auto before = canonical_content(ds);
  auto after = canonical_content(with_bias);
  for (std::size_t e = 0; e < ds.n_examples; ++e) {
    REQUIRE(after[e].size() == before[e].size() + 1);
    CHECK(after[e].back().first == ds.n_features);
    CHECK(after[e].back().second == 1.0);
    after[e].pop_back();
    CHECK(after[e] == before[e]);
  }
  with_bias.validate();
}
