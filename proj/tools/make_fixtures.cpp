// Writes the bundled synthetic fixtures as LIBSVM files: a dense low-d
// classification set and a sparse high-d set with power-law nnz.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "sgdbench/fixtures.hpp"

using namespace sgdbench;

int main(int argc, char** argv) {
  CLI::App app{"generate synthetic LIBSVM fixtures"};
  std::string out_prefix = "fixture";
  std::size_t dense_n = 2000, dense_d = 64;
  std::size_t sparse_n = 20000, sparse_d = 10000;
  double avg_nnz = 50.0;
  double noise = 0.1;
  std::uint64_t seed = 20250810;
  app.add_option("--out-prefix", out_prefix, "output file prefix");
  app.add_option("--dense-n", dense_n, "dense fixture examples");
  app.add_option("--dense-d", dense_d, "dense fixture features");
  app.add_option("--sparse-n", sparse_n, "sparse fixture examples");
  app.add_option("--sparse-d", sparse_d, "sparse fixture features");
  app.add_option("--avg-nnz", avg_nnz, "mean nonzeros per sparse example");
  app.add_option("--noise", noise, "label flip probability");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  Dataset dense = fixtures::dense_classification(dense_n, dense_d, seed, noise);
  std::string dense_path = out_prefix + "_dense.svm";
  write_libsvm_file(convert_layout(dense, Layout::Csr), dense_path);
  std::printf("%s: n=%zu d=%zu\n", dense_path.c_str(), dense.n_examples, dense.n_features);

  Dataset sparse = fixtures::sparse_classification(sparse_n, sparse_d, avg_nnz, seed + 1, noise);
  std::string sparse_path = out_prefix + "_sparse.svm";
  write_libsvm_file(sparse, sparse_path);
  std::printf("%s: n=%zu d=%zu nnz=%zu\n", sparse_path.c_str(), sparse.n_examples,
              sparse.n_features, sparse.nnz());
  return 0;
}
