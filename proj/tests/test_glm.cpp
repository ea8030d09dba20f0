#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sgdbench/glm.hpp"

using namespace sgdbench;

namespace {

SparseVec random_example(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  SparseVec x;
  for (std::uint32_t j = 0; j < d; ++j) {
    double v = u(rng);
    if (v == 0.0) continue;
    x.indices.push_back(j);
    x.values.push_back(v);
  }
  return x;
}

std::vector<double> random_model(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> w(d);
  for (double& v : w) v = n(rng);
  return w;
}

}  // namespace

TEST_CASE("losses at the zero model") {
  std::mt19937_64 rng(1);
  std::vector<double> w(5, 0.0);
  for (int i = 0; i < 10; ++i) {
    SparseVec x = random_example(5, rng);
    double y = (i & 1) ? 1.0 : -1.0;
    CHECK(point_loss(Task::LR, w, x, y) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(point_loss(Task::SVM, w, x, y) == 1.0);
  }
}

TEST_CASE("LR loss stays accurate for extreme margins") {
  // y x.w = 100: the stable form must produce ~e^{-100}, not 0 or overflow.
  std::vector<double> w = {100.0};
  SparseVec x;
  x.indices = {0};
  x.values = {1.0};
  double loss = point_loss(Task::LR, w, x, 1.0);
  long double oracle = std::log1p(std::exp((long double)-100.0));
  CHECK(loss > 0.0);
  CHECK(loss == doctest::Approx((double)oracle).epsilon(1e-12));

  // |x.w| up to 1e4 stays finite on both branches.
  w[0] = 1e4;
  CHECK(std::isfinite(point_loss(Task::LR, w, x, 1.0)));
  CHECK(std::isfinite(point_loss(Task::LR, w, x, -1.0)));
  CHECK(point_loss(Task::LR, w, x, -1.0) == doctest::Approx(1e4).epsilon(1e-12));
}

TEST_CASE("gradients at the zero model") {
  std::mt19937_64 rng(2);
  std::vector<double> w(6, 0.0);
  SparseVec x = random_example(6, rng);

  SparseVec g_lr = point_gradient(Task::LR, w, x, 1.0);
  for (std::size_t s = 0; s < g_lr.size(); ++s)
    CHECK(g_lr.values[s] == doctest::Approx(-0.5 * x.values[s]).epsilon(1e-12));

  SparseVec g_svm = point_gradient(Task::SVM, w, x, -1.0);
  for (std::size_t s = 0; s < g_svm.size(); ++s)
    CHECK(g_svm.values[s] == doctest::Approx(x.values[s]).epsilon(1e-12));
}

TEST_CASE("SVM subgradient is zero at margin exactly 1") {
  std::vector<double> w = {1.0};
  SparseVec x;
  x.indices = {0};
  x.values = {1.0};
  SparseVec g = point_gradient(Task::SVM, w, x, 1.0);  // y x.w == 1
  CHECK(g.values[0] == 0.0);
  // just inside the margin the subgradient is -y x
  w[0] = 0.999999;
  g = point_gradient(Task::SVM, w, x, 1.0);
  CHECK(g.values[0] == -1.0);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(42);
  const double h = 1e-6;
  for (Task task : {Task::LR, Task::SVM}) {
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
      std::size_t d = 5;
      std::vector<double> w = random_model(d, rng);
      SparseVec x = random_example(d, rng);
      double y = (rng() & 1) ? 1.0 : -1.0;

      if (task == Task::SVM) {
        double z = example_dot(x.view(), w.data());
        if (std::fabs(1.0 - y * z) < 1e-4) continue;  // keep clear of the kink
      }
      SparseVec g = point_gradient(task, w, x, y);
      for (std::size_t s = 0; s < g.size(); ++s) {
        std::uint32_t j = g.indices[s];
        std::vector<double> wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        double fd = (point_loss(task, wp, x, y) - point_loss(task, wm, x, y)) / (2.0 * h);
        CHECK(std::fabs(g.values[s] - fd) <= 1e-5 * std::max(1.0, std::fabs(g.values[s])));
      }
      ++checked;
    }
    CHECK(checked >= 100);
  }
}

TEST_CASE("gradients are confined to the example's support") {
  std::mt19937_64 rng(7);
  std::vector<double> w = random_model(10, rng);
  SparseVec x;
  x.indices = {2, 7};
  x.values = {1.5, -0.5};
  SparseVec g = point_gradient(Task::LR, w, x, 1.0);
  REQUIRE(g.indices.size() == 2);
  CHECK(g.indices[0] == 2);
  CHECK(g.indices[1] == 7);
}

TEST_CASE("dimension mismatches are rejected") {
  std::vector<double> w(3, 0.0);
  SparseVec x;
  x.indices = {5};
  x.values = {1.0};
  CHECK_THROWS_AS(point_loss(Task::LR, w, x, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(point_gradient(Task::SVM, w, x, 1.0), std::invalid_argument);
}

TEST_CASE("dataset_loss sums point losses in id order") {
  std::mt19937_64 rng(11);
  Dataset ds;
  ds.n_examples = 4;
  ds.n_features = 2;
  ds.layout = Layout::Csr;
  ds.labels = {1.0, -1.0, 1.0, -1.0};
  ds.values = {1.0, 2.0, -1.0, 0.5, 1.5};
  ds.indices = {0, 1, 0, 1, 0};
  ds.row_offsets = {0, 2, 3, 4, 5};

  std::vector<double> w = random_model(2, rng);
  for (Task task : {Task::LR, Task::SVM}) {
    double expected = 0.0;
    for (std::size_t e = 0; e < ds.n_examples; ++e)
      expected += point_loss(task, ds, e, w);
    CHECK(dataset_loss(task, ds, w) == expected);
  }

  std::vector<double> zero(2, 0.0);
  CHECK(dataset_loss(Task::LR, ds, zero) == doctest::Approx(4 * std::log(2.0)));
  CHECK(dataset_loss(Task::SVM, ds, zero) == doctest::Approx(4.0));
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  hp.alpha = 0.1;
  hp.batch_b = 4;
  hp.epochs = 2;
  CHECK_NOTHROW(hp.validate(10));
  CHECK_THROWS_AS(hp.validate(3), std::invalid_argument);  // B > N
  hp.alpha = 0.0;
  CHECK_THROWS_AS(hp.validate(10), std::invalid_argument);
  hp.alpha = 0.1;
  hp.epochs = 0;
  CHECK_THROWS_AS(hp.validate(10), std::invalid_argument);
}

TEST_CASE("stable sigmoid endpoints") {
  CHECK(stable_sigmoid(0.0) == 0.5);
  double tiny = stable_sigmoid(-745.0);
  CHECK(tiny > 0.0);
  CHECK(tiny < 1e-300);
  CHECK(stable_sigmoid(745.0) == doctest::Approx(1.0));
}
