#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <vector>

#include "ris/neural.hpp"
#include "ris/rng.hpp"

using namespace ris;

namespace {

// Overwrite a network's parameters with explicit values via apply_update.
void set_parameters(Mlp& net, const std::vector<Eigen::MatrixXd>& w,
                    const std::vector<Eigen::VectorXd>& b) {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
  for (int l = 0; l < net.n_weight_layers(); ++l) {
    dw.push_back(w[l] - net.weights()[l]);
    db.push_back(b[l] - net.biases()[l]);
  }
  net.apply_update(dw, db);
}

Mlp hand_network() {
  Mlp net({2, 2, 2}, 0);
  Eigen::MatrixXd w1(2, 2), w2(2, 2);
  w1 << 1.0, 2.0, 3.0, 4.0;
  w2 << 1.0, -1.0, 2.0, 1.0;
  Eigen::VectorXd b1(2), b2(2);
  b1 << 0.5, -0.5;
  b2 << 0.0, 1.0;
  set_parameters(net, {w1, w2}, {b1, b2});
  return net;
}

double mse_on_actions(const Mlp& net, const Eigen::MatrixXd& states,
                      const std::vector<int>& actions,
                      const Eigen::VectorXd& targets) {
  const Eigen::MatrixXd q = net.forward(states);
  double loss = 0.0;
  for (int b = 0; b < states.cols(); ++b) {
    const double diff = q(actions[b], b) - targets(b);
    loss += diff * diff;
  }
  return loss / static_cast<double>(states.cols());
}

}  // namespace

TEST_CASE("parameter count of the production topology") {
  const Mlp net({900, 1000, 500, 100, 50, 9}, 1);
  // 901000 + 500500 + 50100 + 5050 + 459.
  CHECK(net.parameter_count() == 1457109);
  CHECK(net.n_weight_layers() == 5);
  CHECK(net.input_size() == 900);
  CHECK(net.output_size() == 9);
}

TEST_CASE("forward pass reproduces a hand computation") {
  const Mlp net = hand_network();

  Eigen::MatrixXd x(2, 3);
  x.col(0) << 1.0, -1.0;   // pre-activations (-0.5, -1.5) die at the ReLU
  x.col(1) << 1.0, 1.0;    // pre-activations (3.5, 6.5) pass through
  x.col(2) << 0.0, 0.0;    // only biases contribute
  const Eigen::MatrixXd y = net.forward(x);

  CHECK(y(0, 0) == doctest::Approx(0.0));
  CHECK(y(1, 0) == doctest::Approx(1.0));

  CHECK(y(0, 1) == doctest::Approx(3.5 - 6.5));
  CHECK(y(1, 1) == doctest::Approx(2.0 * 3.5 + 6.5 + 1.0));

  CHECK(y(0, 2) == doctest::Approx(0.5));
  CHECK(y(1, 2) == doctest::Approx(2.0));
}

TEST_CASE("batched forward equals per-sample forward") {
  const Mlp net({4, 6, 3}, 9);
  std::mt19937_64 rng(4);
  Eigen::MatrixXd batch(4, 5);
  for (int i = 0; i < batch.size(); ++i)
    batch(i / 5, i % 5) = uniform_in(rng, -2.0, 2.0);
  const Eigen::MatrixXd all = net.forward(batch);
  for (int b = 0; b < 5; ++b) {
    const Eigen::MatrixXd one = net.forward(batch.col(b));
    // GEMM and GEMV kernels may round differently; demand near-exactness.
    CHECK((all.col(b) - one.col(0)).cwiseAbs().maxCoeff() <= 1e-13);
  }
  const Eigen::MatrixXd again = net.forward(batch);
  CHECK(all == again);  // same call path is bitwise deterministic
}

TEST_CASE("initialization is seeded, bounded, and bias-free") {
  const Mlp a({10, 20, 5}, 123);
  const Mlp b({10, 20, 5}, 123);
  const Mlp c({10, 20, 5}, 124);
  for (int l = 0; l < a.n_weight_layers(); ++l) {
    CHECK(a.weights()[l] == b.weights()[l]);
    CHECK(a.biases()[l].isZero(0.0));
    const double limit = std::sqrt(6.0 / a.layer_sizes()[l]);
    CHECK(a.weights()[l].cwiseAbs().maxCoeff() <= limit);
  }
  bool differs = false;
  for (int l = 0; l < a.n_weight_layers(); ++l)
    if (a.weights()[l] != c.weights()[l]) differs = true;
  CHECK(differs);
}

TEST_CASE("analytic gradients match central differences") {
  Mlp net({10, 8, 9}, 77);
  const int batch = 5;
  std::mt19937_64 rng(13);
  Eigen::MatrixXd states(10, batch);
  for (int i = 0; i < states.rows(); ++i)
    for (int b = 0; b < batch; ++b) states(i, b) = uniform_in(rng, -1.0, 1.0);
  std::vector<int> actions;
  Eigen::VectorXd targets(batch);
  for (int b = 0; b < batch; ++b) {
    actions.push_back(static_cast<int>(uniform_below(rng, 9)));
    targets(b) = uniform_in(rng, -2.0, 2.0);
  }

  const Mlp::Cache cache = net.forward_cached(states);
  Eigen::MatrixXd dloss = Eigen::MatrixXd::Zero(9, batch);
  for (int b = 0; b < batch; ++b) {
    const double q = cache.activations.back()(actions[b], b);
    dloss(actions[b], b) = 2.0 * (q - targets(b)) / batch;
  }
  const Mlp::Gradients grads = net.backward(cache, dloss);

  const double h = 1e-6;
  double max_rel = 0.0;
  for (int l = 0; l < net.n_weight_layers(); ++l) {
    std::vector<Eigen::MatrixXd> dw;
    std::vector<Eigen::VectorXd> db;
    for (int k = 0; k < net.n_weight_layers(); ++k) {
      dw.push_back(Eigen::MatrixXd::Zero(net.weights()[k].rows(),
                                         net.weights()[k].cols()));
      db.push_back(Eigen::VectorXd::Zero(net.biases()[k].size()));
    }
    for (int i = 0; i < net.weights()[l].rows(); ++i)
      for (int j = 0; j < net.weights()[l].cols(); ++j) {
        dw[l](i, j) = h;
        net.apply_update(dw, db);
        const double up = mse_on_actions(net, states, actions, targets);
        dw[l](i, j) = -2.0 * h;
        net.apply_update(dw, db);
        const double down = mse_on_actions(net, states, actions, targets);
        dw[l](i, j) = h;
        net.apply_update(dw, db);
        dw[l](i, j) = 0.0;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = grads.w[l](i, j);
        const double rel = std::abs(numeric - analytic) /
                           std::max({1e-6, std::abs(numeric),
                                     std::abs(analytic)});
        max_rel = std::max(max_rel, rel);
      }
    for (int i = 0; i < net.biases()[l].size(); ++i) {
      db[l](i) = h;
      net.apply_update(dw, db);
      const double up = mse_on_actions(net, states, actions, targets);
      db[l](i) = -2.0 * h;
      net.apply_update(dw, db);
      const double down = mse_on_actions(net, states, actions, targets);
      db[l](i) = h;
      net.apply_update(dw, db);
      db[l](i) = 0.0;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads.b[l](i);
      const double rel = std::abs(numeric - analytic) /
                         std::max({1e-6, std::abs(numeric),
                                   std::abs(analytic)});
      max_rel = std::max(max_rel, rel);
    }
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("backward rejects caches from an older revision") {
  Mlp net({3, 4, 2}, 5);
  const Mlp::Cache cache = net.forward_cached(Eigen::MatrixXd::Ones(3, 1));
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
  for (int l = 0; l < net.n_weight_layers(); ++l) {
    dw.push_back(Eigen::MatrixXd::Constant(net.weights()[l].rows(),
                                           net.weights()[l].cols(), 0.01));
    db.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
  }
  net.apply_update(dw, db);
  CHECK_THROWS_AS(net.backward(cache, Eigen::MatrixXd::Ones(2, 1)),
                  std::logic_error);
}

TEST_CASE("first Adam step with unit gradient moves by almost exactly -lr") {
  Mlp net({1, 1}, 3);
  set_parameters(net, {Eigen::MatrixXd::Zero(1, 1)},
                 {Eigen::VectorXd::Zero(1)});
  AdamState adam(net, 1e-3);
  Mlp::Gradients grads;
  grads.w.push_back(Eigen::MatrixXd::Ones(1, 1));
  grads.b.push_back(Eigen::VectorXd::Zero(1));
  adam_step(net, adam, grads);
  // Bias-corrected moments are exactly the gradient on step one, so the
  // update is -lr * 1 / (1 + eps).
  CHECK(net.weights()[0](0, 0) ==
        doctest::Approx(-0.00099999999).epsilon(1e-9));
  CHECK(adam.t == 1);
}

TEST_CASE("Adam drives a quadratic toward its target") {
  Mlp net({1, 1}, 8);
  AdamState adam(net, 0.05);
  const double target = 3.0;
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1, 1);
  double first_err = 0.0, last_err = 0.0;
  for (int it = 0; it < 400; ++it) {
    const Mlp::Cache cache = net.forward_cached(x);
    const double y = cache.activations.back()(0, 0);
    if (it == 0) first_err = std::abs(y - target);
    last_err = std::abs(y - target);
    Eigen::MatrixXd dloss(1, 1);
    dloss(0, 0) = 2.0 * (y - target);
    adam_step(net, adam, net.backward(cache, dloss));
  }
  CHECK(last_err < 1e-2);
  CHECK(last_err < first_err);
}

TEST_CASE("weight checkpoints round-trip bit-exactly") {
  namespace fs = std::filesystem;
  const Mlp net({6, 10, 4}, 2024);
  const fs::path path = fs::temp_directory_path() / "ris_weights.json";
  save_weights(net, path.string(), "0123456789abcdef");
  const Mlp loaded = load_weights(path.string());
  REQUIRE(loaded.layer_sizes() == net.layer_sizes());

  std::mt19937_64 rng(55);
  Eigen::MatrixXd x(6, 3);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) x(i, j) = uniform_in(rng, -3.0, 3.0);
  const Eigen::MatrixXd a = net.forward(x);
  const Eigen::MatrixXd b = loaded.forward(x);
  CHECK(a == b);  // bitwise
  fs::remove(path);
}

TEST_CASE("weight loader rejects inconsistent documents") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "ris_weights_bad.json";
  {
    std::ofstream out(path);
    out << R"({"arch":[2,3],"layers":[{"rows":3,"cols":2,)"
        << R"("w":[1,2,3,4,5],"b":[0,0,0]}]})";
  }
  CHECK_THROWS_AS(load_weights(path.string()), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("update arithmetic is exact") {
  Mlp net({2, 2}, 0);
  const Eigen::MatrixXd before = net.weights()[0];
  std::vector<Eigen::MatrixXd> dw{Eigen::MatrixXd::Constant(2, 2, 0.25)};
  std::vector<Eigen::VectorXd> db{Eigen::VectorXd::Constant(2, -1.0)};
  const std::uint64_t rev = net.revision();
  net.apply_update(dw, db);
  CHECK(net.weights()[0] == (before.array() + 0.25).matrix());
  CHECK(net.biases()[0] == Eigen::VectorXd::Constant(2, -1.0));
  CHECK(net.revision() > rev);

  Mlp other({2, 2}, 99);
  other.copy_parameters_from(net);
  CHECK(other.weights()[0] == net.weights()[0]);
  CHECK(other.biases()[0] == net.biases()[0]);
}
