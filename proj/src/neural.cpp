#include "ris/neural.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "ris/rng.hpp"

namespace ris {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)) {
  require(sizes_.size() >= 2, "network needs at least input and output sizes");
  for (int s : sizes_) require(s >= 1, "layer sizes must be positive");

  Rng rng = make_rng(seed);
  w_.reserve(sizes_.size() - 1);
  b_.reserve(sizes_.size() - 1);
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int j = 0; j < fan_in; ++j)
      for (int i = 0; i < fan_out; ++i) w(i, j) = uniform_in(rng, -limit, limit);
    w_.push_back(std::move(w));
    b_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

std::int64_t Mlp::parameter_count() const {
  std::int64_t count = 0;
  for (size_t l = 0; l < w_.size(); ++l) count += w_[l].size() + b_[l].size();
  return count;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  require(input.rows() == input_size(),
          "input row count must equal the network input size");
  require(input.cols() >= 1, "batch must contain at least one sample");
  Eigen::MatrixXd a = input;
  for (size_t l = 0; l < w_.size(); ++l) {
    Eigen::MatrixXd z = (w_[l] * a).colwise() + b_[l];
    if (l + 1 < w_.size())
      a = z.cwiseMax(0.0);
    else
      a = std::move(z);
  }
  return a;
}

Mlp::Cache Mlp::forward_cached(const Eigen::MatrixXd& input) const {
  require(input.rows() == input_size(),
          "input row count must equal the network input size");
  require(input.cols() >= 1, "batch must contain at least one sample");
  Cache cache;
  cache.revision = revision_;
  cache.activations.reserve(w_.size() + 1);
  cache.activations.push_back(input);
  for (size_t l = 0; l < w_.size(); ++l) {
    Eigen::MatrixXd z = (w_[l] * cache.activations.back()).colwise() + b_[l];
    if (l + 1 < w_.size())
      cache.activations.push_back(z.cwiseMax(0.0));
    else
      cache.activations.push_back(std::move(z));
  }
  return cache;
}

Mlp::Gradients Mlp::backward(const Cache& cache,
                             const Eigen::MatrixXd& dloss_doutput) const {
  if (cache.revision != revision_)
    throw std::logic_error(
        "stale forward cache: parameters changed since it was computed");
  require(cache.activations.size() == w_.size() + 1,
          "cache does not match the network depth");
  require(dloss_doutput.rows() == output_size() &&
              dloss_doutput.cols() == cache.activations.back().cols(),
          "output gradient shape must match the cached batch");

  Gradients g;
  g.w.resize(w_.size());
  g.b.resize(w_.size());
  Eigen::MatrixXd delta = dloss_doutput;  // d(loss)/d(pre-activation)
  for (int l = static_cast<int>(w_.size()) - 1; l >= 0; --l) {
    const Eigen::MatrixXd& a_in = cache.activations[l];
    g.w[l].noalias() = delta * a_in.transpose();
    g.b[l] = delta.rowwise().sum();
    if (l > 0) {
      // ReLU units pass gradient only where they were active (output > 0).
      Eigen::MatrixXd da = w_[l].transpose() * delta;
      delta = da.cwiseProduct(
          (a_in.array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

void Mlp::apply_update(const std::vector<Eigen::MatrixXd>& dw,
                       const std::vector<Eigen::VectorXd>& db) {
  require(dw.size() == w_.size() && db.size() == b_.size(),
          "update layer count must match the network");
  for (size_t l = 0; l < w_.size(); ++l) {
    require(dw[l].rows() == w_[l].rows() && dw[l].cols() == w_[l].cols() &&
                db[l].size() == b_[l].size(),
            "update shapes must match the network");
    w_[l] += dw[l];
    b_[l] += db[l];
  }
  ++revision_;
}

void Mlp::copy_parameters_from(const Mlp& other) {
  require(sizes_ == other.sizes_, "network architectures must match");
  w_ = other.w_;
  b_ = other.b_;
  ++revision_;
}

AdamState::AdamState(const Mlp& net, double lr_) : lr(lr_) {
  for (const auto& w : net.weights()) {
    mw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    vw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : net.biases()) {
    mb.push_back(Eigen::VectorXd::Zero(b.size()));
    vb.push_back(Eigen::VectorXd::Zero(b.size()));
  }
}

void adam_step(Mlp& net, AdamState& s, const Mlp::Gradients& grads) {
  if (s.mw.size() != net.weights().size())
    throw std::invalid_argument("optimizer state does not match the network");
  ++s.t;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  std::vector<Eigen::MatrixXd> dw(s.mw.size());
  std::vector<Eigen::VectorXd> db(s.mb.size());
  for (size_t l = 0; l < s.mw.size(); ++l) {
    s.mw[l] = s.beta1 * s.mw[l] + (1.0 - s.beta1) * grads.w[l];
    s.vw[l] = s.beta2 * s.vw[l] +
              (1.0 - s.beta2) * grads.w[l].cwiseProduct(grads.w[l]);
    dw[l] = -s.lr * (s.mw[l] / bc1).array() /
            ((s.vw[l] / bc2).array().sqrt() + s.eps);
    s.mb[l] = s.beta1 * s.mb[l] + (1.0 - s.beta1) * grads.b[l];
    s.vb[l] = s.beta2 * s.vb[l] +
              (1.0 - s.beta2) * grads.b[l].cwiseProduct(grads.b[l]);
    db[l] = -s.lr * (s.mb[l] / bc1).array() /
            ((s.vb[l] / bc2).array().sqrt() + s.eps);
  }
  net.apply_update(dw, db);
}

void save_weights(const Mlp& net, const std::string& path,
                  const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["arch"] = net.layer_sizes();
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (int l = 0; l < net.n_weight_layers(); ++l) {
    const Eigen::MatrixXd& w = net.weights()[l];
    nlohmann::ordered_json layer;
    layer["rows"] = w.rows();
    layer["cols"] = w.cols();
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    layer["w"] = flat;
    const Eigen::VectorXd& b = net.biases()[l];
    layer["b"] = std::vector<double>(b.data(), b.data() + b.size());
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump() << '\n';
}

Mlp load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed weights JSON in " + path + ": " +
                             e.what());
  }
  try {
    const auto arch = j.at("arch").get<std::vector<int>>();
    if (arch.size() < 2)
      throw std::runtime_error("weights arch needs at least two layers");
    Mlp net;
    net.sizes_ = arch;
    const auto& layers = j.at("layers");
    if (layers.size() != arch.size() - 1)
      throw std::runtime_error("weights layer count does not match arch");
    for (size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      const auto rows = layer.at("rows").get<Eigen::Index>();
      const auto cols = layer.at("cols").get<Eigen::Index>();
      if (rows != arch[l + 1] || cols != arch[l])
        throw std::runtime_error("weights layer shape does not match arch");
      const auto flat = layer.at("w").get<std::vector<double>>();
      if (flat.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols))
        throw std::runtime_error("weights entry count does not match shape");
      Eigen::MatrixXd w(rows, cols);
      size_t i = 0;
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[i++];
      const auto bias = layer.at("b").get<std::vector<double>>();
      if (bias.size() != static_cast<size_t>(rows))
        throw std::runtime_error("bias length does not match layer rows");
      net.w_.push_back(std::move(w));
      net.b_.push_back(
          Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed weights JSON in " + path + ": " +
                             e.what());
  }
}

}  // namespace ris
