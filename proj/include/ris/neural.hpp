#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace ris {

// Fully connected network with ReLU hidden layers and a linear output layer,
// double precision throughout.  Batches are column-major: one sample per
// column.  Weights start He-uniform (limit sqrt(6 / fan_in)), biases zero.
class Mlp {
 public:
  Mlp(std::vector<int> layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int n_weight_layers() const { return static_cast<int>(w_.size()); }
  std::int64_t parameter_count() const;

  // Increases whenever parameters change; forward caches are only valid for
  // the revision they were computed against.
  std::uint64_t revision() const { return revision_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, hidden..., output
    std::uint64_t revision = 0;
  };
  Cache forward_cached(const Eigen::MatrixXd& input) const;

  struct Gradients {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
  };
  // Backpropagates d(loss)/d(output) through the cached activations.  The
  // cache must come from this network at its current revision.
  Gradients backward(const Cache& cache,
                     const Eigen::MatrixXd& dloss_doutput) const;

  const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }

  // In-place parameter update: w[l] += dw[l], b[l] += db[l].
  void apply_update(const std::vector<Eigen::MatrixXd>& dw,
                    const std::vector<Eigen::VectorXd>& db);
  void copy_parameters_from(const Mlp& other);

 private:
  Mlp() = default;
  friend Mlp load_weights(const std::string& path);

  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> w_;  // w_[l]: sizes_[l+1] x sizes_[l]
  std::vector<Eigen::VectorXd> b_;
  std::uint64_t revision_ = 0;
};

// Adam with bias correction; moment buffers match the network's shapes.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;

  explicit AdamState(const Mlp& net, double lr = 1e-3);
};

void adam_step(Mlp& net, AdamState& state, const Mlp::Gradients& grads);

// JSON checkpoint; loading reproduces forward outputs bit-exactly.
void save_weights(const Mlp& net, const std::string& path,
                  const std::string& config_hash = "");
Mlp load_weights(const std::string& path);

}  // namespace ris
