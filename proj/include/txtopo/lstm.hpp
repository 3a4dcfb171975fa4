#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace txtopo {

struct LstmShape {
  int input = 0;
  int hidden = 0;
  int layers = 0;

  bool operator==(const LstmShape&) const = default;
};

/// Stacked LSTM with a linear head on the last hidden state of the top layer.
/// Gate blocks are stacked in the order input, forget, cell, output. All
/// parameters live in one flat vector; the accessors are views into it.
class LstmParameters {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  LstmParameters() = default;
  explicit LstmParameters(LstmShape shape);

  const LstmShape& shape() const { return shape_; }
  Eigen::Index size() const { return flat_.size(); }
  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }

  /// 4H x in (layer 0: in = input width, otherwise H).
  MatrixMap input_weights(int layer);
  ConstMatrixMap input_weights(int layer) const;
  /// 4H x H
  MatrixMap recurrent_weights(int layer);
  ConstMatrixMap recurrent_weights(int layer) const;
  /// 4H
  VectorMap bias(int layer);
  ConstVectorMap bias(int layer) const;
  /// H
  VectorMap head_weights();
  ConstVectorMap head_weights() const;
  double& head_bias() { return flat_[flat_.size() - 1]; }
  double head_bias() const { return flat_[flat_.size() - 1]; }

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1, head bias 0.
  void initialize(std::uint64_t seed);

  /// Offsets of every parameter tensor, for per-tensor diagnostics.
  struct Block {
    Eigen::Index offset;
    Eigen::Index rows;
    Eigen::Index cols;
  };
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  int layer_input(int layer) const { return layer == 0 ? shape_.input : shape_.hidden; }

  LstmShape shape_{};
  Eigen::VectorXd flat_;
  std::vector<Block> blocks_;  // per layer: W, U, b; then head w, head b
};

/// A batch of sequences: `steps[t]` is input width x batch.
using SequenceBatch = std::vector<Eigen::MatrixXd>;

/// Outputs (one per batch column) of the network.
Eigen::RowVectorXd lstm_forward(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps);

/// Mean squared error over the batch and its gradient with respect to every
/// parameter (same layout as `params.flat()`).
double lstm_loss_and_gradient(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps,
                              const Eigen::RowVectorXd& targets, Eigen::VectorXd& gradient);

/// Mean squared error only.
double lstm_loss(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps,
                 const Eigen::RowVectorXd& targets);

}  // namespace txtopo
