#include "txtopo/lstm.hpp"

#include <cmath>

#include "txtopo/error.hpp"
#include "txtopo/rng.hpp"

namespace txtopo {

namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

struct StepCache {
  Eigen::MatrixXd x;       // layer input
  Eigen::ArrayXXd i, f, g, o;
  Eigen::ArrayXXd c;       // cell state after the step
  Eigen::ArrayXXd tanh_c;
  Eigen::MatrixXd h;       // hidden state after the step
};

// Forward pass keeping every intermediate needed by backpropagation.
std::vector<std::vector<StepCache>> forward_cached(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps) {
  const auto& s = params.shape();
  if (steps.empty()) throw PreconditionError("empty input sequence");
  const Eigen::Index batch = steps[0].cols();
  const int H = s.hidden;
  std::vector<std::vector<StepCache>> cache(static_cast<std::size_t>(s.layers));
  for (int l = 0; l < s.layers; ++l) {
    const auto W = params.input_weights(l);
    const auto U = params.recurrent_weights(l);
    const auto b = params.bias(l);
    auto& layer = cache[static_cast<std::size_t>(l)];
    layer.resize(steps.size());
    Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(H, batch);
    Eigen::ArrayXXd c_prev = Eigen::ArrayXXd::Zero(H, batch);
    for (std::size_t t = 0; t < steps.size(); ++t) {
      auto& sc = layer[t];
      sc.x = (l == 0) ? steps[t] : cache[static_cast<std::size_t>(l - 1)][t].h;
      if (sc.x.rows() != W.cols() || sc.x.cols() != batch) throw PreconditionError("input batch has the wrong shape");
      Eigen::MatrixXd z = W * sc.x + U * h_prev;
      z.colwise() += b;
      sc.i = sigmoid(z.topRows(H).array());
      sc.f = sigmoid(z.middleRows(H, H).array());
      sc.g = z.middleRows(2 * H, H).array().tanh();
      sc.o = sigmoid(z.bottomRows(H).array());
      sc.c = sc.f * c_prev + sc.i * sc.g;
      sc.tanh_c = sc.c.tanh();
      sc.h = (sc.o * sc.tanh_c).matrix();
      h_prev = sc.h;
      c_prev = sc.c;
    }
  }
  return cache;
}

}  // namespace

LstmParameters::LstmParameters(LstmShape shape) : shape_(shape) {
  if (shape.input <= 0 || shape.hidden <= 0 || shape.layers <= 0) throw PreconditionError("LSTM dimensions must be positive");
  Eigen::Index offset = 0;
  const Eigen::Index H4 = 4 * shape.hidden;
  for (int l = 0; l < shape.layers; ++l) {
    const Eigen::Index in = layer_input(l);
    blocks_.push_back({offset, H4, in});
    offset += H4 * in;
    blocks_.push_back({offset, H4, shape.hidden});
    offset += H4 * shape.hidden;
    blocks_.push_back({offset, H4, 1});
    offset += H4;
  }
  blocks_.push_back({offset, shape.hidden, 1});
  offset += shape.hidden;
  blocks_.push_back({offset, 1, 1});
  offset += 1;
  flat_ = Eigen::VectorXd::Zero(offset);
}

LstmParameters::MatrixMap LstmParameters::input_weights(int layer) {
  const auto& b = blocks_[static_cast<std::size_t>(3 * layer)];
  return MatrixMap(flat_.data() + b.offset, b.rows, b.cols);
}
LstmParameters::ConstMatrixMap LstmParameters::input_weights(int layer) const {
  const auto& b = blocks_[static_cast<std::size_t>(3 * layer)];
  return ConstMatrixMap(flat_.data() + b.offset, b.rows, b.cols);
}
LstmParameters::MatrixMap LstmParameters::recurrent_weights(int layer) {
  const auto& b = blocks_[static_cast<std::size_t>(3 * layer + 1)];
  return MatrixMap(flat_.data() + b.offset, b.rows, b.cols);
}
LstmParameters::ConstMatrixMap LstmParameters::recurrent_weights(int layer) const {
  const auto& b = blocks_[static_cast<std::size_t>(3 * layer + 1)];
  return ConstMatrixMap(flat_.data() + b.offset, b.rows, b.cols);
}
LstmParameters::VectorMap LstmParameters::bias(int layer) {
  const auto& b = blocks_[static_cast<std::size_t>(3 * layer + 2)];
  return VectorMap(flat_.data() + b.offset, b.rows);
}
LstmParameters::ConstVectorMap LstmParameters::bias(int layer) const {
  const auto& b = blocks_[static_cast<std::size_t>(3 * layer + 2)];
  return ConstVectorMap(flat_.data() + b.offset, b.rows);
}
LstmParameters::VectorMap LstmParameters::head_weights() {
  const auto& b = blocks_[blocks_.size() - 2];
  return VectorMap(flat_.data() + b.offset, b.rows);
}
LstmParameters::ConstVectorMap LstmParameters::head_weights() const {
  const auto& b = blocks_[blocks_.size() - 2];
  return ConstVectorMap(flat_.data() + b.offset, b.rows);
}

void LstmParameters::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(shape_.hidden));
  for (Eigen::Index i = 0; i < flat_.size(); ++i) flat_[i] = rng.uniform(-k, k);
  for (int l = 0; l < shape_.layers; ++l) {
    auto b = bias(l);
    b.setZero();
    b.segment(shape_.hidden, shape_.hidden).setOnes();
  }
  head_bias() = 0.0;
}

Eigen::RowVectorXd lstm_forward(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps) {
  const auto cache = forward_cached(params, steps);
  const auto& top = cache.back().back().h;
  Eigen::RowVectorXd out = params.head_weights().transpose() * top;
  out.array() += params.head_bias();
  return out;
}

double lstm_loss(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps, const Eigen::RowVectorXd& targets) {
  const Eigen::RowVectorXd out = lstm_forward(params, steps);
  if (out.size() != targets.size()) throw PreconditionError("target count does not match the batch");
  return (out - targets).squaredNorm() / static_cast<double>(targets.size());
}

double lstm_loss_and_gradient(const LstmParameters& params, std::span<const Eigen::MatrixXd> steps,
                              const Eigen::RowVectorXd& targets, Eigen::VectorXd& gradient) {
  const auto& s = params.shape();
  const int H = s.hidden;
  const auto cache = forward_cached(params, steps);
  const Eigen::Index batch = steps[0].cols();
  if (targets.size() != batch) throw PreconditionError("target count does not match the batch");
  const auto T = steps.size();

  const auto& top_h = cache.back().back().h;
  Eigen::RowVectorXd out = params.head_weights().transpose() * top_h;
  out.array() += params.head_bias();
  const Eigen::RowVectorXd residual = out - targets;
  const double loss = residual.squaredNorm() / static_cast<double>(batch);

  gradient = Eigen::VectorXd::Zero(params.size());
  LstmParameters grads(s);  // used only as a layout for views into `gradient`
  grads.flat().swap(gradient);

  const Eigen::RowVectorXd d_out = residual * (2.0 / static_cast<double>(batch));
  grads.head_weights() = top_h * d_out.transpose();
  grads.head_bias() = d_out.sum();

  // Gradient flowing into each step's hidden output from the layer above.
  std::vector<Eigen::MatrixXd> dh_above(T, Eigen::MatrixXd::Zero(H, batch));
  dh_above[T - 1] = params.head_weights() * d_out;

  for (int l = s.layers - 1; l >= 0; --l) {
    const auto& layer = cache[static_cast<std::size_t>(l)];
    const auto W = params.input_weights(l);
    const auto U = params.recurrent_weights(l);
    auto dW = grads.input_weights(l);
    auto dU = grads.recurrent_weights(l);
    auto db = grads.bias(l);
    std::vector<Eigen::MatrixXd> dx(T);
    Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(H, batch);
    Eigen::ArrayXXd dc_next = Eigen::ArrayXXd::Zero(H, batch);
    Eigen::MatrixXd dz(4 * H, batch);
    for (std::size_t t = T; t-- > 0;) {
      const auto& sc = layer[t];
      const Eigen::ArrayXXd dh = (dh_above[t] + dh_next).array();
      const Eigen::ArrayXXd dc = dc_next + dh * sc.o * (1.0 - sc.tanh_c.square());
      const Eigen::ArrayXXd c_prev = t > 0 ? layer[t - 1].c : Eigen::ArrayXXd::Zero(H, batch);
      dz.topRows(H) = (dc * sc.g * sc.i * (1.0 - sc.i)).matrix();
      dz.middleRows(H, H) = (dc * c_prev * sc.f * (1.0 - sc.f)).matrix();
      dz.middleRows(2 * H, H) = (dc * sc.i * (1.0 - sc.g.square())).matrix();
      dz.bottomRows(H) = (dh * sc.tanh_c * sc.o * (1.0 - sc.o)).matrix();
      dc_next = dc * sc.f;
      dW.noalias() += dz * sc.x.transpose();
      if (t > 0) dU.noalias() += dz * layer[t - 1].h.transpose();
      db += dz.rowwise().sum();
      if (l > 0) dx[t] = W.transpose() * dz;
      dh_next = U.transpose() * dz;
    }
    if (l > 0) dh_above = std::move(dx);
  }
  gradient.swap(grads.flat());
  return loss;
}

}  // namespace txtopo
