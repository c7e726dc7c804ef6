#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "macdec/rng.hpp"

namespace macdec {

struct NetSpec {
  int input = 1;
  int hidden = 32;
  int lstm = 32;
  int output = 1;
  friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

// LSTM cell and hidden vectors, one column per batch sample. Zeroed at
// episode start.
struct HiddenState {
  Eigen::MatrixXd h, c;
};

// Per-parameter gradient tensors in the same order as RecurrentQNet's
// parameter list.
struct GradientSet {
  std::vector<Eigen::MatrixXd> tensors;
  bool all_finite() const;
  void scale(double s);
};

// Activations cached by forward_sequence for the exact backward pass.
struct ForwardCache {
  int steps = 0;
  int batch = 0;
  std::vector<Eigen::MatrixXd> x;      // masked inputs
  std::vector<Eigen::MatrixXd> z1, a1, z2, a2;
  std::vector<Eigen::MatrixXd> gi, gf, gg, go;  // post-activation gates
  std::vector<Eigen::MatrixXd> c, h, tanh_c;
  std::vector<Eigen::MatrixXd> z3, a3;
  std::vector<Eigen::MatrixXd> q;
  HiddenState h0;
};

// FF(in->H) -> FF(H->H) -> LSTM(H->L) -> FF(L->H) -> FF(H->out), LeakyReLU
// (slope 0.01) on the feedforward layers, linear output head. All math in
// doubles; batch samples are matrix columns.
class RecurrentQNet {
 public:
  explicit RecurrentQNet(NetSpec spec);

  const NetSpec& spec() const { return spec_; }

  // uniform +-1/sqrt(fan_in), LSTM forget-gate bias +1
  void init_weights(Rng& rng);

  HiddenState zero_hidden(int batch = 1) const;

  // One acting step; advances `hs` in place and returns the q row.
  Eigen::VectorXd step(const Eigen::VectorXd& x, HiddenState& hs) const;

  // `inputs[t]` is input x batch; `mask[t]` has one 0/1 entry per sample.
  // Masked steps advance the hidden state with a zero input.
  ForwardCache forward_sequence(const std::vector<Eigen::MatrixXd>& inputs,
                                const HiddenState& h0,
                                const std::vector<Eigen::VectorXd>& mask) const;

  // Exact gradients of sum_t <upstream[t], q[t]> w.r.t. every parameter.
  GradientSet backward_sequence(const ForwardCache& cache,
                                const std::vector<Eigen::MatrixXd>& upstream) const;

  // Adam update (beta1 0.9, beta2 0.999, eps 1e-8) applied in place;
  // `scale` multiplies the gradients first and stays 1 unless a caller has
  // not already applied per-sample scaling.
  void optimizer_step(const GradientSet& grads, double lr, double scale = 1.0);

  // Parameters become bit-equal copies; optimizer state is not transferred.
  void copy_into_target(RecurrentQNet& target) const;

  GradientSet zero_gradients() const;
  std::vector<Eigen::MatrixXd*> parameters();
  std::vector<const Eigen::MatrixXd*> parameters() const;
  std::int64_t parameter_count() const;

  // flat views used by checkpointing and finite-difference tests
  std::vector<double> flatten_parameters() const;
  void unflatten_parameters(const std::vector<double>& flat);

  void save(std::ostream& os) const;
  static RecurrentQNet load(std::istream& is);

 private:
  NetSpec spec_;
  // parameter order: W1 b1 W2 b2 Wx Wh bl W3 b3 W4 b4
  Eigen::MatrixXd W1_, b1_, W2_, b2_, Wx_, Wh_, bl_, W3_, b3_, W4_, b4_;
  // Adam state
  std::vector<Eigen::MatrixXd> adam_m_, adam_v_;
  std::int64_t adam_t_ = 0;
};

}  // namespace macdec
