#include "macdec/net.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace macdec {

namespace {

constexpr double kLeakySlope = 0.01;

inline Eigen::MatrixXd leaky(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

inline Eigen::MatrixXd leaky_grad(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; });
}

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

bool GradientSet::all_finite() const {
  for (const auto& t : tensors)
    if (!t.allFinite()) return false;
  return true;
}

void GradientSet::scale(double s) {
  for (auto& t : tensors) t *= s;
}

RecurrentQNet::RecurrentQNet(NetSpec spec) : spec_(spec) {
  if (spec.input <= 0 || spec.hidden <= 0 || spec.lstm <= 0 || spec.output <= 0)
    throw std::invalid_argument("net dimensions must be positive");
  int in = spec.input, H = spec.hidden, L = spec.lstm, out = spec.output;
  W1_.setZero(H, in);
  b1_.setZero(H, 1);
  W2_.setZero(H, H);
  b2_.setZero(H, 1);
  Wx_.setZero(4 * L, H);
  Wh_.setZero(4 * L, L);
  bl_.setZero(4 * L, 1);
  W3_.setZero(H, L);
  b3_.setZero(H, 1);
  W4_.setZero(out, H);
  b4_.setZero(out, 1);
}

std::vector<Eigen::MatrixXd*> RecurrentQNet::parameters() {
  return {&W1_, &b1_, &W2_, &b2_, &Wx_, &Wh_, &bl_, &W3_, &b3_, &W4_, &b4_};
}

std::vector<const Eigen::MatrixXd*> RecurrentQNet::parameters() const {
  return {&W1_, &b1_, &W2_, &b2_, &Wx_, &Wh_, &bl_, &W3_, &b3_, &W4_, &b4_};
}

void RecurrentQNet::init_weights(Rng& rng) {
  auto fill = [&rng](Eigen::MatrixXd& m, int fan_in) {
    double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-s, s);
  };
  int in = spec_.input, H = spec_.hidden, L = spec_.lstm;
  fill(W1_, in);
  fill(b1_, in);
  fill(W2_, H);
  fill(b2_, H);
  fill(Wx_, H);
  fill(Wh_, L);
  fill(bl_, H);
  bl_.block(L, 0, L, 1).array() += 1.0;  // forget-gate bias
  fill(W3_, L);
  fill(b3_, L);
  fill(W4_, H);
  fill(b4_, H);
  adam_m_.clear();
  adam_v_.clear();
  adam_t_ = 0;
}

HiddenState RecurrentQNet::zero_hidden(int batch) const {
  HiddenState hs;
  hs.h.setZero(spec_.lstm, batch);
  hs.c.setZero(spec_.lstm, batch);
  return hs;
}

Eigen::VectorXd RecurrentQNet::step(const Eigen::VectorXd& x,
                                    HiddenState& hs) const {
  if (x.size() != spec_.input)
    throw std::invalid_argument("input size does not match net spec");
  int L = spec_.lstm;
  Eigen::MatrixXd a1 = leaky(W1_ * x + b1_);
  Eigen::MatrixXd a2 = leaky(W2_ * a1 + b2_);
  Eigen::MatrixXd pre = Wx_ * a2 + Wh_ * hs.h + bl_.replicate(1, hs.h.cols());
  Eigen::MatrixXd i = sigmoid(pre.topRows(L));
  Eigen::MatrixXd f = sigmoid(pre.middleRows(L, L));
  Eigen::MatrixXd g = pre.middleRows(2 * L, L).array().tanh();
  Eigen::MatrixXd o = sigmoid(pre.bottomRows(L));
  hs.c = f.cwiseProduct(hs.c) + i.cwiseProduct(g);
  hs.h = o.cwiseProduct(hs.c.array().tanh().matrix());
  Eigen::MatrixXd a3 = leaky(W3_ * hs.h + b3_);
  return W4_ * a3 + b4_;
}

ForwardCache RecurrentQNet::forward_sequence(
    const std::vector<Eigen::MatrixXd>& inputs, const HiddenState& h0,
    const std::vector<Eigen::VectorXd>& mask) const {
  int T = static_cast<int>(inputs.size());
  if (T == 0) throw std::invalid_argument("empty input sequence");
  int B = static_cast<int>(inputs[0].cols());
  if (!mask.empty() && static_cast<int>(mask.size()) != T)
    throw std::invalid_argument("mask length does not match sequence");
  int L = spec_.lstm;

  ForwardCache cc;
  cc.steps = T;
  cc.batch = B;
  cc.h0 = h0;
  cc.x.reserve(T);
  Eigen::MatrixXd h = h0.h, c = h0.c;
  for (int t = 0; t < T; ++t) {
    if (inputs[t].rows() != spec_.input || inputs[t].cols() != B)
      throw std::invalid_argument("input shape mismatch in sequence");
    Eigen::MatrixXd xt = inputs[t];
    if (!mask.empty()) {
      for (int b = 0; b < B; ++b)
        if (mask[t](b) == 0.0) xt.col(b).setZero();
    }
    Eigen::MatrixXd z1 = W1_ * xt + b1_.replicate(1, B);
    Eigen::MatrixXd a1 = leaky(z1);
    Eigen::MatrixXd z2 = W2_ * a1 + b2_.replicate(1, B);
    Eigen::MatrixXd a2 = leaky(z2);
    Eigen::MatrixXd pre = Wx_ * a2 + Wh_ * h + bl_.replicate(1, B);
    Eigen::MatrixXd gi = sigmoid(pre.topRows(L));
    Eigen::MatrixXd gf = sigmoid(pre.middleRows(L, L));
    Eigen::MatrixXd gg = pre.middleRows(2 * L, L).array().tanh();
    Eigen::MatrixXd go = sigmoid(pre.bottomRows(L));
    c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    Eigen::MatrixXd tc = c.array().tanh();
    h = go.cwiseProduct(tc);
    Eigen::MatrixXd z3 = W3_ * h + b3_.replicate(1, B);
    Eigen::MatrixXd a3 = leaky(z3);
    Eigen::MatrixXd q = W4_ * a3 + b4_.replicate(1, B);

    cc.x.push_back(std::move(xt));
    cc.z1.push_back(std::move(z1));
    cc.a1.push_back(std::move(a1));
    cc.z2.push_back(std::move(z2));
    cc.a2.push_back(std::move(a2));
    cc.gi.push_back(std::move(gi));
    cc.gf.push_back(std::move(gf));
    cc.gg.push_back(std::move(gg));
    cc.go.push_back(std::move(go));
    cc.c.push_back(c);
    cc.h.push_back(h);
    cc.tanh_c.push_back(std::move(tc));
    cc.z3.push_back(std::move(z3));
    cc.a3.push_back(std::move(a3));
    cc.q.push_back(std::move(q));
  }
  return cc;
}

GradientSet RecurrentQNet::backward_sequence(
    const ForwardCache& cache,
    const std::vector<Eigen::MatrixXd>& upstream) const {
  if (cache.steps == 0) throw std::logic_error("backward without forward");
  if (static_cast<int>(upstream.size()) != cache.steps)
    throw std::invalid_argument("upstream gradient length mismatch");
  int T = cache.steps, B = cache.batch, L = spec_.lstm;

  GradientSet gs = zero_gradients();
  auto& g = gs.tensors;  // W1 b1 W2 b2 Wx Wh bl W3 b3 W4 b4
  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(L, B);
  Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(L, B);

  for (int t = T - 1; t >= 0; --t) {
    const Eigen::MatrixXd& dq = upstream[t];
    if (dq.rows() != spec_.output || dq.cols() != B)
      throw std::invalid_argument("upstream gradient shape mismatch");
    // output head
    g[9] += dq * cache.a3[t].transpose();
    g[10] += dq.rowwise().sum();
    Eigen::MatrixXd da3 = W4_.transpose() * dq;
    Eigen::MatrixXd dz3 = da3.cwiseProduct(leaky_grad(cache.z3[t]));
    g[7] += dz3 * cache.h[t].transpose();
    g[8] += dz3.rowwise().sum();
    Eigen::MatrixXd dh = W3_.transpose() * dz3 + dh_next;

    // LSTM cell
    const Eigen::MatrixXd& i = cache.gi[t];
    const Eigen::MatrixXd& f = cache.gf[t];
    const Eigen::MatrixXd& gg = cache.gg[t];
    const Eigen::MatrixXd& o = cache.go[t];
    const Eigen::MatrixXd& tc = cache.tanh_c[t];
    const Eigen::MatrixXd c_prev = t > 0 ? cache.c[t - 1] : cache.h0.c;
    const Eigen::MatrixXd h_prev = t > 0 ? cache.h[t - 1] : cache.h0.h;

    Eigen::MatrixXd do_ = dh.cwiseProduct(tc);
    Eigen::MatrixXd dc =
        dc_next + dh.cwiseProduct(o).cwiseProduct(
                      (1.0 - tc.array().square()).matrix());
    Eigen::MatrixXd di = dc.cwiseProduct(gg);
    Eigen::MatrixXd dg = dc.cwiseProduct(i);
    Eigen::MatrixXd df = dc.cwiseProduct(c_prev);

    Eigen::MatrixXd dpre(4 * L, B);
    dpre.topRows(L) = di.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
    dpre.middleRows(L, L) =
        df.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
    dpre.middleRows(2 * L, L) =
        dg.cwiseProduct((1.0 - gg.array().square()).matrix());
    dpre.bottomRows(L) =
        do_.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());

    g[4] += dpre * cache.a2[t].transpose();
    g[5] += dpre * h_prev.transpose();
    g[6] += dpre.rowwise().sum();
    dh_next = Wh_.transpose() * dpre;
    dc_next = dc.cwiseProduct(f);

    // encoder layers
    Eigen::MatrixXd da2 = Wx_.transpose() * dpre;
    Eigen::MatrixXd dz2 = da2.cwiseProduct(leaky_grad(cache.z2[t]));
    g[2] += dz2 * cache.a1[t].transpose();
    g[3] += dz2.rowwise().sum();
    Eigen::MatrixXd da1 = W2_.transpose() * dz2;
    Eigen::MatrixXd dz1 = da1.cwiseProduct(leaky_grad(cache.z1[t]));
    g[0] += dz1 * cache.x[t].transpose();
    g[1] += dz1.rowwise().sum();
  }
  return gs;
}

GradientSet RecurrentQNet::zero_gradients() const {
  GradientSet gs;
  for (const auto* p : parameters())
    gs.tensors.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  return gs;
}

void RecurrentQNet::optimizer_step(const GradientSet& grads, double lr,
                                   double scale) {
  auto params = parameters();
  if (grads.tensors.size() != params.size())
    throw std::invalid_argument("gradient set does not match parameters");
  if (!grads.all_finite())
    throw std::runtime_error("non-finite gradients in optimizer_step");
  if (adam_m_.empty()) {
    for (const auto* p : params) {
      adam_m_.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      adam_v_.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++adam_t_;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
  for (size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd g = grads.tensors[k] * scale;
    adam_m_[k] = beta1 * adam_m_[k] + (1.0 - beta1) * g;
    adam_v_[k] = beta2 * adam_v_[k] + (1.0 - beta2) * g.cwiseProduct(g);
    Eigen::ArrayXXd mhat = adam_m_[k].array() / bc1;
    Eigen::ArrayXXd vhat = adam_v_[k].array() / bc2;
    *params[k] -= (lr * mhat / (vhat.sqrt() + eps)).matrix();
  }
}

void RecurrentQNet::copy_into_target(RecurrentQNet& target) const {
  if (!(target.spec_ == spec_))
    throw std::invalid_argument("target architecture mismatch");
  auto src = parameters();
  auto dst = target.parameters();
  for (size_t k = 0; k < src.size(); ++k) *dst[k] = *src[k];
}

std::int64_t RecurrentQNet::parameter_count() const {
  std::int64_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

std::vector<double> RecurrentQNet::flatten_parameters() const {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(parameter_count()));
  for (const auto* p : parameters())
    flat.insert(flat.end(), p->data(), p->data() + p->size());
  return flat;
}

void RecurrentQNet::unflatten_parameters(const std::vector<double>& flat) {
  if (flat.size() != static_cast<size_t>(parameter_count()))
    throw std::invalid_argument("flat parameter size mismatch");
  size_t off = 0;
  for (auto* p : parameters()) {
    std::memcpy(p->data(), flat.data() + off, sizeof(double) * p->size());
    off += p->size();
  }
}

namespace {
constexpr char kMagic[4] = {'M', 'D', 'R', 'Q'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("truncated checkpoint");
  return v;
}
}  // namespace

void RecurrentQNet::save(std::ostream& os) const {
  // little-endian host assumed (x86/aarch64 targets)
  os.write(kMagic, 4);
  write_raw(os, kVersion);
  write_raw<std::int32_t>(os, spec_.input);
  write_raw<std::int32_t>(os, spec_.hidden);
  write_raw<std::int32_t>(os, spec_.lstm);
  write_raw<std::int32_t>(os, spec_.output);
  auto flat = flatten_parameters();
  write_raw<std::uint64_t>(os, flat.size());
  os.write(reinterpret_cast<const char*>(flat.data()),
           static_cast<std::streamsize>(flat.size() * sizeof(double)));
}

RecurrentQNet RecurrentQNet::load(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file");
  auto version = read_raw<std::uint32_t>(is);
  if (version != kVersion) throw std::runtime_error("unknown checkpoint version");
  NetSpec spec;
  spec.input = read_raw<std::int32_t>(is);
  spec.hidden = read_raw<std::int32_t>(is);
  spec.lstm = read_raw<std::int32_t>(is);
  spec.output = read_raw<std::int32_t>(is);
  RecurrentQNet net(spec);
  auto count = read_raw<std::uint64_t>(is);
  if (count != static_cast<std::uint64_t>(net.parameter_count()))
    throw std::runtime_error("checkpoint parameter count mismatch");
  std::vector<double> flat(count);
  is.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw std::runtime_error("truncated checkpoint");
  net.unflatten_parameters(flat);
  return net;
}

}  // namespace macdec
