#include "snakesim/mlp.hpp"

#include <cmath>

namespace snakesim {

namespace {

struct Views {
  Eigen::Map<const MatX> w1, w2, w3;
  Eigen::Map<const VecX> b1, b2, b3;
};

struct MutViews {
  Eigen::Map<MatX> w1, w2, w3;
  Eigen::Map<VecX> b1, b2, b3;
};

Views make_views(const MlpSpec& s, const VecX& p) {
  const double* d = p.data();
  const int h = s.n_hidden;
  return Views{
      {d, h, s.n_in},
      {d + h * s.n_in + h, h, h},
      {d + h * s.n_in + h + h * h + h, s.n_out, h},
      {d + h * s.n_in, h},
      {d + h * s.n_in + h + h * h, h},
      {d + h * s.n_in + h + h * h + h + s.n_out * h, s.n_out},
  };
}

MutViews make_views(const MlpSpec& s, VecX* p) {
  double* d = p->data();
  const int h = s.n_hidden;
  return MutViews{
      {d, h, s.n_in},
      {d + h * s.n_in + h, h, h},
      {d + h * s.n_in + h + h * h + h, s.n_out, h},
      {d + h * s.n_in, h},
      {d + h * s.n_in + h + h * h, h},
      {d + h * s.n_in + h + h * h + h + s.n_out * h, s.n_out},
  };
}

}  // namespace

VecX mlp_init(const MlpSpec& spec, Rng* rng, double out_scale) {
  VecX params(spec.param_count());
  params.setZero();
  auto v = make_views(spec, &params);
  auto fill = [&](Eigen::Map<MatX>& w, double scale) {
    const double bound = scale * std::sqrt(6.0 / (w.rows() + w.cols()));
    for (int c = 0; c < w.cols(); ++c)
      for (int r = 0; r < w.rows(); ++r) w(r, c) = rng->uniform(-bound, bound);
  };
  fill(v.w1, 1.0);
  fill(v.w2, 1.0);
  fill(v.w3, out_scale);
  return params;
}

VecX mlp_forward(const MlpSpec& spec, const VecX& params, const VecX& x, MlpCache* cache) {
  const auto v = make_views(spec, params);
  VecX h1 = (v.w1 * x + v.b1).array().tanh();
  VecX h2 = (v.w2 * h1 + v.b2).array().tanh();
  VecX out = v.w3 * h2 + v.b3;
  if (cache) {
    cache->x = x;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->out = out;
  }
  return out;
}

void mlp_backward(const MlpSpec& spec, const VecX& params, const MlpCache& cache,
                  const VecX& dout, VecX* grad) {
  const auto v = make_views(spec, params);
  auto g = make_views(spec, grad);

  g.w3.noalias() += dout * cache.h2.transpose();
  g.b3 += dout;
  VecX dh2 = v.w3.transpose() * dout;
  VecX da2 = dh2.array() * (1.0 - cache.h2.array().square());
  g.w2.noalias() += da2 * cache.h1.transpose();
  g.b2 += da2;
  VecX dh1 = v.w2.transpose() * da2;
  VecX da1 = dh1.array() * (1.0 - cache.h1.array().square());
  g.w1.noalias() += da1 * cache.x.transpose();
  g.b1 += da1;
}

void Adam::reset(int n) {
  m_ = VecX::Zero(n);
  v_ = VecX::Zero(n);
  t_ = 0;
}

void Adam::step(VecX* params, const VecX& grad) {
  ++t_;
  m_ = beta1 * m_ + (1.0 - beta1) * grad;
  v_ = beta2 * v_.array() + (1.0 - beta2) * grad.array().square();
  const double bc1 = 1.0 - std::pow(beta1, t_);
  const double bc2 = 1.0 - std::pow(beta2, t_);
  params->array() -=
      learning_rate * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + epsilon);
}

}  // namespace snakesim
