#pragma once

#include "snakesim/math.hpp"

namespace snakesim {

// Two-hidden-layer tanh perceptron on a flat parameter vector
// [W1, b1, W2, b2, W3, b3] so optimizers treat the whole net as one vector.
struct MlpSpec {
  int n_in = 0;
  int n_hidden = 64;
  int n_out = 0;

  int param_count() const {
    return n_hidden * n_in + n_hidden + n_hidden * n_hidden + n_hidden + n_out * n_hidden + n_out;
  }
};

// Xavier-uniform weights, zero biases; the output layer is scaled by
// out_scale (small for policy means so initial actions stay near zero).
VecX mlp_init(const MlpSpec& spec, Rng* rng, double out_scale = 1.0);

struct MlpCache {
  VecX x, h1, h2, out;  // post-activation values
};

VecX mlp_forward(const MlpSpec& spec, const VecX& params, const VecX& x,
                 MlpCache* cache = nullptr);

// Accumulates dLoss/dparams into *grad given dLoss/dout.
void mlp_backward(const MlpSpec& spec, const VecX& params, const MlpCache& cache,
                  const VecX& dout, VecX* grad);

struct Adam {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void reset(int n);
  void step(VecX* params, const VecX& grad);

 private:
  VecX m_, v_;
  int t_ = 0;
};

}  // namespace snakesim
