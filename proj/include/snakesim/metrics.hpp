#pragma once

#include <span>
#include <vector>

#include "snakesim/math.hpp"
#include "snakesim/simulator.hpp"

namespace snakesim {

struct ErrorSeries {
  std::vector<double> time;
  std::vector<double> values;
  std::vector<char> degenerate;  // per sample, correlation windows only
  double mean = 0.0;
  double max = 0.0;
  double final = 0.0;

  void finalize();
};

// Pointwise xy-plane head-position distance between two equally sampled
// trajectories. Throws ConfigError on length/rate mismatch.
ErrorSeries euclidean_error(const Trajectory& reference, const Trajectory& candidate);

// Pearson correlation over a trailing window, emitted from sample window-1.
// Zero-variance windows yield 0 with the degenerate flag set.
ErrorSeries sliding_correlation(std::span<const double> time, std::span<const double> a,
                                std::span<const double> b, int window);

struct JointCorrelation {
  std::vector<ErrorSeries> per_joint;
  ErrorSeries mean;
  ErrorSeries min;
  ErrorSeries max;
};

// Correlates each candidate joint angle against the recorded desired signal
// of the reference trajectory, then aggregates pointwise across joints.
JointCorrelation joint_correlation_summary(const Trajectory& reference,
                                           const Trajectory& candidate, int window);

struct SinusoidFit {
  double amplitude = 0.0;  // >= 0
  double omega = 0.0;      // rad/s
  double phase = 0.0;      // wrapped to (-pi, pi]
  double residual = 0.0;   // RMS of y - fit
  bool degenerate = false; // flat signal
};

// Least-squares fit of y = A*sin(omega*t + phi). The quadrature pair is
// solved linearly at fixed omega; omega itself is refined by golden-section
// search within +-20% of 2*pi*f_init. Requires at least two periods of data.
SinusoidFit fit_sinusoid(std::span<const double> t, std::span<const double> y, double f_init_hz);

}  // namespace snakesim
