#include "snakesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snakesim/errors.hpp"

namespace snakesim {

void ErrorSeries::finalize() {
  mean = 0.0;
  max = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    mean += v;
    max = std::max(max, v);
  }
  mean = values.empty() ? 0.0 : mean / static_cast<double>(values.size());
  final = values.empty() ? 0.0 : values.back();
}

namespace {

void check_aligned(const Trajectory& a, const Trajectory& b) {
  if (a.samples() != b.samples())
    throw ConfigError("trajectory length mismatch: " + std::to_string(a.samples()) + " vs " +
                      std::to_string(b.samples()));
  if (std::abs(a.sample_dt - b.sample_dt) > 1e-9)
    throw ConfigError("trajectory sample rate mismatch");
}

}  // namespace

ErrorSeries euclidean_error(const Trajectory& reference, const Trajectory& candidate) {
  check_aligned(reference, candidate);
  ErrorSeries out;
  out.time = reference.time;
  out.values.reserve(reference.samples());
  for (int k = 0; k < reference.samples(); ++k) {
    const double dx = reference.head_pos[k].x() - candidate.head_pos[k].x();
    const double dy = reference.head_pos[k].y() - candidate.head_pos[k].y();
    out.values.push_back(std::sqrt(dx * dx + dy * dy));
  }
  out.finalize();
  return out;
}

ErrorSeries sliding_correlation(std::span<const double> time, std::span<const double> a,
                                std::span<const double> b, int window) {
  if (a.size() != b.size() || a.size() != time.size())
    throw ConfigError("signal length mismatch");
  if (window < 3) throw ConfigError("correlation window must be >= 3 samples");
  if (static_cast<size_t>(window) > a.size())
    throw ConfigError("correlation window exceeds signal length");

  ErrorSeries out;
  const int n = static_cast<int>(a.size());
  out.time.reserve(n - window + 1);
  out.values.reserve(n - window + 1);
  out.degenerate.reserve(n - window + 1);
  for (int end = window - 1; end < n; ++end) {
    const int start = end - window + 1;
    double ma = 0.0, mb = 0.0;
    for (int i = start; i <= end; ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= window;
    mb /= window;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int i = start; i <= end; ++i) {
      const double da = a[i] - ma;
      const double db = b[i] - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
    out.time.push_back(time[end]);
    if (saa <= 0.0 || sbb <= 0.0) {
      out.values.push_back(0.0);
      out.degenerate.push_back(1);
    } else {
      out.values.push_back(std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0));
      out.degenerate.push_back(0);
    }
  }
  out.finalize();
  return out;
}

JointCorrelation joint_correlation_summary(const Trajectory& reference,
                                           const Trajectory& candidate, int window) {
  check_aligned(reference, candidate);
  if (reference.joints() != candidate.joints())
    throw ConfigError("trajectory joint count mismatch");

  JointCorrelation out;
  const int n_joints = reference.joints();
  std::vector<double> desired(reference.samples());
  std::vector<double> actual(reference.samples());
  for (int j = 0; j < n_joints; ++j) {
    for (int k = 0; k < reference.samples(); ++k) {
      desired[k] = reference.joint_refs(k, j);
      actual[k] = candidate.joint_angles(k, j);
    }
    out.per_joint.push_back(sliding_correlation(reference.time, desired, actual, window));
  }

  const int n_win = static_cast<int>(out.per_joint[0].values.size());
  out.mean.time = out.min.time = out.max.time = out.per_joint[0].time;
  out.mean.values.assign(n_win, 0.0);
  out.min.values.assign(n_win, std::numeric_limits<double>::infinity());
  out.max.values.assign(n_win, -std::numeric_limits<double>::infinity());
  for (int j = 0; j < n_joints; ++j) {
    for (int k = 0; k < n_win; ++k) {
      const double v = out.per_joint[j].values[k];
      out.mean.values[k] += v / n_joints;
      out.min.values[k] = std::min(out.min.values[k], v);
      out.max.values[k] = std::max(out.max.values[k], v);
    }
  }
  out.mean.finalize();
  out.min.finalize();
  out.max.finalize();
  return out;
}

namespace {

// Residual of the best quadrature fit a*sin(w t) + b*cos(w t) at fixed w,
// solving the 2x2 normal equations.
struct QuadratureFit {
  double a = 0.0, b = 0.0, sq_residual = 0.0;
};

QuadratureFit quadrature_fit(std::span<const double> t, std::span<const double> y, double w) {
  double sss = 0.0, scc = 0.0, ssc = 0.0, sys = 0.0, syc = 0.0, syy = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double s = std::sin(w * t[i]);
    const double c = std::cos(w * t[i]);
    sss += s * s;
    scc += c * c;
    ssc += s * c;
    sys += y[i] * s;
    syc += y[i] * c;
    syy += y[i] * y[i];
  }
  const double det = sss * scc - ssc * ssc;
  QuadratureFit fit;
  if (std::abs(det) < 1e-12 * (sss * scc + 1e-300)) {
    fit.sq_residual = syy;
    return fit;
  }
  fit.a = (sys * scc - syc * ssc) / det;
  fit.b = (syc * sss - sys * ssc) / det;
  fit.sq_residual = std::max(0.0, syy - fit.a * sys - fit.b * syc);
  return fit;
}

}  // namespace

SinusoidFit fit_sinusoid(std::span<const double> t, std::span<const double> y, double f_init_hz) {
  if (t.size() != y.size()) throw ConfigError("fit_sinusoid length mismatch");
  if (!(f_init_hz > 0.0)) throw ConfigError("fit_sinusoid needs f_init > 0");
  const double span = t.empty() ? 0.0 : t.back() - t.front();
  if (t.size() < 8 || span * f_init_hz < 2.0)
    throw ConfigError("fit_sinusoid needs at least two periods of data");

  const double w0 = 2.0 * kPi * f_init_hz;
  double lo = 0.8 * w0, hi = 1.2 * w0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = quadrature_fit(t, y, x1).sq_residual;
  double f2 = quadrature_fit(t, y, x2).sq_residual;
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = quadrature_fit(t, y, x1).sq_residual;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = quadrature_fit(t, y, x2).sq_residual;
    }
    if (hi - lo < 1e-12 * w0) break;
  }
  const double w = 0.5 * (lo + hi);
  const QuadratureFit q = quadrature_fit(t, y, w);

  SinusoidFit fit;
  fit.omega = w;
  fit.amplitude = std::hypot(q.a, q.b);
  fit.phase = fit.amplitude > 0.0 ? wrap_angle(std::atan2(q.b, q.a)) : 0.0;
  fit.residual = std::sqrt(q.sq_residual / static_cast<double>(t.size()));
  fit.degenerate = fit.amplitude < 1e-6;
  return fit;
}

}  // namespace snakesim
