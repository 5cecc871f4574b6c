#include "switching.hpp"

#include <cmath>

namespace nesslab {

SwitchingFunction SwitchingFunction::exponential(double t_min, double eps_tail) {
  require(t_min < 0, "switching: t_min must be negative");
  require(std::exp(t_min) <= eps_tail * (1 + 1e-12),
          "switching: truncated tail exp(t_min) exceeds eps_tail");
  SwitchingFunction f;
  f.kind_ = Kind::exponential;
  f.t_min_ = t_min;
  f.eps_tail_ = eps_tail;
  return f;
}

SwitchingFunction SwitchingFunction::tabulated(const std::vector<double>& t,
                                               const std::vector<double>& chi,
                                               double eps_tail) {
  require(t.size() == chi.size() && t.size() >= 3,
          "switching: tabulated kind needs >= 3 samples");
  require(t.back() == 0.0, "switching: last sample must sit at t = 0");
  require(std::abs(chi.back() - 1.0) < 1e-12, "switching: chi(0) must be 1");
  for (size_t k = 1; k < t.size(); ++k) {
    require(t[k] > t[k - 1], "switching: sample times must ascend");
    require(chi[k] > chi[k - 1], "switching: samples must increase strictly");
  }
  require(chi.front() >= 0, "switching: chi must be nonnegative");
  require(chi.front() <= eps_tail,
          "switching: chi(t_min) exceeds eps_tail, cutoff too late");
  SwitchingFunction f;
  f.kind_ = Kind::tabulated_smooth;
  f.t_min_ = t.front();
  f.eps_tail_ = eps_tail;
  f.tab_t_ = t;
  f.tab_v_ = chi;
  // monotone cubic Hermite slopes (Fritsch-Carlson)
  const size_t m = t.size();
  std::vector<double> d(m - 1);
  for (size_t k = 0; k + 1 < m; ++k)
    d[k] = (chi[k + 1] - chi[k]) / (t[k + 1] - t[k]);
  f.tab_d_.assign(m, 0.0);
  f.tab_d_[0] = d[0];
  f.tab_d_[m - 1] = d[m - 2];
  for (size_t k = 1; k + 1 < m; ++k) {
    double w1 = 2 * (t[k + 1] - t[k]) + (t[k] - t[k - 1]);
    double w2 = (t[k + 1] - t[k]) + 2 * (t[k] - t[k - 1]);
    f.tab_d_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
  }
  return f;
}

double SwitchingFunction::tab_value(double t) const {
  if (t <= t_min_) return 0.0;
  if (t >= 0) return 1.0;
  auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
  size_t k = static_cast<size_t>(it - tab_t_.begin()) - 1;
  double hk = tab_t_[k + 1] - tab_t_[k];
  double u = (t - tab_t_[k]) / hk;
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  double h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u);
  double h11 = u * u * (u - 1);
  return h00 * tab_v_[k] + h10 * hk * tab_d_[k] + h01 * tab_v_[k + 1] +
         h11 * hk * tab_d_[k + 1];
}

double SwitchingFunction::tab_deriv(double t) const {
  if (t <= t_min_ || t >= 0) return (t >= 0 && t <= 0) ? tab_d_.back() : 0.0;
  auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
  size_t k = static_cast<size_t>(it - tab_t_.begin()) - 1;
  double hk = tab_t_[k + 1] - tab_t_[k];
  double u = (t - tab_t_[k]) / hk;
  double g00 = 6 * u * (u - 1) / hk;
  double g10 = (1 - u) * (1 - 3 * u);
  double g01 = -g00;
  double g11 = u * (3 * u - 2);
  return g00 * tab_v_[k] + g10 * tab_d_[k] + g01 * tab_v_[k + 1] +
         g11 * tab_d_[k + 1];
}

double SwitchingFunction::tab_integral_upto(double t) const {
  // cumulative trapezoid on a fine fixed subgrid; accuracy is ample for the
  // contract audits that use the tabulated kind
  if (t <= t_min_) return 0.0;
  t = std::min(t, 0.0);
  const int steps = 4096;
  double acc = 0, dt = (t - t_min_) / steps;
  double prev = tab_value(t_min_);
  for (int k = 1; k <= steps; ++k) {
    double cur = tab_value(t_min_ + k * dt);
    acc += 0.5 * (prev + cur) * dt;
    prev = cur;
  }
  return acc;
}

double SwitchingFunction::value(double t) const {
  if (kind_ == Kind::exponential)
    return (t <= t_min_) ? 0.0 : std::exp(std::min(t, 0.0));
  return tab_value(t);
}

SwitchingEval SwitchingFunction::eval(double t) const {
  if (t > 0) throw config_error("switching: chi queried at t > 0");
  SwitchingEval e;
  if (kind_ == Kind::exponential) {
    if (t <= t_min_) return e;
    e.value = std::exp(t);
    e.derivative = e.value;
    e.integral_from_t_min = std::exp(t) - std::exp(t_min_);
  } else {
    e.value = tab_value(t);
    e.derivative = tab_deriv(t);
    e.integral_from_t_min = tab_integral_upto(t);
  }
  return e;
}

double SwitchingFunction::integral(double t1, double t2) const {
  t1 = std::max(t1, t_min_);
  t2 = std::min(t2, 0.0);
  if (t2 <= t1) return 0.0;
  if (kind_ == Kind::exponential) return std::exp(t2) - std::exp(t1);
  return tab_integral_upto(t2) - tab_integral_upto(t1);
}

void SwitchingFunction::audit(int samples) const {
  double prev = -1;
  for (int k = 1; k < samples; ++k) {
    double t = t_min_ * (1.0 - double(k) / samples);
    double v = value(t);
    require(v > 0 && v < 1.0 + 1e-12, "switching: range violated");
    require(v > prev, "switching: monotonicity violated");
    prev = v;
  }
  require(std::abs(value(0.0) - 1.0) < 1e-12, "switching: chi(0) != 1");
  require(std::isfinite(integral(t_min_, 0.0)), "switching: integral not finite");
}

}  // namespace nesslab
