#pragma once

#include <vector>

#include "common.hpp"

namespace nesslab {

struct SwitchingEval {
  double value = 0;
  double derivative = 0;
  double integral_from_t_min = 0;
};

// Monotone switch-on profile chi on (-inf, 0]: 0 < chi < 1 and chi' > 0 for
// t_min < t < 0, chi(0) = 1, treated as exactly 0 below the cutoff t_min.
// The truncated tail mass (exponential kind: e^{t_min}) must stay below
// eps_tail so the profile remains a faithful member of the admitted class.
class SwitchingFunction {
 public:
  enum class Kind { exponential, tabulated_smooth };

  static SwitchingFunction exponential(double t_min, double eps_tail = 1e-6);
  // samples chi(t_k) on an ascending grid t_min = t_0 < ... < t_K = 0 with
  // chi(0) = 1; evaluated by monotone cubic interpolation.
  static SwitchingFunction tabulated(const std::vector<double>& t,
                                     const std::vector<double>& chi,
                                     double eps_tail = 1e-6);

  // t <= 0 required; the driven dynamics lives on the negative half axis
  SwitchingEval eval(double t) const;
  double value(double t) const;

  // integral of chi over [t1, t2] with -inf <= t1 <= t2 <= 0 (truncated chi)
  double integral(double t1, double t2) const;

  double t_min() const { return t_min_; }
  double eps_tail() const { return eps_tail_; }
  Kind kind() const { return kind_; }

  // sample-based audit of the contract: monotonicity, range, finite
  // integrals; throws config_error on violation
  void audit(int samples = 2048) const;

 private:
  Kind kind_ = Kind::exponential;
  double t_min_ = -13.815510557964274;  // ln(1e-6)
  double eps_tail_ = 1e-6;
  std::vector<double> tab_t_, tab_v_, tab_d_;  // tabulated kind: Hermite data
  double tab_value(double t) const;
  double tab_deriv(double t) const;
  double tab_integral_upto(double t) const;
};

}  // namespace nesslab
