#pragma once

#include <vector>

#include "common.hpp"

namespace nesslab {

struct GeometryConfig {
  double h = 0.5;             // grid spacing
  double L = 50.0;            // lead truncation, Dirichlet walls at +-L
  double a = 3.0;             // internal walls of the decoupled operator
  double a_tilde = 1.5;       // support radius of the sample potential
  std::vector<double> lambda = {0.0};  // channel thresholds, ascending
};

// Discretized waveguide: interior nodes x_i = -L + (i+1) h, i = 0..n-1, per
// channel; channels are independent copies offset by lambda_c.
struct Geometry {
  double h = 0;
  double L = 0;
  double a = 0;
  double a_tilde = 0;
  std::vector<double> lambda;
  int n = 0;           // longitudinal nodes per channel
  int channels = 1;

  // region split by node index (per channel): [0, i_left) is x < -a,
  // [i_left, i_right) is |x| <= a, [i_right, n) is x > a.
  int i_left = 0;
  int i_right = 0;

  double x(int i) const { return -L + (i + 1) * h; }
  int n_minus() const { return i_left; }
  int n_sample() const { return i_right - i_left; }
  int n_plus() const { return n - i_right; }
  int total() const { return n * channels; }

  // bonds severed by the internal walls: (i_left-1, i_left) and
  // (i_right-1, i_right) in per-channel indexing
  int wall_bond_left() const { return i_left - 1; }
  int wall_bond_right() const { return i_right - 1; }

  // <Q1> weight sqrt(x^2+1) per node
  double q1_weight(int i) const { return std::sqrt(x(i) * x(i) + 1.0); }
};

Geometry build_geometry(const GeometryConfig& cfg);

}  // namespace nesslab
