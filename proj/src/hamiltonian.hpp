#pragma once

#include <optional>
#include <vector>

#include "geometry.hpp"
#include "tridiag.hpp"

namespace nesslab {

// Compactly supported sample potential w; zero for |x| >= a_tilde.
struct PotentialSpec {
  enum class Shape { none, bump, double_well, tabulated };
  Shape shape = Shape::none;
  double amplitude = 0;   // signed; wells are negative
  double radius = 1.0;    // support radius of each bump
  double separation = 0;  // center offset for the double well (+-separation)
  std::vector<double> table;  // tabulated values on the grid (size n)
  double smoothness_bound = 1e4;  // cap on second divided differences

  double operator()(double x, double a_tilde) const;
};

struct BiasSpec {
  double v_minus = 0;
  double v_plus = 0;
  double norm() const { return std::max(std::abs(v_minus), std::abs(v_plus)); }
};

// Coupled/decoupled Hamiltonian pair and the bias family on one lattice.
// Per channel c: H_c = (Dirichlet second difference)/h^2 + w + lambda_c,
// Hdec_c = H_c with the two wall bonds severed; K(kappa) = H + kappa V.
struct HamiltonianSet {
  Geometry geo;
  std::vector<Tridiag> H;     // one per channel
  std::vector<Tridiag> Hdec;  // severed copies
  Tridiag V;                  // shared across channels (diag bias; synthetic
                              // models may populate the off band)
  VectorXd w_values;          // sample potential on the grid (one channel)
  bool lead_free = false;     // synthetic direct-sum models skip the
                              // ballistic-horizon guard
  BiasSpec bias;

  int channels() const { return static_cast<int>(H.size()); }
  int n() const { return geo.n; }
  int total() const { return geo.n * channels(); }

  // K(kappa) or Kdec(kappa) for one channel, materialized
  Tridiag at(double kappa, int channel, bool decoupled) const;

  // norm estimate for K(1), Gershgorin over channels
  double k1_norm_est() const;

  // continuum floor used by the pp/ac proxy:
  // min_c (lambda_c + min(kappa v_-, kappa v_+, 0))
  double continuum_floor(double kappa) const;

  // panel-level region projections; rows outside the region are zeroed
  void project_minus(Panel& p) const;
  void project_sample(Panel& p) const;
  void project_plus(Panel& p) const;

  double lead_bias_value(int node_in_channel) const;  // v_-, 0 or v_+
};

HamiltonianSet assemble_hamiltonians(const Geometry& geo,
                                     const PotentialSpec& w,
                                     const BiasSpec& bias);

// kappa in [0,1] guarded view of K(kappa)/Kdec(kappa), all channels
struct OperatorAt {
  const HamiltonianSet* set;
  double kappa;
  bool decoupled;
  Tridiag channel(int c) const { return set->at(kappa, c, decoupled); }
};
OperatorAt hamiltonian_at(const HamiltonianSet& set, double kappa,
                          bool decoupled);

}  // namespace nesslab
