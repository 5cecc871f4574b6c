#pragma once

#include <functional>
#include <vector>

#include "spectral.hpp"
#include "switching.hpp"

namespace nesslab {

// Integrator is fixed: Cayley (Crank-Nicolson) with midpoint coupling.
struct EvolutionParams {
  double eta = 0.1;
  double s_min = -10.0;
  double dt = 0.01;
  int residual_check_every = 8192;  // spot-check cadence for the solves
  double residual_tol = 1e-10;
  double horizon_factor = 1.5;      // |s| * (2/h) <= factor * (L - a)
};

// throws on violated invariants: dt * |K(1)| <= 0.2, ballistic horizon
void check_evolution_params(const HamiltonianSet& set,
                            const EvolutionParams& p);
double max_admissible_smin(const HamiltonianSet& set, double horizon_factor);

// Unitary Cayley stepping of node-major panels. The coupling is either the
// switched bias kappa = chi(eta s_mid) (clamped to 1 for s > 0) or a fixed
// kappa; a fixed coupling reuses one factorization for the whole flight.
class CayleyEvolver {
 public:
  // switched coupling
  CayleyEvolver(const HamiltonianSet& set, bool decoupled_base,
                const SwitchingFunction& chi, double eta, double dt);
  // fixed coupling
  CayleyEvolver(const HamiltonianSet& set, bool decoupled_base, double kappa,
                double dt);

  // advance from s_from to s_to in exact multiples of +-dt; s_to - s_from
  // must be an integer multiple of dt (snapped by the caller)
  void advance(Panel& psi, double s_from, double s_to);

  // one signed step s -> s + delta (|delta| = dt)
  void step(Panel& psi, double s, double delta);

  double dt() const { return dt_; }
  long long solves_done() const { return solves_; }

  int residual_check_every = 8192;
  double residual_tol = 1e-10;

 private:
  const HamiltonianSet* set_;
  bool decoupled_;
  bool switched_;
  const SwitchingFunction* chi_ = nullptr;
  double eta_ = 0;
  double kappa_fixed_ = 0;
  double dt_;
  long long solves_ = 0;
  Panel scratch_;
  std::vector<TridiagFactor> fixed_factor_up_, fixed_factor_dn_;
  void ensure_fixed_factors();
  double kappa_at_mid(double s_mid) const;
};

// number of dt steps covering [s_min, 0], s_min snapped to the grid
long long steps_for(double s_min, double dt);

// Coupled evolution W_eta(s) applied to a panel, recorded at sample times
// (snapped to the step grid, descending from 0 to params.s_min).
struct EvolvedRecord {
  std::vector<double> times;
  std::vector<Panel> panels;
};
EvolvedRecord evolve_coupled(const HamiltonianSet& set,
                             const SwitchingFunction& chi,
                             const EvolutionParams& params, const Panel& panel,
                             const std::vector<double>& sample_times);

// Decoupled evolution by the closed form: scalar bias phases on the lead
// blocks times the spectral exponential of Hdec. No time stepping.
Panel decoupled_propagator_apply(const DecoupledModes& dm,
                                 const SwitchingFunction& chi, double eta,
                                 double s, const Panel& panel);
EvolvedRecord evolve_decoupled(const HamiltonianSet& set,
                               const SwitchingFunction& chi,
                               const EvolutionParams& params,
                               const Panel& panel,
                               const std::vector<double>& sample_times);

// integral of chi(eta u) du from 0 to s (s <= 0 handled; s > 0 clamps chi=1)
double switched_phase_integral(const SwitchingFunction& chi, double eta,
                               double s);

// rho in factored form: rho = Q diag(w) Q^* with orthonormal columns Q
struct FactoredDensity {
  Panel q;
  VectorXd weights;
};

// Action of rho_eta(t) = W(t) rho0 W*(t) built on demand; dense matrices are
// allowed only for small lattices (n <= dense_limit).
class DensityEvolution {
 public:
  DensityEvolution(const HamiltonianSet& set, const SwitchingFunction& chi,
                   const EvolutionParams& params, FactoredDensity rho0);
  // returns W(t) rho0 W*(t) f for each column of f
  Panel apply(double t, const Panel& f) const;
  MatrixXc dense(double t, int dense_limit = 600) const;

 private:
  const HamiltonianSet* set_;
  const SwitchingFunction* chi_;
  EvolutionParams params_;
  FactoredDensity rho0_;
};

}  // namespace nesslab
