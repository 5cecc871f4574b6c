#pragma once

#include "branch.hpp"
#include "propagate.hpp"

namespace nesslab {

struct CertRow {
  double s = 0;
  double increment = 0;
  double bound = -1;  // theoretical bound when available, else -1
};

struct WaveOpResult {
  Panel out;
  Panel out_adjoint;  // filled by ops that expose both actions
  std::vector<CertRow> cert;
  double tail_bound = 0;           // certified residual at s_min
  double ideal_tail = 0;           // tail of the untruncated switching
  double remainder_truncation = -1;  // |Psi(s_min)| boundary remainder (cook)
  double remainder_pp = -1;          // |E_pp replacement| remainder (cook)
  double s_min = 0;
  bool converged = true;
  // cook integrand trace for the decay fit: (|s|, |T1|, |T2|)
  std::vector<double> integrand_s, integrand_t1, integrand_t2;
};

struct WaveParams {
  double s_min = -20.0;
  double dt = 0.01;
  int cert_samples = 40;
  double resolvent_snap = 1e-3;  // factor-cache key quantum; 0 = exact
  double quad_ds = 0;            // cdh51 quadrature spacing; 0 = dt
  double horizon_factor = 1.5;
};

// Shared spectral context: decoupled modes plus the bound states of H and
// K(1) backing the E_ac filters.
struct WaveContext {
  const HamiltonianSet* set = nullptr;
  DecoupledModes dm;
  BoundStates h_bound;   // E_pp(H)
  BoundStates k1_bound;  // E_pp(K(1))
};
WaveContext build_wave_context(const HamiltonianSet& set);

// E_ac proxies
void ac_filter_h(const WaveContext& wc, Panel& p);      // I - E_pp(H)
void ac_filter_k1(const WaveContext& wc, Panel& p);     // I - E_pp(K(1))
void ac_filter_hdec(const WaveContext& wc, Panel& p);   // zero the sample block

// --- V_delta test panels -----------------------------------------------------

enum class Envelope { gauss, arch };

struct PanelWindow {
  double e_lo = 0, e_hi = 0;  // spectral window w.r.t. Hdec (no bias)
  bool left = false;          // which lead
  int channel = 0;
  double center = 0;          // packet center distance from the wall
  Envelope env = Envelope::gauss;
};

// Superpositions of decoupled-lead eigenmodes, spectrally confined to the
// windows, placed deep in the leads. Columns are unit norm, one per window.
Panel make_vdelta_panel(const WaveContext& wc, double delta,
                        const std::vector<PanelWindow>& windows);

// --- wave operators ----------------------------------------------------------

// omega_eta: limit of W*(s) e^{-isH}; certificate increments obey the
// |V| integral chi bound. Also returns the adjoint action.
WaveOpResult omega_eta(const WaveContext& wc, const SwitchingFunction& chi,
                       double eta, const Panel& panel, const WaveParams& wp);

// omega_minus for the pair {Hdec, H} on ac panels; empirical certificate.
WaveOpResult omega_minus(const WaveContext& wc, const Panel& panel_ac,
                         const WaveParams& wp);

// Xi_eta by the direct time limit (product of evolutions with E_ac filters).
WaveOpResult xi_eta_timelimit(const WaveContext& wc,
                              const SwitchingFunction& chi, double eta,
                              const Panel& panel, const WaveParams& wp);

// Xi_eta by the Cook construction: boundary term minus the two time
// integrals of resolvent-difference integrands, plus the finite-horizon
// boundary remainders (truncation and pp-replacement), both reported.
WaveOpResult xi_eta_cook(const WaveContext& wc, const SwitchingFunction& chi,
                         double eta, const Panel& panel, const WaveParams& wp);

// Stationary wave operator for {Kdec(1), K(1)} by both routes; `out` holds
// the time-limit action, `out_cook` the eta->0 Cook-formula action.
struct XiZeroResult {
  WaveOpResult time_route;
  Panel out_cook;
  double route_disagreement = 0;
  bool flagged_inconsistent = false;
};
XiZeroResult xi_zero(const WaveContext& wc, const Panel& panel,
                     const WaveParams& wp, double flag_tol = 1e-4);
// adjoint action Xi_0^* via the reversed pair
Panel xi_zero_adjoint(const WaveContext& wc, const Panel& panel,
                      const WaveParams& wp);

// fitted log-log slope of y against x over the tail of a series
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y,
                     double x_lo, double x_hi);

}  // namespace nesslab
