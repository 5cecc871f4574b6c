#include "waveops.hpp"

#include <cmath>
#include <map>

namespace nesslab {

WaveContext build_wave_context(const HamiltonianSet& set) {
  WaveContext wc;
  wc.set = &set;
  wc.dm = build_decoupled_modes(set);
  wc.h_bound = bound_states_below(set, 0.0, false, set.continuum_floor(0.0));
  wc.k1_bound = bound_states_below(set, 1.0, false, set.continuum_floor(1.0));
  return wc;
}

void ac_filter_h(const WaveContext& wc, Panel& p) { deflate(wc.h_bound, p); }
void ac_filter_k1(const WaveContext& wc, Panel& p) { deflate(wc.k1_bound, p); }

namespace {

// ac part of Hdec = leads; zeroing the sample block IS the E_ac(Hdec) action
void zero_sample_block(const HamiltonianSet& set, Panel& p) {
  const int n = set.geo.n;
  for (int c = 0; c < set.channels(); ++c)
    p.middleRows(c * n + set.geo.i_left, set.geo.n_sample()).setZero();
}

}  // namespace

void ac_filter_hdec(const WaveContext& wc, Panel& p) {
  zero_sample_block(*wc.set, p);
}

Panel make_vdelta_panel(const WaveContext& wc, double delta,
                        const std::vector<PanelWindow>& windows) {
  const HamiltonianSet& set = *wc.set;
  require(delta > 0, "vdelta panel: delta must be positive");
  require(!windows.empty(), "vdelta panel: need at least one window");
  const double band_width = 4.0 / (set.geo.h * set.geo.h);
  Panel p = Panel::Zero(set.total(), static_cast<int>(windows.size()));
  for (size_t w = 0; w < windows.size(); ++w) {
    const PanelWindow& win = windows[w];
    require(win.e_hi > win.e_lo, "vdelta panel: empty spectral window");
    require(win.channel >= 0 && win.channel < set.channels(),
            "vdelta panel: bad channel");
    // distance to every channel threshold and to the band edges
    for (double lam : set.geo.lambda) {
      bool clear = (win.e_lo >= lam + delta) || (win.e_hi <= lam - delta);
      require(clear, "vdelta panel: window within delta of threshold");
      require(win.e_hi <= lam + band_width - delta || win.e_lo >= lam + band_width + delta,
              "vdelta panel: window within delta of a band edge");
    }
    require(win.e_lo >= set.geo.lambda[win.channel] + delta,
            "vdelta panel: window below its channel threshold");
    const int nb = win.left ? wc.dm.n_minus : wc.dm.n_plus;
    require(nb > 0, "vdelta panel: requested lead has no nodes");
    VectorXc coef = VectorXc::Zero(nb);
    const double e_c = 0.5 * (win.e_lo + win.e_hi);
    const double e_hw = 0.5 * (win.e_hi - win.e_lo);
    int used = 0;
    for (int j = 0; j < nb; ++j) {
      double e = wc.dm.lead_energy(win.channel, j, win.left);
      if (e < win.e_lo || e > win.e_hi) continue;
      double u = (e - e_c) / e_hw;  // in [-1, 1]
      double g;
      if (win.env == Envelope::gauss) {
        g = std::exp(-32.0 * u * u);  // edge value ~1e-14, no kink to speak of
      } else {
        g = std::sin(M_PI * 0.5 * (u + 1.0));  // arch: C^0 edges, 1/s^2 tails
      }
      double k_phys = M_PI * (j + 1) / ((nb + 1) * set.geo.h);
      cplx phase = std::exp(cplx(0.0, -k_phys * win.center));
      double parity = win.left ? ((j % 2 == 0) ? 1.0 : -1.0) : 1.0;
      coef[j] = g * parity * phase;
      ++used;
    }
    require(used >= 8, "vdelta panel: window resolves fewer than 8 lead modes");
    VectorXc block;
    modes_to_lead(wc.dm, win.channel, win.left, coef, block);
    const int base = win.channel * set.geo.n +
                     (win.left ? 0 : set.geo.i_right);
    p.block(base, static_cast<int>(w), nb, 1) = block;
    double nrm = p.col(static_cast<int>(w)).norm();
    require(nrm > 0, "vdelta panel: empty column");
    p.col(static_cast<int>(w)) /= nrm;
  }
  return p;
}

namespace {

std::vector<double> cert_grid(double s_min, double dt, int samples) {
  // descending sample times 0 > s_1 > ... > s_min, snapped to the step grid
  std::vector<double> g;
  samples = std::max(2, samples);
  for (int k = 1; k <= samples; ++k) {
    double s = s_min * double(k) / samples;
    double snapped = -std::llround(-s / dt) * dt;
    if (g.empty() || snapped < g.back() - 0.5 * dt) g.push_back(snapped);
  }
  if (g.empty() || g.back() > s_min + 0.5 * dt) g.push_back(-std::llround(-s_min / dt) * dt);
  return g;
}

}  // namespace

WaveOpResult omega_eta(const WaveContext& wc, const SwitchingFunction& chi,
                       double eta, const Panel& panel, const WaveParams& wp) {
  const HamiltonianSet& set = *wc.set;
  WaveOpResult r;
  r.s_min = -std::llround(-wp.s_min / wp.dt) * wp.dt;
  EvolutionParams ep;
  ep.eta = eta;
  ep.s_min = r.s_min;
  ep.dt = wp.dt;
  ep.horizon_factor = wp.horizon_factor;
  check_evolution_params(set, ep);

  CayleyEvolver free_ev(set, false, 0.0, wp.dt);   // e^{-isH}
  CayleyEvolver coup_ev(set, false, chi, eta, wp.dt);

  const double vnorm =
      std::max(std::abs(set.V.gershgorin_max()), std::abs(set.V.gershgorin_min()));

  std::vector<double> grid = cert_grid(r.s_min, wp.dt, wp.cert_samples);
  Panel psi = panel;   // free track U_H(s) f
  Panel seg;           // coupled segment of the free track
  double s_prev = 0.0;
  for (double s_next : grid) {
    seg = psi;
    coup_ev.advance(seg, s_prev, s_next);
    free_ev.advance(psi, s_prev, s_next);
    double inc = 0;
    for (int c = 0; c < psi.cols(); ++c)
      inc = std::max(inc, (psi.col(c) - seg.col(c)).norm());
    CertRow row;
    row.s = s_next;
    row.increment = inc;
    row.bound = vnorm * chi.integral(eta * s_next, eta * s_prev) / eta;
    r.cert.push_back(row);
    s_prev = s_next;
  }
  // certified residual past s_min: integral of the truncated chi below
  r.tail_bound = vnorm * chi.integral(-1e300, eta * r.s_min) / eta;
  r.ideal_tail = vnorm * std::exp(eta * r.s_min) / eta;  // untruncated e^t
  // action: evolve the free-evolved panel back up with the coupled flow
  Panel up = psi;
  coup_ev.advance(up, r.s_min, 0.0);
  r.out = up;
  // adjoint action: coupled down, free up
  Panel dn = panel;
  coup_ev.advance(dn, 0.0, r.s_min);
  free_ev.advance(dn, r.s_min, 0.0);
  r.out_adjoint = dn;
  return r;
}

WaveOpResult omega_minus(const WaveContext& wc, const Panel& panel_ac,
                         const WaveParams& wp) {
  const HamiltonianSet& set = *wc.set;
  WaveOpResult r;
  r.s_min = -std::llround(-wp.s_min / wp.dt) * wp.dt;
  EvolutionParams ep;
  ep.s_min = r.s_min;
  ep.dt = wp.dt;
  ep.horizon_factor = wp.horizon_factor;
  check_evolution_params(set, ep);

  Panel psi = panel_ac;
  ac_filter_h(wc, psi);  // domain restriction E_ac(H)
  CayleyEvolver free_ev(set, false, 0.0, wp.dt);
  std::vector<double> grid = cert_grid(r.s_min, wp.dt, wp.cert_samples);
  double s_prev = 0.0;
  Panel prev_state = psi;
  for (double s_next : grid) {
    free_ev.advance(psi, s_prev, s_next);
    // increment: |psi(s2) - e^{-i(s2-s1)Hdec} psi(s1)|
    Panel comp;
    decoupled_exp_apply(wc.dm, 0.0, s_next - s_prev, prev_state, comp);
    double inc = 0;
    for (int c = 0; c < psi.cols(); ++c)
      inc = std::max(inc, (psi.col(c) - comp.col(c)).norm());
    CertRow row;
    row.s = s_next;
    row.increment = inc;
    r.cert.push_back(row);
    prev_state = psi;
    s_prev = s_next;
  }
  // non-convergence diagnostic: increments must decrease over the last decade
  int m = static_cast<int>(r.cert.size());
  if (m >= 6) {
    double early = 0, late = 0;
    for (int k = m / 2; k < m * 3 / 4; ++k) early += r.cert[k].increment;
    for (int k = m * 3 / 4; k < m; ++k) late += r.cert[k].increment;
    if (late > early * 1.5 + 1e-14) r.converged = false;
  }
  // action: e^{i s_min Hdec} psi(s_min)
  Panel out;
  decoupled_exp_apply(wc.dm, 0.0, -r.s_min, psi, out);
  r.out = out;
  return r;
}

WaveOpResult xi_eta_timelimit(const WaveContext& wc,
                              const SwitchingFunction& chi, double eta,
                              const Panel& panel, const WaveParams& wp) {
  const HamiltonianSet& set = *wc.set;
  WaveOpResult r;
  r.s_min = -std::llround(-wp.s_min / wp.dt) * wp.dt;
  EvolutionParams ep;
  ep.eta = eta;
  ep.s_min = r.s_min;
  ep.dt = wp.dt;
  ep.horizon_factor = wp.horizon_factor;
  check_evolution_params(set, ep);

  Panel f = panel;
  zero_sample_block(set, f);  // E_ac(Hdec)
  CayleyEvolver coup_ev(set, false, chi, eta, wp.dt);
  std::vector<double> grid = cert_grid(r.s_min, wp.dt, wp.cert_samples);
  // x(s) = E_ac(H) Wdec(s) f, computed fresh at the recorded times
  auto x_at = [&](double s) {
    Panel x = decoupled_propagator_apply(wc.dm, chi, eta, s, f);
    ac_filter_h(wc, x);
    return x;
  };
  double s_prev = 0.0;
  Panel x_prev = x_at(0.0);
  for (double s_next : grid) {
    Panel seg = x_prev;
    coup_ev.advance(seg, s_prev, s_next);
    Panel x_next = x_at(s_next);
    double inc = 0;
    for (int c = 0; c < f.cols(); ++c)
      inc = std::max(inc, (x_next.col(c) - seg.col(c)).norm());
    CertRow row;
    row.s = s_next;
    row.increment = inc;
    r.cert.push_back(row);
    x_prev = x_next;
    s_prev = s_next;
  }
  Panel up = x_prev;  // x(s_min)
  coup_ev.advance(up, r.s_min, 0.0);
  ac_filter_k1(wc, up);
  r.out = up;
  return r;
}

namespace {

// shared factor cache for (K(kappa)+1)^{-1} and (Kdec(kappa)+1)^{-1},
// keyed by kappa snapped to the configured quantum
class ResolventCache {
 public:
  ResolventCache(const HamiltonianSet& set, double snap)
      : set_(&set), snap_(snap) {}
  // x <- (K(kappa)+1)^{-1} x  (or decoupled)
  void solve(double kappa, bool decoupled, Panel& x) {
    Entry& e = entry(kappa);
    auto& f = decoupled ? e.dec : e.coup;
    if (f.empty()) {
      f.resize(set_->channels());
      for (int c = 0; c < set_->channels(); ++c)
        f[c].factor(set_->at(e.kappa, c, decoupled), cplx(-1.0, 0.0));
    }
    const int n = set_->geo.n;
    for (int c = 0; c < set_->channels(); ++c) {
      Panel blk = x.middleRows(c * n, n);
      f[c].solve(blk);
      x.middleRows(c * n, n) = blk;
    }
  }

 private:
  struct Entry {
    double kappa;
    std::vector<TridiagFactor> coup, dec;
  };
  Entry& entry(double kappa) {
    double key = snap_ > 0 ? std::round(kappa / snap_) * snap_ : kappa;
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      Entry e;
      e.kappa = key;
      it = cache_.emplace(key, std::move(e)).first;
    }
    return it->second;
  }
  const HamiltonianSet* set_;
  double snap_;
  std::map<double, Entry> cache_;
};

// Wdec(s) (Kdec(chi(eta s)) + 1)^j f for a lead-mode represented panel
struct ModeRep {
  // per (channel, lead): mode coefficients per column
  std::vector<VectorXc> left, right;  // [channel * cols + col]
  int cols = 0;
};

ModeRep to_modes(const WaveContext& wc, const Panel& f) {
  const HamiltonianSet& set = *wc.set;
  ModeRep mr;
  mr.cols = static_cast<int>(f.cols());
  mr.left.resize(set.channels() * mr.cols);
  mr.right.resize(set.channels() * mr.cols);
  for (int c = 0; c < set.channels(); ++c) {
    for (int col = 0; col < mr.cols; ++col) {
      if (wc.dm.n_minus > 0) {
        VectorXc blk = f.block(c * set.geo.n, col, wc.dm.n_minus, 1);
        lead_to_modes(wc.dm, c, true, blk, mr.left[c * mr.cols + col]);
      }
      if (wc.dm.n_plus > 0) {
        VectorXc blk =
            f.block(c * set.geo.n + set.geo.i_right, col, wc.dm.n_plus, 1);
        lead_to_modes(wc.dm, c, false, blk, mr.right[c * mr.cols + col]);
      }
    }
  }
  return mr;
}

// position-space Wdec(s)(Kdec(kappa_s)+1)^j f from the mode rep (sample
// block of f must be zero, which the V_delta construction guarantees)
Panel modes_evolved_power(const WaveContext& wc, const ModeRep& mr,
                          const SwitchingFunction& chi, double eta, double s,
                          int j) {
  const HamiltonianSet& set = *wc.set;
  const double kap = s >= 0 ? 1.0 : chi.value(eta * s);
  const double phase_int = switched_phase_integral(chi, eta, s);
  Panel out = Panel::Zero(set.total(), mr.cols);
  VectorXc coef, blk;
  for (int c = 0; c < set.channels(); ++c) {
    for (int col = 0; col < mr.cols; ++col) {
      if (wc.dm.n_minus > 0) {
        coef = mr.left[c * mr.cols + col];
        for (int k = 0; k < wc.dm.n_minus; ++k) {
          double e = wc.dm.lead_energy(c, k, true);
          double w = std::pow(e + kap * set.bias.v_minus + 1.0, j);
          coef[k] *= w * std::exp(cplx(0.0, -(s * e + set.bias.v_minus * phase_int)));
        }
        modes_to_lead(wc.dm, c, true, coef, blk);
        out.block(c * set.geo.n, col, wc.dm.n_minus, 1) = blk;
      }
      if (wc.dm.n_plus > 0) {
        coef = mr.right[c * mr.cols + col];
        for (int k = 0; k < wc.dm.n_plus; ++k) {
          double e = wc.dm.lead_energy(c, k, false);
          double w = std::pow(e + kap * set.bias.v_plus + 1.0, j);
          coef[k] *= w * std::exp(cplx(0.0, -(s * e + set.bias.v_plus * phase_int)));
        }
        modes_to_lead(wc.dm, c, false, coef, blk);
        out.block(c * set.geo.n + set.geo.i_right, col, wc.dm.n_plus, 1) = blk;
      }
    }
  }
  return out;
}

double panel_max_norm(const Panel& p) {
  double m = 0;
  for (int c = 0; c < p.cols(); ++c) m = std::max(m, p.col(c).norm());
  return m;
}

}  // namespace

WaveOpResult xi_eta_cook(const WaveContext& wc, const SwitchingFunction& chi,
                         double eta, const Panel& panel, const WaveParams& wp) {
  const HamiltonianSet& set = *wc.set;
  WaveOpResult r;
  r.s_min = -std::llround(-wp.s_min / wp.dt) * wp.dt;
  EvolutionParams ep;
  ep.eta = eta;
  ep.s_min = r.s_min;
  ep.dt = wp.dt;
  ep.horizon_factor = wp.horizon_factor;
  check_evolution_params(set, ep);

  Panel f = panel;
  zero_sample_block(set, f);
  ModeRep mr = to_modes(wc, f);
  ResolventCache rc(set, wp.resolvent_snap);
  CayleyEvolver coup_ev(set, false, chi, eta, wp.dt);

  const long long nsteps = std::llround(-r.s_min / wp.dt);
  const int cols = static_cast<int>(f.cols());
  // moving-frame trapezoid accumulation of the two Cook integrands
  Panel acc = Panel::Zero(set.total(), cols);
  const int record_every =
      std::max<long long>(1, nsteps / std::max(1, wp.cert_samples * 4));
  for (long long k = 0; k <= nsteps; ++k) {
    double s = -double(k) * wp.dt;
    double kap = chi.value(eta * s);
    double chi_prime = chi.eval(eta * s).derivative;
    double wgt = (k == 0 || k == nsteps) ? 0.5 * wp.dt : wp.dt;
    // integrand 1: [R - Rdec] Wdec(s) (Kdec+1)^2 f
    Panel v2 = modes_evolved_power(wc, mr, chi, eta, s, 2);
    Panel t1 = v2;
    rc.solve(kap, false, t1);
    Panel t1b = v2;
    rc.solve(kap, true, t1b);
    t1 -= t1b;
    // integrand 2: eta chi' (K+1)^{-1} V [R - Rdec] Wdec(s)(Kdec+1) f
    Panel v1 = modes_evolved_power(wc, mr, chi, eta, s, 1);
    Panel t2 = v1;
    rc.solve(kap, false, t2);
    Panel t2b = v1;
    rc.solve(kap, true, t2b);
    t2 -= t2b;
    // multiply by V (tridiagonal in general; diagonal for lattice bias)
    {
      const int n = set.geo.n;
      Panel vt2(t2.rows(), t2.cols());
      for (int c = 0; c < set.channels(); ++c) {
        for (int col = 0; col < cols; ++col) {
          for (int i = 0; i < n; ++i) {
            cplx acc_v = set.V.diag[i] * t2(c * n + i, col);
            if (i > 0) acc_v += set.V.off[i - 1] * t2(c * n + i - 1, col);
            if (i + 1 < n) acc_v += set.V.off[i] * t2(c * n + i + 1, col);
            vt2(c * n + i, col) = acc_v;
          }
        }
      }
      rc.solve(kap, false, vt2);
      t2 = vt2;
    }
    if (k % record_every == 0 || k == nsteps) {
      r.integrand_s.push_back(-s);
      r.integrand_t1.push_back(panel_max_norm(t1));
      r.integrand_t2.push_back(eta * chi_prime * panel_max_norm(t2));
    }
    acc += wgt * (iu * t1 + (eta * chi_prime) * t2);
    if (k < nsteps) coup_ev.step(acc, s, -wp.dt);
    if (k == nsteps) {
      // finite-horizon remainders, evolved up with the integral
      Panel psi_rem = v1;
      rc.solve(kap, false, psi_rem);
      Panel psi_b = v1;
      rc.solve(kap, true, psi_b);
      psi_rem -= psi_b;  // Psi(s_min) in the s_min frame
      Panel pp_rem = modes_evolved_power(wc, mr, chi, eta, s, 0);
      // project on E_pp(H)
      {
        MatrixXc amp = wc.h_bound.vectors.transpose().cast<cplx>() * pp_rem;
        pp_rem = wc.h_bound.vectors.cast<cplx>() * amp;
      }
      Panel bundle(set.total(), 3 * cols);
      bundle << acc, psi_rem, pp_rem;
      coup_ev.advance(bundle, r.s_min, 0.0);
      acc = bundle.leftCols(cols);
      psi_rem = bundle.middleCols(cols, cols);
      pp_rem = bundle.rightCols(cols);
      // boundary term Phi(0) = (K(1)+1)^{-1} (Kdec(1)+1) f
      Panel phi0 = modes_evolved_power(wc, mr, chi, eta, 0.0, 1);
      rc.solve(1.0, false, phi0);
      Panel out = phi0 + acc - psi_rem - pp_rem;
      ac_filter_k1(wc, out);
      r.out = out;
      r.remainder_truncation = panel_max_norm(psi_rem);
      r.remainder_pp = panel_max_norm(pp_rem);
    }
  }
  return r;
}

XiZeroResult xi_zero(const WaveContext& wc, const Panel& panel,
                     const WaveParams& wp, double flag_tol) {
  const HamiltonianSet& set = *wc.set;
  XiZeroResult xr;
  WaveOpResult& r = xr.time_route;
  r.s_min = -std::llround(-wp.s_min / wp.dt) * wp.dt;
  EvolutionParams ep;
  ep.s_min = r.s_min;
  ep.dt = wp.dt;
  ep.horizon_factor = wp.horizon_factor;
  check_evolution_params(set, ep);

  Panel f = panel;
  zero_sample_block(set, f);  // E_ac(Kdec(1)) = E_ac(Hdec)
  CayleyEvolver k1_ev(set, false, 1.0, wp.dt);

  // --- time route with certificate ---
  std::vector<double> grid = cert_grid(r.s_min, wp.dt, wp.cert_samples);
  auto m_at = [&](double s) {
    Panel m;
    decoupled_exp_apply(wc.dm, 1.0, s, f, m);
    return m;
  };
  double s_prev = 0.0;
  Panel m_prev = m_at(0.0);
  for (double s_next : grid) {
    Panel seg = m_prev;
    k1_ev.advance(seg, s_prev, s_next);
    Panel m_next = m_at(s_next);
    double inc = 0;
    for (int c = 0; c < f.cols(); ++c)
      inc = std::max(inc, (m_next.col(c) - seg.col(c)).norm());
    CertRow row;
    row.s = s_next;
    row.increment = inc;
    r.cert.push_back(row);
    m_prev = m_next;
    s_prev = s_next;
  }
  Panel up = m_prev;
  k1_ev.advance(up, r.s_min, 0.0);
  ac_filter_k1(wc, up);
  r.out = up;

  // --- eta -> 0 Cook formula: boundary + single resolvent-difference
  // integral along e^{isK(1)} / e^{-isKdec(1)} ---
  ResolventCache rc(set, wp.resolvent_snap);
  double ds = wp.quad_ds > 0 ? std::llround(wp.quad_ds / wp.dt) * wp.dt : wp.dt;
  if (ds <= 0) ds = wp.dt;
  const long long qsteps = std::llround(-r.s_min / ds);
  const long long sub = std::llround(ds / wp.dt);
  Panel acc = Panel::Zero(set.total(), f.cols());
  Panel psi_rem;
  for (long long q = 0; q <= qsteps; ++q) {
    double s = -double(q) * ds;
    double wgt = (q == 0 || q == qsteps) ? 0.5 * ds : ds;
    Panel v2;
    decoupled_exp_apply(wc.dm, 1.0, s, f, v2);
    // (Kdec(1)+1)^2 in mode space would be cheaper; matvec keeps it simple
    Panel w2(v2.rows(), v2.cols());
    for (int c = 0; c < set.channels(); ++c) {
      Tridiag kd = set.at(1.0, c, true);
      for (int col = 0; col < v2.cols(); ++col) {
        VectorXc x = v2.block(c * set.geo.n, col, set.geo.n, 1);
        VectorXc y, z;
        kd.matvec(x, y, 1.0);
        kd.matvec(y, z, 1.0);
        w2.block(c * set.geo.n, col, set.geo.n, 1) = z;
      }
    }
    Panel t1 = w2;
    rc.solve(1.0, false, t1);
    Panel t1b = w2;
    rc.solve(1.0, true, t1b);
    t1 -= t1b;
    acc += wgt * (iu * t1);
    if (q == qsteps) {
      Panel v1(v2.rows(), v2.cols());
      for (int c = 0; c < set.channels(); ++c) {
        Tridiag kd = set.at(1.0, c, true);
        for (int col = 0; col < v2.cols(); ++col) {
          VectorXc x = v2.block(c * set.geo.n, col, set.geo.n, 1);
          VectorXc y;
          kd.matvec(x, y, 1.0);
          v1.block(c * set.geo.n, col, set.geo.n, 1) = y;
        }
      }
      psi_rem = v1;
      rc.solve(1.0, false, psi_rem);
      Panel pb = v1;
      rc.solve(1.0, true, pb);
      psi_rem -= pb;
    } else {
      k1_ev.advance(acc, s, s - ds);
      (void)sub;
    }
  }
  Panel bundle(set.total(), 2 * f.cols());
  bundle << acc, psi_rem;
  k1_ev.advance(bundle, r.s_min, 0.0);
  acc = bundle.leftCols(f.cols());
  psi_rem = bundle.rightCols(f.cols());
  Panel phi0;
  {
    Panel v1(f.rows(), f.cols());
    for (int c = 0; c < set.channels(); ++c) {
      Tridiag kd = set.at(1.0, c, true);
      for (int col = 0; col < f.cols(); ++col) {
        VectorXc x = f.block(c * set.geo.n, col, set.geo.n, 1);
        VectorXc y;
        kd.matvec(x, y, 1.0);
        v1.block(c * set.geo.n, col, set.geo.n, 1) = y;
      }
    }
    phi0 = v1;
    rc.solve(1.0, false, phi0);
  }
  Panel cook = phi0 + acc - psi_rem;
  ac_filter_k1(wc, cook);
  xr.out_cook = cook;
  r.remainder_truncation = panel_max_norm(psi_rem);

  double dis = 0;
  for (int c = 0; c < f.cols(); ++c)
    dis = std::max(dis, (xr.out_cook.col(c) - r.out.col(c)).norm());
  xr.route_disagreement = dis;
  xr.flagged_inconsistent = dis > flag_tol;
  return xr;
}

Panel xi_zero_adjoint(const WaveContext& wc, const Panel& panel,
                      const WaveParams& wp) {
  const HamiltonianSet& set = *wc.set;
  double s_min = -std::llround(-wp.s_min / wp.dt) * wp.dt;
  EvolutionParams ep;
  ep.s_min = s_min;
  ep.dt = wp.dt;
  ep.horizon_factor = wp.horizon_factor;
  check_evolution_params(set, ep);
  // Xi_0^* = s-lim e^{is Kdec(1)} e^{-is K(1)} E_ac(K(1))
  Panel g = panel;
  ac_filter_k1(wc, g);
  CayleyEvolver k1_ev(set, false, 1.0, wp.dt);
  k1_ev.advance(g, 0.0, s_min);  // e^{-i s_min K(1)} g
  Panel out;
  decoupled_exp_apply(wc.dm, 1.0, -s_min, g, out);  // e^{i s_min Kdec(1)}
  zero_sample_block(set, out);
  return out;
}

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y,
                     double x_lo, double x_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_lo || x[i] > x_hi || y[i] <= 0) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt < 3) throw numerical_error("fit_log_slope: too few points in window");
  return (sxy - sx * sy / cnt) / (sxx - sx * sx / cnt);
}

}  // namespace nesslab
