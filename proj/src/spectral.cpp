#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace nesslab {

namespace {

// localization mass within |x| <= a + margin, per column
VectorXd localization_weights(const Geometry& geo, const MatrixXd& vectors) {
  VectorXd w = VectorXd::Zero(vectors.cols());
  const double margin_default = 2.0 * geo.h;
  const double cut = geo.a + margin_default;
  for (int col = 0; col < vectors.cols(); ++col) {
    double acc = 0;
    for (int c = 0; c < geo.channels; ++c)
      for (int i = 0; i < geo.n; ++i)
        if (std::abs(geo.x(i)) <= cut) acc += vectors(c * geo.n + i, col) *
                                               vectors(c * geo.n + i, col);
    w[col] = acc;
  }
  return w;
}

}  // namespace

SpectralData eigendecompose(const HamiltonianSet& set, double kappa,
                            bool decoupled, double margin, int dense_limit) {
  const int n = set.geo.n;
  const int C = set.channels();
  SpectralData sd;
  sd.values.resize(n * C);
  sd.vectors = MatrixXd::Zero(n * C, n * C);
  sd.channel_of.resize(n * C);
  // channels are decoupled: solve each block, then merge ascending
  std::vector<EigenPairs> per(C);
  for (int c = 0; c < C; ++c) per[c] = eig_all(set.at(kappa, c, decoupled), dense_limit);
  std::vector<int> pos(C, 0);
  for (int k = 0; k < n * C; ++k) {
    int best = -1;
    double bv = 0;
    for (int c = 0; c < C; ++c) {
      if (pos[c] < n) {
        double v = per[c].values[pos[c]];
        if (best < 0 || v < bv) {
          best = c;
          bv = v;
        }
      }
    }
    sd.values[k] = bv;
    sd.vectors.block(best * n, k, n, 1) = per[best].vectors.col(pos[best]);
    sd.channel_of[k] = best;
    ++pos[best];
  }
  const double cut = (margin < 0) ? set.geo.a + 2 * set.geo.h : set.geo.a + margin;
  sd.loc_weight = VectorXd::Zero(n * C);
  for (int col = 0; col < n * C; ++col) {
    double acc = 0;
    int c = sd.channel_of[col];
    for (int i = 0; i < n; ++i)
      if (std::abs(set.geo.x(i)) <= cut)
        acc += sd.vectors(c * n + i, col) * sd.vectors(c * n + i, col);
    sd.loc_weight[col] = acc;
  }
  // residual / orthonormality audit on a few states
  for (int col = 0; col < std::min<int>(4, n * C); ++col) {
    int c = sd.channel_of[col];
    VectorXd v = sd.vectors.block(c * n, col, n, 1);
    VectorXd hv;
    set.at(kappa, c, decoupled).matvec(v, hv);
    double res = (hv - sd.values[col] * v).norm();
    if (res > 1e-9 * std::max(1.0, set.k1_norm_est()))
      throw numerical_error("eigendecompose: residual above tolerance");
  }
  return sd;
}

SpectralData eigendecompose(const Tridiag& op, const Geometry& geo,
                            double margin, int dense_limit) {
  SpectralData sd;
  EigenPairs ep = eig_all(op, dense_limit);
  sd.values = ep.values;
  sd.vectors = ep.vectors;
  sd.channel_of.assign(ep.values.size(), 0);
  (void)margin;
  sd.loc_weight = localization_weights(geo, sd.vectors);
  return sd;
}

StateClasses classify_states(const SpectralData& sd, double theta,
                             double continuum_floor, int expected_N) {
  if (!(theta > 0.5 && theta < 1.0))
    throw config_error("classify_states: theta must lie in (0.5, 1)");
  StateClasses sc;
  for (int k = 0; k < sd.values.size(); ++k) {
    if (sd.loc_weight[k] >= theta && sd.values[k] < continuum_floor)
      sc.pp.push_back(k);
    else
      sc.ac.push_back(k);
  }
  if (expected_N >= 0 && static_cast<int>(sc.pp.size()) != expected_N)
    throw hypothesis_violation(
        "classify_states: pp count " + std::to_string(sc.pp.size()) +
        " != configured N " + std::to_string(expected_N) +
        " (dim E_pp constancy fails for this scenario)");
  return sc;
}

double fermi_scalar(double energy, const FermiParams& fp) {
  if (!(fp.kT > 0)) throw config_error("fermi: temperature must be positive");
  double u = (energy - fp.mu) / fp.kT;
  // branch to avoid overflow for deep/high states
  if (u >= 0) {
    double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

MatrixXd fermi_dirac(const SpectralData& sd, const FermiParams& fp) {
  MatrixXd rho = MatrixXd::Zero(sd.vectors.rows(), sd.vectors.rows());
  for (int k = 0; k < sd.values.size(); ++k) {
    rho.noalias() +=
        fermi_scalar(sd.values[k], fp) * sd.vectors.col(k) * sd.vectors.col(k).transpose();
  }
  return rho;
}

FermiChebyshev::FermiChebyshev(double spec_lo, double spec_hi,
                               const FermiParams& fp, double tail_tol,
                               int max_degree) {
  require(spec_hi > spec_lo, "chebyshev: empty spectral interval");
  lo_ = spec_lo;
  hi_ = spec_hi;
  // Chebyshev coefficients of f(c + r cos(theta)) by iterated doubling until
  // the tail is negligible
  const double c = 0.5 * (hi_ + lo_), r = 0.5 * (hi_ - lo_);
  int deg = 256;
  while (true) {
    int m = deg + 1;
    std::vector<double> f(m);
    for (int j = 0; j < m; ++j) {
      double th = M_PI * (j + 0.5) / m;
      f[j] = fermi_scalar(c + r * std::cos(th), fp);
    }
    coef_.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
      double acc = 0;
      for (int j = 0; j < m; ++j)
        acc += f[j] * std::cos(M_PI * k * (j + 0.5) / m);
      coef_[k] = 2.0 * acc / m;
    }
    coef_[0] *= 0.5;
    // tail check over the last eighth
    double tail = 0;
    for (int k = m - m / 8; k < m; ++k) tail = std::max(tail, std::abs(coef_[k]));
    if (tail < tail_tol || deg >= max_degree) break;
    deg *= 2;
  }
}

void FermiChebyshev::apply(const std::vector<Tridiag>& ops, const Panel& x,
                           Panel& y) const {
  const double c = 0.5 * (hi_ + lo_), r = 0.5 * (hi_ - lo_);
  const int n = ops.empty() ? 0 : ops[0].n();
  y.resize(x.rows(), x.cols());
  // Clenshaw on the shifted operator per channel block
  Panel b1 = Panel::Zero(x.rows(), x.cols());
  Panel b2 = Panel::Zero(x.rows(), x.cols());
  Panel tmp(x.rows(), x.cols());
  auto shifted_matvec = [&](const Panel& in, Panel& out) {
    // out = (A - c)/r * in, blockwise
    out.resize(in.rows(), in.cols());
    for (size_t ch = 0; ch < ops.size(); ++ch) {
      const Tridiag& t = ops[ch];
      const int base = static_cast<int>(ch) * n;
      for (int col = 0; col < in.cols(); ++col) {
        for (int i = 0; i < n; ++i) {
          cplx v = (t.diag[i] - c) * in(base + i, col);
          if (i > 0) v += t.off[i - 1] * in(base + i - 1, col);
          if (i + 1 < n) v += t.off[i] * in(base + i + 1, col);
          out(base + i, col) = v / r;
        }
      }
    }
  };
  for (int k = static_cast<int>(coef_.size()) - 1; k >= 1; --k) {
    shifted_matvec(b1, tmp);
    Panel next = 2.0 * tmp - b2 + coef_[k] * x;
    b2.swap(b1);
    b1.swap(next);
  }
  shifted_matvec(b1, tmp);
  y = tmp - b2 + coef_[0] * x;
}

BoundStates bound_states_below(const HamiltonianSet& set, double kappa,
                               bool decoupled, double floor_energy) {
  BoundStates bs;
  std::vector<double> vals;
  std::vector<VectorXd> vecs;
  std::vector<int> chans;
  const int n = set.geo.n;
  for (int c = 0; c < set.channels(); ++c) {
    Tridiag k = set.at(kappa, c, decoupled);
    EigenPairs ep = eigs_below(k, floor_energy);
    for (int j = 0; j < ep.values.size(); ++j) {
      vals.push_back(ep.values[j]);
      vecs.push_back(ep.vectors.col(j));
      chans.push_back(c);
    }
  }
  // ascending merge
  std::vector<int> order(vals.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return vals[a] < vals[b]; });
  bs.values.resize(vals.size());
  bs.vectors = MatrixXd::Zero(set.total(), vals.size());
  bs.channel_of.resize(vals.size());
  for (size_t i = 0; i < order.size(); ++i) {
    bs.values[i] = vals[order[i]];
    bs.vectors.block(chans[order[i]] * n, i, n, 1) = vecs[order[i]];
    bs.channel_of[i] = chans[order[i]];
  }
  return bs;
}

void deflate(const BoundStates& bs, Panel& x) { deflate(bs.vectors, x); }

void deflate(const MatrixXd& vectors, Panel& x) {
  for (int j = 0; j < vectors.cols(); ++j) {
    const VectorXd& b = vectors.col(j);
    for (int col = 0; col < x.cols(); ++col) {
      cplx ov = 0;
      for (int i = 0; i < x.rows(); ++i) ov += b[i] * x(i, col);
      for (int i = 0; i < x.rows(); ++i) x(i, col) -= ov * b[i];
    }
  }
}

// --- decoupled-block machinery ----------------------------------------------

DecoupledModes build_decoupled_modes(const HamiltonianSet& set) {
  DecoupledModes dm;
  dm.set = &set;
  dm.n_minus = set.geo.n_minus();
  dm.n_sample = set.geo.n_sample();
  dm.n_plus = set.geo.n_plus();
  dm.sample_values.resize(set.channels());
  dm.sample_vectors.resize(set.channels());
  for (int c = 0; c < set.channels(); ++c) {
    Tridiag sb;
    sb.diag = set.Hdec[c].diag.segment(set.geo.i_left, dm.n_sample);
    sb.off = dm.n_sample > 1
                 ? VectorXd(set.Hdec[c].off.segment(set.geo.i_left, dm.n_sample - 1))
                 : VectorXd();
    EigenPairs ep = eig_all(sb, 100000);  // sample block stays small by design
    dm.sample_values[c] = ep.values;
    dm.sample_vectors[c] = ep.vectors;
  }
  return dm;
}

double DecoupledModes::lead_energy(int c, int k, bool left) const {
  const Geometry& geo = set->geo;
  const int nb = left ? n_minus : n_plus;
  const double inv_h2 = 1.0 / (geo.h * geo.h);
  return (2.0 - 2.0 * std::cos(M_PI * (k + 1) / (nb + 1))) * inv_h2 +
         geo.lambda[c];
}

namespace {

// FFTW DST-I plan cache; plans are created once per size under a lock and
// executed with the new-array interface.
class DstPlans {
 public:
  static DstPlans& instance() {
    static DstPlans p;
    return p;
  }
  void run(const double* in, double* out, int n) {
    fftw_plan plan = nullptr;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = plans_.find(n);
      if (it == plans_.end()) {
        buf_in_.assign(n, 0.0);
        buf_out_.assign(n, 0.0);
        plan = fftw_plan_r2r_1d(n, buf_in_.data(), buf_out_.data(),
                                FFTW_RODFT00, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_[n] = plan;
      } else {
        plan = it->second;
      }
    }
    fftw_execute_r2r(plan, const_cast<double*>(in), out);
  }

 private:
  std::mutex mu_;
  std::map<int, fftw_plan> plans_;
  std::vector<double> buf_in_, buf_out_;
  ~DstPlans() {
    for (auto& kv : plans_) fftw_destroy_plan(kv.second);
  }
};

// DST-I of a complex vector: out_k = 2 sum_j in_j sin(pi (j+1)(k+1)/(n+1))
void dst1(const VectorXc& in, VectorXc& out) {
  const int n = static_cast<int>(in.size());
  out.resize(n);
  std::vector<double> re(n), im(n), ore(n), oim(n);
  for (int i = 0; i < n; ++i) {
    re[i] = in[i].real();
    im[i] = in[i].imag();
  }
  DstPlans::instance().run(re.data(), ore.data(), n);
  DstPlans::instance().run(im.data(), oim.data(), n);
  for (int i = 0; i < n; ++i) out[i] = cplx(ore[i], oim[i]);
}

}  // namespace

void lead_to_modes(const DecoupledModes& dm, int channel, bool left,
                   const VectorXc& block, VectorXc& coef) {
  (void)channel;
  const int nb = left ? dm.n_minus : dm.n_plus;
  require(static_cast<int>(block.size()) == nb, "lead_to_modes: block size");
  dst1(block, coef);
  coef *= 1.0 / std::sqrt(2.0 * (nb + 1));
}

void modes_to_lead(const DecoupledModes& dm, int channel, bool left,
                   const VectorXc& coef, VectorXc& block) {
  (void)channel;
  const int nb = left ? dm.n_minus : dm.n_plus;
  require(static_cast<int>(coef.size()) == nb, "modes_to_lead: coef size");
  dst1(coef, block);
  block *= 1.0 / std::sqrt(2.0 * (nb + 1));
}

void decoupled_exp_apply(const DecoupledModes& dm, double kappa, double s,
                         const Panel& x, Panel& y) {
  decoupled_function_apply(
      dm, kappa, [s](double e) { return std::exp(cplx(0.0, -s * e)); }, x, y);
}

}  // namespace nesslab
