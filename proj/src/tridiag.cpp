#include "tridiag.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace nesslab {

void Tridiag::matvec(const VectorXc& x, VectorXc& y, double shift) const {
  const int m = n();
  y.resize(m);
  for (int i = 0; i < m; ++i) {
    cplx v = (diag[i] + shift) * x[i];
    if (i > 0) v += off[i - 1] * x[i - 1];
    if (i + 1 < m) v += off[i] * x[i + 1];
    y[i] = v;
  }
}

void Tridiag::matvec(const VectorXd& x, VectorXd& y, double shift) const {
  const int m = n();
  y.resize(m);
  for (int i = 0; i < m; ++i) {
    double v = (diag[i] + shift) * x[i];
    if (i > 0) v += off[i - 1] * x[i - 1];
    if (i + 1 < m) v += off[i] * x[i + 1];
    y[i] = v;
  }
}

Tridiag Tridiag::plus(const Tridiag& b, double c) const {
  Tridiag r;
  r.diag = diag + c * b.diag;
  r.off = off + c * b.off;
  return r;
}

double Tridiag::gershgorin_min() const {
  const int m = n();
  double lo = diag[0];
  for (int i = 0; i < m; ++i) {
    double r = 0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < m) r += std::abs(off[i]);
    lo = std::min(lo, diag[i] - r);
  }
  return lo;
}

double Tridiag::gershgorin_max() const {
  const int m = n();
  double hi = diag[0];
  for (int i = 0; i < m; ++i) {
    double r = 0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < m) r += std::abs(off[i]);
    hi = std::max(hi, diag[i] + r);
  }
  return hi;
}

MatrixXd Tridiag::dense() const {
  const int m = n();
  MatrixXd d = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    d(i, i) = diag[i];
    if (i + 1 < m) {
      d(i, i + 1) = off[i];
      d(i + 1, i) = off[i];
    }
  }
  return d;
}

double Tridiag::max_abs() const {
  double m = diag.cwiseAbs().maxCoeff();
  if (off.size() > 0) m = std::max(m, off.cwiseAbs().maxCoeff());
  return m;
}

void TridiagFactor::factor(const Tridiag& a, cplx z, const VectorXd* extra,
                           double w) {
  const int m = a.n();
  inv_piv_.resize(m);
  lower_.resize(std::max(0, m - 1));
  off_ = a.off;
  cplx piv = a.diag[0] - z + (extra ? w * (*extra)[0] : 0.0);
  if (std::abs(piv) < 1e-300) throw numerical_error("tridiag factor: zero pivot");
  inv_piv_[0] = 1.0 / piv;
  for (int i = 1; i < m; ++i) {
    cplx l = a.off[i - 1] * inv_piv_[i - 1];
    lower_[i - 1] = l;
    piv = a.diag[i] - z + (extra ? w * (*extra)[i] : 0.0) - l * a.off[i - 1];
    if (std::abs(piv) < 1e-300) throw numerical_error("tridiag factor: zero pivot");
    inv_piv_[i] = 1.0 / piv;
  }
}

void TridiagFactor::solve(VectorXc& b) const {
  const int m = n();
  for (int i = 1; i < m; ++i) b[i] -= lower_[i - 1] * b[i - 1];
  b[m - 1] *= inv_piv_[m - 1];
  for (int i = m - 2; i >= 0; --i)
    b[i] = (b[i] - off_[i] * b[i + 1]) * inv_piv_[i];
}

void TridiagFactor::solve(Panel& b) const {
  const int m = n();
  const int k = static_cast<int>(b.cols());
  for (int i = 1; i < m; ++i) {
    const cplx l = lower_[i - 1];
    b.row(i) -= l * b.row(i - 1);
  }
  b.row(m - 1) *= inv_piv_[m - 1];
  for (int i = m - 2; i >= 0; --i) {
    const double o = off_[i];
    const cplx p = inv_piv_[i];
    for (int c = 0; c < k; ++c) b(i, c) = (b(i, c) - o * b(i + 1, c)) * p;
  }
}

int sturm_count_below(const Tridiag& a, double x) {
  const int m = a.n();
  int count = 0;
  double d = a.diag[0] - x;
  if (d < 0) ++count;
  for (int i = 1; i < m; ++i) {
    double o = a.off[i - 1];
    // LDL^T recurrence; guard exact zeros of d with a representable nudge
    if (d == 0.0) d = 1e-300;
    d = (a.diag[i] - x) - o * o / d;
    if (d < 0) ++count;
  }
  return count;
}

namespace {

// one inverse-iteration eigenvector at shift ev
VectorXd inverse_iterate(const Tridiag& a, double ev, int iters = 4) {
  const int m = a.n();
  TridiagFactor f;
  // shift slightly off the eigenvalue so the factorization stays finite
  double scale = std::max(1.0, a.max_abs());
  f.factor(a, cplx(ev + 1e-13 * scale, 0.0));
  VectorXd v = VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
  // deterministic non-degenerate seed
  for (int i = 0; i < m; ++i) v[i] *= (1.0 + 0.5 * std::sin(0.7 * (i + 1)));
  v.normalize();
  VectorXc w(m);
  for (int it = 0; it < iters; ++it) {
    w = v.cast<cplx>();
    f.solve(w);
    v = w.real();
    double nrm = v.norm();
    if (nrm == 0) throw numerical_error("inverse iteration collapsed");
    v /= nrm;
  }
  return v;
}

}  // namespace

EigenPairs eigs_below(const Tridiag& a, double x0, double atol) {
  EigenPairs out;
  const int k = sturm_count_below(a, x0);
  out.values.resize(k);
  out.vectors.resize(a.n(), k);
  if (k == 0) return out;
  double lo = a.gershgorin_min() - 1e-9;
  // j-th eigenvalue (0-based) below x0 via bisection on the Sturm count
  for (int j = 0; j < k; ++j) {
    double l = lo, r = x0;
    while (r - l > atol * std::max(1.0, std::abs(r))) {
      double mid = 0.5 * (l + r);
      if (sturm_count_below(a, mid) >= j + 1)
        r = mid;
      else
        l = mid;
    }
    out.values[j] = 0.5 * (l + r);
  }
  for (int j = 0; j < k; ++j) out.vectors.col(j) = inverse_iterate(a, out.values[j]);
  // re-orthogonalize close pairs (inverse iteration can mix them)
  for (int j = 1; j < k; ++j) {
    for (int i = 0; i < j; ++i) {
      if (std::abs(out.values[j] - out.values[i]) <
          1e-6 * std::max(1.0, a.max_abs())) {
        out.vectors.col(j) -=
            out.vectors.col(i).dot(out.vectors.col(j)) * out.vectors.col(i);
      }
    }
    out.vectors.col(j).normalize();
  }
  fix_phase(out.vectors);
  return out;
}

EigenPairs eig_all(const Tridiag& a, int dense_limit) {
  if (a.n() > dense_limit)
    throw resource_guard_error("dense eigendecomposition requested for n=" +
                               std::to_string(a.n()) + " > limit " +
                               std::to_string(dense_limit));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  es.computeFromTridiagonal(a.diag, a.off);
  if (es.info() != Eigen::Success)
    throw numerical_error("tridiagonal QR failed to converge");
  EigenPairs out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  fix_phase(out.vectors);
  return out;
}

void fix_phase(VectorXd& v) {
  int idx = 0;
  double best = 0;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      idx = i;
    }
  }
  if (v[idx] < 0) v = -v;
}

void fix_phase(MatrixXd& vectors) {
  for (int j = 0; j < vectors.cols(); ++j) {
    VectorXd c = vectors.col(j);
    fix_phase(c);
    vectors.col(j) = c;
  }
}

}  // namespace nesslab
