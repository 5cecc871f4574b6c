#pragma once

#include "common.hpp"

namespace nesslab {

// Real symmetric tridiagonal operator. off[i] couples nodes i and i+1; a zero
// off entry is an exact Dirichlet cut, so block-diagonal operators (decoupled
// Hamiltonians, synthetic direct sums) use the same storage.
struct Tridiag {
  VectorXd diag;
  VectorXd off;  // size n-1

  int n() const { return static_cast<int>(diag.size()); }

  static Tridiag zero(int n) {
    Tridiag t;
    t.diag = VectorXd::Zero(n);
    t.off = VectorXd::Zero(std::max(0, n - 1));
    return t;
  }

  // y = (A + shift) x
  void matvec(const VectorXc& x, VectorXc& y, double shift = 0.0) const;
  void matvec(const VectorXd& x, VectorXd& y, double shift = 0.0) const;

  // A + c*B, elementwise on both bands
  Tridiag plus(const Tridiag& b, double c) const;

  double gershgorin_min() const;
  double gershgorin_max() const;
  MatrixXd dense() const;
  double max_abs() const;
};

// LU factorization of (A - z) with A real symmetric tridiagonal and z complex.
// No pivoting: all uses here are either diagonally dominant Cayley factors or
// resolvents at complex z off the spectrum; factor() rejects near-singular
// pivots instead.
class TridiagFactor {
 public:
  TridiagFactor() = default;
  // extra: optional second real diagonal added with weight w (bias term).
  void factor(const Tridiag& a, cplx z, const VectorXd* extra = nullptr,
              double w = 0.0);
  // solve (A - z) x = b in place, one column
  void solve(VectorXc& b) const;
  // solve for every column of a node-major panel
  void solve(Panel& b) const;
  int n() const { return static_cast<int>(inv_piv_.size()); }

 private:
  VectorXc inv_piv_;  // 1/pivot per row
  VectorXc lower_;    // multiplier for row i+1 <- row i
  VectorXd off_;      // copy of the off band
};

// Number of eigenvalues of A strictly below x (Sturm / LDL^T sign count).
int sturm_count_below(const Tridiag& a, double x);

struct EigenPairs {
  VectorXd values;   // ascending
  MatrixXd vectors;  // column j <-> values[j], unit norm
};

// All eigenvalues below x0, each refined by bisection to atol and paired with
// an inverse-iteration eigenvector. Near-degenerate pairs are re-orthogonalized.
EigenPairs eigs_below(const Tridiag& a, double x0, double atol = 1e-12);

// Full dense eigendecomposition (QR on the tridiagonal bands). Guarded: meant
// for desk-size operators and oracles, not the production lattices.
EigenPairs eig_all(const Tridiag& a, int dense_limit = 6000);

// Largest-magnitude-component-positive phase convention, applied per column.
void fix_phase(MatrixXd& vectors);
void fix_phase(VectorXd& v);

}  // namespace nesslab
