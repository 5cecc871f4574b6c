#pragma once

#include <optional>

#include "spectral.hpp"

namespace nesslab {

struct CrossingRecord {
  double kappa0 = 0;
  int contact_order = 1;  // M from the log-gap fit
  int grid_index = 0;     // cell of the kappa grid containing the crossing
};

// kappa-resolved discrete branches of K(kappa): eigenvalues eps_j(kappa) and
// the analytically continued eigenvectors, matched by maximal overlap.
struct BranchTable {
  VectorXd kappas;
  MatrixXd eps;                        // N x K samples, branch-continued
  std::vector<MatrixXd> vectors;       // per kappa: total() x N
  std::vector<double> floor_at;        // continuum floor per kappa
  std::optional<CrossingRecord> crossing;
  int N = 0;

  // continued projector columns at arbitrary kappa (linear interpolation of
  // the branch vectors, renormalized); overlap degradation is guarded
  MatrixXd vectors_at(double kappa, double min_overlap = 0.8) const;
  VectorXd eps_at(double kappa) const;
  double min_gap() const;  // min over kappa of |eps_1 - eps_2| (N >= 2)
};

// Track N discrete branches over a kappa grid on [0,1]. Uses the pp/ac proxy
// floor to find candidates; exactly N must exist at every sample.
BranchTable track_branches(const HamiltonianSet& set, const VectorXd& kappas,
                           int N, double theta = 0.9);

// min over kappa and branches of (floor - eps_j); +inf sentinel when the
// table is empty
double gap_audit(const BranchTable& bt);

}  // namespace nesslab
