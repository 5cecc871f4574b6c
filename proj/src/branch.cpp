#include "branch.hpp"

#include <cmath>
#include <limits>

namespace nesslab {

namespace {

// overlap-maximizing assignment of new states to previous branches (N is
// small; greedy over the N! alternatives is unnecessary, N<=4 permutations)
std::vector<int> match_by_overlap(const MatrixXd& prev, const MatrixXd& next) {
  const int N = static_cast<int>(prev.cols());
  std::vector<int> perm(N);
  std::vector<bool> used(N, false);
  for (int j = 0; j < N; ++j) {
    int best = -1;
    double bo = -1;
    for (int k = 0; k < N; ++k) {
      if (used[k]) continue;
      double o = std::abs(prev.col(j).dot(next.col(k)));
      if (o > bo) {
        bo = o;
        best = k;
      }
    }
    perm[j] = best;
    used[best] = true;
  }
  return perm;
}

}  // namespace

BranchTable track_branches(const HamiltonianSet& set, const VectorXd& kappas,
                           int N, double theta) {
  require(kappas.size() >= 2, "track_branches: need at least two kappa samples");
  require(kappas[0] == 0.0 && kappas[kappas.size() - 1] == 1.0,
          "track_branches: kappa grid must span [0,1]");
  BranchTable bt;
  bt.N = N;
  bt.kappas = kappas;
  const int K = static_cast<int>(kappas.size());
  bt.eps = MatrixXd::Zero(N, K);
  bt.vectors.resize(K);
  bt.floor_at.resize(K);

  for (int s = 0; s < K; ++s) {
    const double kap = kappas[s];
    const double floor_v = set.continuum_floor(kap);
    bt.floor_at[s] = floor_v;
    BoundStates bs = bound_states_below(set, kap, false, floor_v);
    if (bs.values.size() != N)
      throw hypothesis_violation(
          "track_branches: found " + std::to_string(bs.values.size()) +
          " discrete states below the continuum floor at kappa=" +
          std::to_string(kap) + ", expected N=" + std::to_string(N));
    // localization audit (the floor criterion already excludes extended
    // states on healthy scenarios; weight check guards leaky wells)
    for (int j = 0; j < N; ++j) {
      double wloc = 0;
      const int n = set.geo.n;
      int c = bs.channel_of[j];
      for (int i = 0; i < n; ++i)
        if (std::abs(set.geo.x(i)) <= set.geo.a + 2 * set.geo.h)
          wloc += bs.vectors(c * n + i, j) * bs.vectors(c * n + i, j);
      if (wloc < theta * 0.5)
        throw hypothesis_violation(
            "track_branches: candidate discrete state is not localized");
    }
    MatrixXd vecs = bs.vectors;
    VectorXd vals = bs.values;
    if (s == 0) {
      // reject degenerate unperturbed states (Gell-Mann-Low regime deferred)
      for (int j = 1; j < N; ++j)
        if (std::abs(vals[j] - vals[j - 1]) <
            1e-10 * std::max(1.0, set.k1_norm_est()))
          throw hypothesis_violation(
              "track_branches: degenerate eigenvalues at kappa=0");
      bt.eps.col(0) = vals;
      bt.vectors[0] = vecs;
    } else {
      std::vector<int> perm = match_by_overlap(bt.vectors[s - 1], vecs);
      MatrixXd vv(vecs.rows(), N);
      VectorXd ee(N);
      for (int j = 0; j < N; ++j) {
        vv.col(j) = vecs.col(perm[j]);
        // keep the continued vector field smooth: align sign with predecessor
        if (bt.vectors[s - 1].col(j).dot(vv.col(j)) < 0) vv.col(j) = -vv.col(j);
        ee[j] = vals[perm[j]];
      }
      bt.vectors[s] = vv;
      bt.eps.col(s) = ee;
    }
  }

  // crossing detection (N = 2 bookkeeping, Hypothesis 3.3)
  if (N >= 2) {
    int crossings = 0;
    CrossingRecord rec;
    VectorXd gap(K);
    for (int s = 0; s < K; ++s) gap[s] = bt.eps(0, s) - bt.eps(1, s);
    // median |d gap / d kappa| scale for the tolerance
    std::vector<double> slopes;
    for (int s = 1; s < K; ++s)
      slopes.push_back(std::abs(gap[s] - gap[s - 1]) /
                       (kappas[s] - kappas[s - 1]));
    std::sort(slopes.begin(), slopes.end());
    double med = slopes.empty() ? 0.0 : slopes[slopes.size() / 2];
    double dk = kappas[1] - kappas[0];
    double tol = 10.0 * dk * std::max(med, 1e-14);
    (void)tol;
    // strict sign flips of the continued gap; exact zeros at a sample count
    // as the flip of the surrounding pair
    int prev_sign = 0;
    int prev_idx = -1;
    for (int s = 0; s < K; ++s) {
      int sg = (gap[s] > 0) - (gap[s] < 0);
      if (sg == 0) continue;
      if (prev_sign != 0 && sg != prev_sign) {
        ++crossings;
        double t = gap[prev_idx] / (gap[prev_idx] - gap[s]);
        rec.kappa0 = kappas[prev_idx] + t * (kappas[s] - kappas[prev_idx]);
        rec.grid_index = prev_idx;
      }
      prev_sign = sg;
      prev_idx = s;
    }
    if (crossings > 1)
      throw hypothesis_violation(
          "track_branches: more than one branch crossing detected");
    if (crossings == 1) {
      // contact order from log|gap| vs log|kappa - kappa0| away from the node
      double num = 0, den = 0, sx = 0, sy = 0;
      int cnt = 0;
      for (int s = 0; s < K; ++s) {
        double d = std::abs(kappas[s] - rec.kappa0);
        if (d < 2 * dk) continue;
        double lx = std::log(d), ly = std::log(std::abs(gap[s]) + 1e-300);
        sx += lx;
        sy += ly;
        num += lx * ly;
        den += lx * lx;
        ++cnt;
      }
      if (cnt >= 3) {
        double slope = (num - sx * sy / cnt) / (den - sx * sx / cnt);
        rec.contact_order = std::max(1, static_cast<int>(std::lround(slope)));
      }
      bt.crossing = rec;
    }
  }
  return bt;
}

MatrixXd BranchTable::vectors_at(double kappa, double min_overlap) const {
  const int K = static_cast<int>(kappas.size());
  kappa = std::min(std::max(kappa, kappas[0]), kappas[K - 1]);
  int s = 0;
  while (s + 2 < K && kappas[s + 1] <= kappa) ++s;
  double t = (kappa - kappas[s]) / (kappas[s + 1] - kappas[s]);
  MatrixXd v = (1 - t) * vectors[s] + t * vectors[s + 1];
  for (int j = 0; j < v.cols(); ++j) {
    // adjacent-sample overlap guards the interpolation quality
    double ov = std::abs(vectors[s].col(j).dot(vectors[s + 1].col(j)));
    if (ov < min_overlap)
      throw numerical_error(
          "branch projector interpolation: adjacent overlap " +
          std::to_string(ov) + " below " + std::to_string(min_overlap) +
          ", refine the kappa grid");
    v.col(j).normalize();
  }
  return v;
}

VectorXd BranchTable::eps_at(double kappa) const {
  const int K = static_cast<int>(kappas.size());
  kappa = std::min(std::max(kappa, kappas[0]), kappas[K - 1]);
  int s = 0;
  while (s + 2 < K && kappas[s + 1] <= kappa) ++s;
  double t = (kappa - kappas[s]) / (kappas[s + 1] - kappas[s]);
  return (1 - t) * eps.col(s) + t * eps.col(s + 1);
}

double BranchTable::min_gap() const {
  if (N < 2) return std::numeric_limits<double>::infinity();
  double g = std::numeric_limits<double>::infinity();
  for (int s = 0; s < eps.cols(); ++s)
    g = std::min(g, std::abs(eps(0, s) - eps(1, s)));
  return g;
}

double gap_audit(const BranchTable& bt) {
  if (bt.N == 0 || bt.eps.cols() == 0)
    return std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (int s = 0; s < bt.eps.cols(); ++s)
    for (int j = 0; j < bt.N; ++j)
      d = std::min(d, bt.floor_at[s] - bt.eps(j, s));
  return d;
}

}  // namespace nesslab
