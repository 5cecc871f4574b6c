#pragma once

#include <utility>
#include <vector>

#include "hamiltonian.hpp"

namespace nesslab {

// Eigen-decomposition of one operator over all channels, energy-ascending,
// with the per-state localization weight (mass within |x| <= a + margin).
struct SpectralData {
  VectorXd values;
  MatrixXd vectors;            // total() x total()
  VectorXd loc_weight;
  std::vector<int> channel_of;  // originating channel per state
};

struct FermiParams {
  double kT = 0.1;
  double mu = 0.0;
};

SpectralData eigendecompose(const HamiltonianSet& set, double kappa,
                            bool decoupled, double margin = -1.0,
                            int dense_limit = 6000);
// same, for a free-standing tridiagonal operator (oracles, synthetic models)
SpectralData eigendecompose(const Tridiag& op, const Geometry& geo,
                            double margin = -1.0, int dense_limit = 6000);

struct StateClasses {
  std::vector<int> pp;  // indices into SpectralData
  std::vector<int> ac;
};

// pp/ac proxy split: localized (weight >= theta) AND below the continuum
// floor -> pp. expected_N < 0 skips the Hypothesis 3.2 count check.
StateClasses classify_states(const SpectralData& sd, double theta,
                             double continuum_floor, int expected_N = -1);

double fermi_scalar(double energy, const FermiParams& fp);
// dense functional calculus rho = f_FD(A) from a decomposition
MatrixXd fermi_dirac(const SpectralData& sd, const FermiParams& fp);

// Chebyshev evaluation of f_FD(A) columns for large sparse operators; degree
// grows until the coefficient tail drops below tail_tol.
class FermiChebyshev {
 public:
  FermiChebyshev(double spec_lo, double spec_hi, const FermiParams& fp,
                 double tail_tol = 1e-12, int max_degree = 6000);
  // y = f_FD(A) x, with A given per channel
  void apply(const std::vector<Tridiag>& ops, const Panel& x, Panel& y) const;
  int degree() const { return static_cast<int>(coef_.size()) - 1; }

 private:
  double lo_, hi_;
  std::vector<double> coef_;
};

// Bound states of K(kappa) below the continuum floor on large lattices
// (Sturm bisection + inverse iteration), concatenated over channels.
struct BoundStates {
  VectorXd values;
  MatrixXd vectors;            // total() x N
  std::vector<int> channel_of;
};
BoundStates bound_states_below(const HamiltonianSet& set, double kappa,
                               bool decoupled, double floor_energy);

// E_ac proxy action: y = (I - sum_j |b_j><b_j|) x
void deflate(const BoundStates& bs, Panel& x);
void deflate(const MatrixXd& vectors, Panel& x);

// --- decoupled-block machinery ---------------------------------------------
// Closed-form sine eigenbasis of the lead blocks and a small dense solve for
// the sample block; the backbone of every function of Hdec / Kdec.
struct DecoupledModes {
  const HamiltonianSet* set = nullptr;
  // sample block eigenpairs per channel (small dense)
  std::vector<VectorXd> sample_values;
  std::vector<MatrixXd> sample_vectors;
  int n_minus = 0, n_sample = 0, n_plus = 0;

  // lead mode energy: channel c, mode k (0-based), without bias
  double lead_energy(int c, int k, bool left) const;
  int lead_count(bool left) const { return left ? n_minus : n_plus; }
};
DecoupledModes build_decoupled_modes(const HamiltonianSet& set);

// forward/backward sine transforms on one lead block of one channel.
// coef[k] = sum_j vec[j] phi_k[j] with phi the orthonormal sine modes.
void lead_to_modes(const DecoupledModes& dm, int channel, bool left,
                   const VectorXc& block, VectorXc& coef);
void modes_to_lead(const DecoupledModes& dm, int channel, bool left,
                   const VectorXc& coef, VectorXc& block);

// y = g(Hdec + kappa V) x for scalar callable g, applied blockwise;
// exact via sample eigenpairs and lead sine modes.
template <class G>
void decoupled_function_apply(const DecoupledModes& dm, double kappa, G&& g,
                              const Panel& x, Panel& y);

// y = exp(-i s (Hdec + kappa V)) x (exact, blockwise spectral)
void decoupled_exp_apply(const DecoupledModes& dm, double kappa, double s,
                         const Panel& x, Panel& y);

// -----------------------------------------------------------------------------

template <class G>
void decoupled_function_apply(const DecoupledModes& dm, double kappa, G&& g,
                              const Panel& x, Panel& y) {
  const HamiltonianSet& set = *dm.set;
  const int n = set.geo.n;
  y.resize(x.rows(), x.cols());
  VectorXc block, coef;
  for (int c = 0; c < set.channels(); ++c) {
    const int base = c * n;
    for (int col = 0; col < x.cols(); ++col) {
      // left lead
      if (dm.n_minus > 0) {
        block = x.block(base, col, dm.n_minus, 1);
        lead_to_modes(dm, c, true, block, coef);
        for (int k = 0; k < dm.n_minus; ++k)
          coef[k] *= g(dm.lead_energy(c, k, true) + kappa * set.bias.v_minus);
        modes_to_lead(dm, c, true, coef, block);
        y.block(base, col, dm.n_minus, 1) = block;
      }
      // sample block (bias vanishes there)
      if (dm.n_sample > 0) {
        VectorXc sb = x.block(base + set.geo.i_left, col, dm.n_sample, 1);
        VectorXc sc = dm.sample_vectors[c].transpose() * sb;
        for (int k = 0; k < dm.n_sample; ++k)
          sc[k] *= g(dm.sample_values[c][k]);
        y.block(base + set.geo.i_left, col, dm.n_sample, 1) =
            dm.sample_vectors[c] * sc;
      }
      // right lead
      if (dm.n_plus > 0) {
        block = x.block(base + set.geo.i_right, col, dm.n_plus, 1);
        lead_to_modes(dm, c, false, block, coef);
        for (int k = 0; k < dm.n_plus; ++k)
          coef[k] *= g(dm.lead_energy(c, k, false) + kappa * set.bias.v_plus);
        modes_to_lead(dm, c, false, coef, block);
        y.block(base + set.geo.i_right, col, dm.n_plus, 1) = block;
      }
    }
  }
}

}  // namespace nesslab
