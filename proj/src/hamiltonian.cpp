#include "hamiltonian.hpp"

#include <cmath>

namespace nesslab {

double PotentialSpec::operator()(double x, double a_tilde) const {
  auto bump = [](double u) {
    // standard compactly supported bump, value 1 at u = 0
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
  };
  switch (shape) {
    case Shape::none:
      return 0.0;
    case Shape::bump:
      return std::abs(x) < a_tilde ? amplitude * bump(x / radius) : 0.0;
    case Shape::double_well: {
      if (std::abs(x) >= a_tilde) return 0.0;
      return amplitude *
             (bump((x - separation) / radius) + bump((x + separation) / radius));
    }
    case Shape::tabulated:
      return 0.0;  // handled on the grid directly
  }
  return 0.0;
}

HamiltonianSet assemble_hamiltonians(const Geometry& geo,
                                     const PotentialSpec& w,
                                     const BiasSpec& bias) {
  HamiltonianSet set;
  set.geo = geo;
  set.bias = bias;
  const int n = geo.n;
  const double inv_h2 = 1.0 / (geo.h * geo.h);

  // sample potential on the grid
  set.w_values = VectorXd::Zero(n);
  if (w.shape == PotentialSpec::Shape::tabulated) {
    require(static_cast<int>(w.table.size()) == n,
            "potential: tabulated values must match the grid size");
    for (int i = 0; i < n; ++i) set.w_values[i] = w.table[i];
  } else {
    for (int i = 0; i < n; ++i) set.w_values[i] = w(geo.x(i), geo.a_tilde);
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(set.w_values[i]))
      throw config_error("potential: non-finite value at node " +
                         std::to_string(i));
    if (std::abs(geo.x(i)) >= geo.a_tilde && set.w_values[i] != 0.0)
      throw config_error("potential: support leaks past a_tilde");
  }
  // smoothness proxy: second divided differences bounded
  for (int i = 1; i + 1 < n; ++i) {
    double dd = (set.w_values[i + 1] - 2 * set.w_values[i] + set.w_values[i - 1]) *
                inv_h2;
    if (std::abs(dd) > w.smoothness_bound)
      throw config_error("potential: second divided difference exceeds bound");
  }

  set.H.resize(geo.channels);
  set.Hdec.resize(geo.channels);
  for (int c = 0; c < geo.channels; ++c) {
    Tridiag t;
    t.diag = VectorXd::Constant(n, 2.0 * inv_h2 + geo.lambda[c]);
    t.diag += set.w_values;
    t.off = VectorXd::Constant(n - 1, -inv_h2);
    set.H[c] = t;
    // sever the two bonds crossing x = +-a (when the walls cut real bonds)
    Tridiag td = t;
    if (geo.wall_bond_left() >= 0) td.off[geo.wall_bond_left()] = 0.0;
    if (geo.wall_bond_right() >= 0 && geo.wall_bond_right() < n - 1)
      td.off[geo.wall_bond_right()] = 0.0;
    set.Hdec[c] = td;
  }

  set.V = Tridiag::zero(n);
  for (int i = 0; i < geo.i_left; ++i) set.V.diag[i] = bias.v_minus;
  for (int i = geo.i_right; i < n; ++i) set.V.diag[i] = bias.v_plus;
  return set;
}

Tridiag HamiltonianSet::at(double kappa, int channel, bool decoupled) const {
  const Tridiag& base = decoupled ? Hdec[channel] : H[channel];
  return base.plus(V, kappa);
}

double HamiltonianSet::k1_norm_est() const {
  double m = 0;
  for (int c = 0; c < channels(); ++c) {
    Tridiag k1 = at(1.0, c, false);
    m = std::max(m, std::max(std::abs(k1.gershgorin_max()),
                             std::abs(k1.gershgorin_min())));
  }
  return m;
}

double HamiltonianSet::continuum_floor(double kappa) const {
  double shift = std::min({kappa * bias.v_minus, kappa * bias.v_plus, 0.0});
  double floor_v = geo.lambda[0] + shift;
  for (double l : geo.lambda) floor_v = std::min(floor_v, l + shift);
  return floor_v;
}

void HamiltonianSet::project_minus(Panel& p) const {
  for (int c = 0; c < channels(); ++c) {
    p.middleRows(c * geo.n + geo.i_left, geo.n - geo.i_left).setZero();
  }
}

void HamiltonianSet::project_sample(Panel& p) const {
  for (int c = 0; c < channels(); ++c) {
    p.middleRows(c * geo.n, geo.i_left).setZero();
    p.middleRows(c * geo.n + geo.i_right, geo.n - geo.i_right).setZero();
  }
}

void HamiltonianSet::project_plus(Panel& p) const {
  for (int c = 0; c < channels(); ++c) {
    p.middleRows(c * geo.n, geo.i_right).setZero();
  }
}

double HamiltonianSet::lead_bias_value(int i) const {
  if (i < geo.i_left) return bias.v_minus;
  if (i >= geo.i_right) return bias.v_plus;
  return 0.0;
}

OperatorAt hamiltonian_at(const HamiltonianSet& set, double kappa,
                          bool decoupled) {
  if (!(kappa >= 0.0 && kappa <= 1.0))
    throw config_error("hamiltonian_at: kappa outside [0,1]");
  return OperatorAt{&set, kappa, decoupled};
}

}  // namespace nesslab
