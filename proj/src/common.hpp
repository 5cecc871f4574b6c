#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace nesslab {

using cplx = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

// State panels are node-major (row = lattice node, column = state) so the
// tridiagonal sweeps touch one contiguous row per node.
using Panel = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr cplx iu{0.0, 1.0};

// Error taxonomy; the CLI maps these onto exit codes (2 config, 3 numerical).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct hypothesis_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Run would let waves reflected off the lattice walls re-enter the sample.
struct horizon_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_guard_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw config_error(what);
}

}  // namespace nesslab
