#include "geometry.hpp"

#include <cmath>

namespace nesslab {

Geometry build_geometry(const GeometryConfig& cfg) {
  require(cfg.h > 0, "geometry: grid spacing h must be positive");
  require(cfg.a_tilde > 0, "geometry: a_tilde must be positive");
  require(cfg.a_tilde < cfg.a,
          "geometry: ordering violated, a_tilde >= a (sample support must sit "
          "inside the internal walls)");
  require(cfg.a < cfg.L, "geometry: wall outside truncated lead (a >= L)");
  require(!cfg.lambda.empty(), "geometry: need at least one channel");
  require(cfg.lambda.front() >= 0, "geometry: lambda_1 must be >= 0");
  for (size_t c = 1; c < cfg.lambda.size(); ++c)
    require(cfg.lambda[c] >= cfg.lambda[c - 1],
            "geometry: channel thresholds must be ascending");

  Geometry g;
  g.h = cfg.h;
  g.L = cfg.L;
  g.a = cfg.a;
  g.a_tilde = cfg.a_tilde;
  g.lambda = cfg.lambda;
  g.channels = static_cast<int>(cfg.lambda.size());
  g.n = static_cast<int>(std::lround(2.0 * cfg.L / cfg.h)) - 1;
  require(g.n >= 3, "geometry: lattice too small");

  // region counts by integer arithmetic on x_i = -L + (i+1) h; nodes exactly
  // at x = +-a belong to the sample region (V vanishes there)
  const double eps = 1e-9;
  // #{i : x_i < -a} = #{i : i+1 < (L-a)/h}
  g.i_left = static_cast<int>(std::ceil((g.L - g.a) / g.h - eps)) - 1;
  // #{i : x_i <= a} = #{i : i+1 <= (L+a)/h}
  g.i_right = static_cast<int>(std::floor((g.L + g.a) / g.h + eps));
  require(g.i_left >= 0 && g.i_right <= g.n && g.i_left < g.i_right,
          "geometry: walls leave an empty sample region on this grid");
  return g;
}

}  // namespace nesslab
