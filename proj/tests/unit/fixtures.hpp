#pragma once

#include "chemotax/params.hpp"

namespace fixtures {

// One-dimensional base configuration: 100 sites on (0, 1], u_max = 2e6, c_bar = 2e6.
inline chemotax::ParamSet base_1d() {
  chemotax::ParamSet p;
  p.eta = 2.4502;
  p.theta = 0.1225;
  p.u_max = 2e6;
  p.zeta = 1.0;
  p.c_bar = 2e6;
  p.beta_c = 2.5e-3;
  p.alpha = 1.0;
  p.kappa = 1.0;
  p.h = 1e-2;
  p.tau = 1e-2;
  p.dim = 1;
  return p;
}

}  // namespace fixtures
