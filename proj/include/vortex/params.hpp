#pragma once

#include <stdexcept>

namespace vortex {

struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  int species = 1;  // M
  double lambda_bg = 10.0;
  double sigma = 2.0;  // torus ratio bound beta/alpha < sigma

  void validate_plane() const {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("alpha and beta must be positive");
    if (species < 1) throw std::invalid_argument("species count must be at least 1");
    if (!(lambda_bg > 0.0)) throw std::invalid_argument("background lambda must be positive");
  }
  void validate_torus() const {
    validate_plane();
    if (species != 1) throw std::invalid_argument("torus system requires M = 1");
    if (!(beta > alpha)) throw std::invalid_argument("torus system requires beta > alpha");
    if (!(sigma > 1.0) || !(beta / alpha < sigma))
      throw std::invalid_argument("torus system requires beta/alpha < sigma");
  }
};

}  // namespace vortex
