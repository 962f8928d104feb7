#pragma once

#include <cmath>
#include <vector>

#include "compctl/linalg.hpp"
#include "compctl/model.hpp"
#include "compctl/rng.hpp"

namespace compctl::testing {

inline LtiPlant boeing() {
  Matrix A(4, 4);
  A << 0.99, 0.03, -0.02, -0.32,  //
      0.01, 0.47, 4.7, 0.0,       //
      0.02, -0.06, 0.40, 0.0,     //
      0.01, -0.04, 0.72, 0.99;
  Matrix B(4, 2);
  B << 0.01, 0.99,  //
      -3.44, 1.66,  //
      -0.83, 0.44,  //
      -0.47, 0.25;
  return normalize_control_weight(A, B, Matrix::Identity(4, 4),
                                  Matrix::Identity(4, 4));
}

inline LtiPlant scalar(double a, double bu, double bw, double q) {
  return normalize_control_weight(Matrix::Constant(1, 1, a),
                                  Matrix::Constant(1, 1, bu),
                                  Matrix::Constant(1, 1, bw),
                                  Matrix::Constant(1, 1, q));
}

inline std::vector<Vector> gaussian_sequence(PhiloxStream& rng, int T, int dim) {
  std::vector<Vector> out(T, Vector(dim));
  for (auto& v : out) {
    for (int j = 0; j < dim; ++j) v(j) = rng.normal();
  }
  return out;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace compctl::testing
