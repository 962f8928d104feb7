#pragma once

#include <span>
#include <string>
#include <vector>

#include "compctl/controllers.hpp"
#include "compctl/linalg.hpp"
#include "compctl/model.hpp"

namespace compctl {

/// State-space realization of w -> (s, u) under plant plus controller, with
/// s = Q^{1/2} x stacked above u.
struct ClosedLoop {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
};

/// Realizes an infinite-horizon h2, hinf, competitive or zero controller in
/// feedback with the plant. Competitive loops have state [nu; x - nu].
ClosedLoop closed_loop(const LtiPlant& plant, const Controller& controller);

/// T(e^{i omega}) = C (e^{i omega} I - A)^{-1} B + D.
CMatrix transfer_at(const ClosedLoop& loop, double omega);

double sigma_max(const CMatrix& m);

/// Offline-optimal cost density N(omega) = G*(I + FF*)^{-1} G at z = e^{i omega}
/// with F(z) = Q^{1/2}(zI - A)^{-1}Bu and G(z) = Q^{1/2}(zI - A)^{-1}Bw.
CMatrix offline_density(const LtiPlant& plant, double omega);

struct FreqPoint {
  double omega = 0.0;
  double sigma_max = 0.0;
  double cr = 0.0;  // NaN when degenerate
  bool degenerate = false;
};

/// lambda_max(N^{-1/2} T*T N^{-1/2}) via a Cholesky factor of N. A
/// numerically singular N is flagged "degenerate-frequency".
FreqPoint per_freq_cr(const LtiPlant& plant, const ClosedLoop& loop,
                      double omega);

/// Offline controller's reference point: CR 1 and sigma = sqrt(lambda_max N).
FreqPoint offline_freq_point(const LtiPlant& plant, double omega);

/// `points` uniform frequencies on [0, pi].
std::vector<double> uniform_grid(int points = 512);

/// Grid sweep, OpenMP-parallel, assembled by index.
std::vector<FreqPoint> sweep(const LtiPlant& plant, const ClosedLoop& loop,
                             std::span<const double> grid);
/// Sequential reference of sweep().
std::vector<FreqPoint> sweep_serial(const LtiPlant& plant,
                                    const ClosedLoop& loop,
                                    std::span<const double> grid);

struct ExtremalDc {
  Vector best;   // eigenvector of the smallest eigenvalue of T(1)'T(1)
  Vector worst;  // eigenvector of the largest eigenvalue
  Vector eigenvalues;  // ascending
};

/// Sign convention: first coordinate with |v_i| > 1e-12 is positive.
ExtremalDc extremal_dc(const LtiPlant& plant, const Controller& controller);

}  // namespace compctl
