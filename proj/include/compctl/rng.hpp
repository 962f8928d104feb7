#pragma once

#include <array>
#include <cstdint>

#include "compctl/linalg.hpp"
#include "compctl/model.hpp"

namespace compctl {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// The 64-bit seed is the key; the 128-bit counter is (index_lo, index_hi,
/// stream, 0). Every (seed, stream, index) triple maps to the same block on
/// every platform.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Sequential view of one Philox stream. Uniforms take 53 bits from two
/// consecutive 32-bit words; normals use Box-Muller on consecutive uniform
/// pairs. Each 4-word block therefore yields two uniforms or two normals.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint32_t stream = 0);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;  // 32-bit words consumed from buffer_
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Random test plant: A scaled to spectral radius `radius`, Bu, Bw, Q with
/// standard normal factors (Q = C'C with C n x n), x0 = 0, R = I.
LtiPlant random_plant(std::uint64_t seed, int n, int m, int p,
                      double radius = 0.95);

/// Random time-varying plant of horizon T (stages drawn independently, each
/// A_t with spectral radius <= 1.1).
LtvPlant random_ltv_plant(std::uint64_t seed, int n, int m, int p, int T);

Matrix random_normal_matrix(PhiloxStream& rng, int rows, int cols);

}  // namespace compctl
