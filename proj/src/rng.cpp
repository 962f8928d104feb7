#include "compctl/rng.hpp"

#include <cmath>
#include <numbers>

namespace compctl {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint32_t stream)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

void PhiloxStream::refill() {
  buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_),
                           static_cast<std::uint32_t>(block_ >> 32), stream_,
                           0u},
                          key_);
  ++block_;
  used_ = 0;
}

double PhiloxStream::uniform() {
  if (used_ >= 4) refill();
  const std::uint64_t hi = buffer_[used_];
  const std::uint64_t lo = buffer_[used_ + 1];
  used_ += 2;
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;  // 53 bits
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double PhiloxStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Matrix random_normal_matrix(PhiloxStream& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

LtiPlant random_plant(std::uint64_t seed, int n, int m, int p, double radius) {
  PhiloxStream rng(seed, 0x706C616Eu);
  Matrix A = random_normal_matrix(rng, n, n);
  const double rho = spectral_radius(A);
  if (rho > 0.0) A *= radius / rho;
  const Matrix Bu = random_normal_matrix(rng, n, m);
  const Matrix Bw = random_normal_matrix(rng, n, p);
  const Matrix C = random_normal_matrix(rng, n, n);
  return normalize_control_weight(A, Bu, Bw, C.transpose() * C);
}

LtvPlant random_ltv_plant(std::uint64_t seed, int n, int m, int p, int T) {
  PhiloxStream rng(seed, 0x6C747600u);
  LtvPlant plant;
  for (int t = 0; t < T; ++t) {
    Matrix A = random_normal_matrix(rng, n, n);
    const double rho = spectral_radius(A);
    const double target = 0.5 + 0.6 * rng.uniform();
    if (rho > 0.0) A *= target / rho;
    plant.A.push_back(A);
    plant.Bu.push_back(random_normal_matrix(rng, n, m));
    plant.Bw.push_back(random_normal_matrix(rng, n, p));
    const Matrix C = random_normal_matrix(rng, n, n);
    plant.Q.push_back(symmetrize(C.transpose() * C));
  }
  return plant;
}

}  // namespace compctl
