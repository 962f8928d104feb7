#include "compctl/model.hpp"

#include <stdexcept>
#include <string>

namespace compctl {
namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-10;
constexpr double kPdFloor = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

Matrix clamp_psd(const Matrix& q, const std::string& name) {
  require(q.rows() == q.cols(), name + " must be square");
  const double scale = std::max(1.0, max_abs(q));
  require(max_abs(q - q.transpose()) <= kSymmetryTol * scale,
          name + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(q));
  require(q.size() == 0 || es.eigenvalues().minCoeff() >= -kPsdTol * scale,
          name + " must be positive semidefinite");
  Vector clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.asDiagonal() *
         es.eigenvectors().transpose();
}

Matrix control_weight_inv_sqrt(const Matrix& r, int m, Matrix* sqrt_out) {
  if (r.size() == 0) {
    if (sqrt_out) *sqrt_out = Matrix::Identity(m, m);
    return Matrix::Identity(m, m);
  }
  require(r.rows() == m && r.cols() == m, "R must be m x m");
  const double scale = std::max(1.0, max_abs(r));
  require(max_abs(r - r.transpose()) <= kSymmetryTol * scale,
          "R must be symmetric");
  const double lambda_min = min_eigenvalue(r);
  if (lambda_min <= kPdFloor) {
    throw std::invalid_argument("R is not positive definite (min eigenvalue " +
                                std::to_string(lambda_min) + ")");
  }
  if (sqrt_out) *sqrt_out = psd_sqrt(r);
  return pd_inv_sqrt(r, kPdFloor);
}

void check_stage(const Matrix& a, const Matrix& bu, const Matrix& bw,
                 const Matrix& q, int n, int m, int p, int t) {
  const std::string at = " at stage " + std::to_string(t);
  require(a.rows() == n && a.cols() == n, "A has inconsistent shape" + at);
  require(bu.rows() == n && bu.cols() == m, "Bu has inconsistent shape" + at);
  require(bw.rows() == n && bw.cols() == p, "Bw has inconsistent shape" + at);
  require(q.rows() == n && q.cols() == n, "Q has inconsistent shape" + at);
}

}  // namespace

Vector LtiPlant::initial_state() const {
  return x0.size() == 0 ? Vector::Zero(state_dim()) : x0;
}

Vector LtiPlant::physical_control(const Vector& normalized) const {
  if (control_weight_sqrt.size() == 0) return normalized;
  return control_weight_sqrt.ldlt().solve(normalized);
}

Vector LtvPlant::initial_state() const {
  return x0.size() == 0 ? Vector::Zero(state_dim()) : x0;
}

bool LtvPlant::has_zero_initial_state() const {
  return x0.size() == 0 || x0.isZero(0.0);
}

LtiPlant normalize_control_weight(const Matrix& A, const Matrix& Bu,
                                  const Matrix& Bw, const Matrix& Q,
                                  const Matrix& R) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(Bu.cols());
  const int p = static_cast<int>(Bw.cols());
  require(n > 0, "plant must have at least one state");
  check_stage(A, Bu, Bw, Q, n, m, p, 0);
  LtiPlant plant;
  plant.A = A;
  plant.Bw = Bw;
  plant.Q = clamp_psd(Q, "Q");
  const Matrix r_inv_sqrt =
      control_weight_inv_sqrt(R, m, &plant.control_weight_sqrt);
  plant.Bu = R.size() == 0 ? Bu : Matrix(Bu * r_inv_sqrt);
  return plant;
}

LtvPlant normalize_control_weight(const LtvPlant& plant,
                                  const std::vector<Matrix>& R) {
  validate(plant);
  require(R.empty() || static_cast<int>(R.size()) == plant.horizon(),
          "R sequence must match the horizon");
  LtvPlant out = plant;
  for (int t = 0; t < plant.horizon(); ++t) {
    out.Q[t] = clamp_psd(plant.Q[t], "Q_" + std::to_string(t));
    if (!R.empty()) {
      out.Bu[t] = plant.Bu[t] *
                  control_weight_inv_sqrt(R[t], plant.control_dim(), nullptr);
    }
  }
  return out;
}

void validate(const LtvPlant& plant) {
  const int T = plant.horizon();
  require(T >= 1, "horizon must be positive");
  require(static_cast<int>(plant.Bu.size()) == T &&
              static_cast<int>(plant.Bw.size()) == T &&
              static_cast<int>(plant.Q.size()) == T,
          "all stage sequences must have length T");
  const int n = plant.state_dim();
  const int m = plant.control_dim();
  const int p = plant.disturbance_dim();
  for (int t = 0; t < T; ++t) {
    check_stage(plant.A[t], plant.Bu[t], plant.Bw[t], plant.Q[t], n, m, p, t);
    const double scale = std::max(1.0, max_abs(plant.Q[t]));
    require(max_abs(plant.Q[t] - plant.Q[t].transpose()) <= kSymmetryTol * scale,
            "Q_t must be symmetric");
    require(min_eigenvalue(plant.Q[t]) >= -kPsdTol * scale,
            "Q_t must be positive semidefinite");
  }
  require(plant.x0.size() == 0 || plant.x0.size() == n,
          "x0 has inconsistent length");
}

LtvPlant promote(const LtiPlant& plant, int horizon) {
  require(horizon >= 1, "horizon must be positive");
  LtvPlant out;
  out.A.assign(horizon, plant.A);
  out.Bu.assign(horizon, plant.Bu);
  out.Bw.assign(horizon, plant.Bw);
  out.Q.assign(horizon, plant.Q);
  out.x0 = plant.x0;
  return out;
}

Matrix transition(const LtvPlant& plant, int i, int j) {
  Matrix phi = Matrix::Identity(plant.state_dim(), plant.state_dim());
  for (int k = j; k < i; ++k) phi = plant.A[k] * phi;
  return phi;
}

DenseOperators build_dense_operators(const LtvPlant& plant) {
  validate(plant);
  require(plant.has_zero_initial_state(),
          "dense operators require the initial state x0 = 0");
  const int T = plant.horizon();
  const int n = plant.state_dim();
  const int m = plant.control_dim();
  const int p = plant.disturbance_dim();
  DenseOperators ops{Matrix::Zero(n * T, m * T), Matrix::Zero(n * T, p * T)};
  std::vector<Matrix> q_sqrt(T);
  for (int t = 0; t < T; ++t) q_sqrt[t] = psd_sqrt(plant.Q[t]);
  // Column block j: the input at stage j reaches the state at i > j through
  // A_{i-1} ... A_{j+1}.
  for (int j = 0; j < T; ++j) {
    Matrix phi = Matrix::Identity(n, n);
    for (int i = j + 1; i < T; ++i) {
      if (i > j + 1) phi = plant.A[i - 1] * phi;
      ops.F.block(i * n, j * m, n, m) = q_sqrt[i] * phi * plant.Bu[j];
      ops.G.block(i * n, j * p, n, p) = q_sqrt[i] * phi * plant.Bw[j];
    }
  }
  return ops;
}

double simulate_cost(const LtvPlant& plant, std::span<const Vector> u,
                     std::span<const Vector> w) {
  const int T = plant.horizon();
  require(static_cast<int>(u.size()) == T && static_cast<int>(w.size()) == T,
          "control and disturbance sequences must have length T");
  Vector x = plant.initial_state();
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    cost += x.dot(plant.Q[t] * x) + u[t].squaredNorm();
    x = plant.A[t] * x + plant.Bu[t] * u[t] + plant.Bw[t] * w[t];
  }
  return cost;
}

}  // namespace compctl
