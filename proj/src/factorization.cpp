#include "compctl/factorization.hpp"

#include <stdexcept>
#include <string>

namespace compctl {
namespace {

// Sigma^{-1} applied from the right: X Sigma^{-1} for symmetric PD Sigma.
Matrix right_solve_pd(const Matrix& x, const Matrix& sigma) {
  return sigma.llt().solve(x.transpose()).transpose();
}

// Smallest singular value of the stacked PBH matrix at each eigenvalue of A
// on or outside the unit circle.
bool pbh_ok(const Matrix& A, const Matrix& extra, bool columns, double tol) {
  const Eigen::Index n = A.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("PBH test: eigensolver failed");
  }
  for (const Complex lambda : es.eigenvalues()) {
    if (std::abs(lambda) < 1.0) continue;
    CMatrix shifted = lambda * CMatrix::Identity(n, n) - A.cast<Complex>();
    CMatrix test;
    if (columns) {
      test.resize(n, n + extra.cols());
      test << shifted, extra.cast<Complex>();
    } else {
      test.resize(n + extra.rows(), n);
      test << shifted, extra.cast<Complex>();
    }
    Eigen::JacobiSVD<CMatrix> svd(test);
    const auto& sv = svd.singularValues();
    if (sv.size() < n || sv(n - 1) <= tol) return false;
  }
  return true;
}

}  // namespace

WhiteningSchedule whitening_fh(const LtvPlant& plant) {
  validate(plant);
  const int T = plant.horizon();
  const int n = plant.state_dim();
  WhiteningSchedule s;
  s.P.reserve(T + 1);
  s.P.push_back(Matrix::Zero(n, n));
  for (int t = 0; t < T; ++t) {
    const Matrix& P = s.P[t];
    const Matrix& A = plant.A[t];
    const Matrix qs = psd_sqrt(plant.Q[t]);
    const Matrix sigma =
        symmetrize(Matrix::Identity(n, n) + qs * P * qs);
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success || min_eigenvalue(sigma) < 1.0 - 1e-9) {
      s.verdict = Verdict::fail(Reason::kNumericFailure,
                                "Sigma_t is not positive definite", t);
      return s;
    }
    const Matrix K = right_solve_pd(A * P * qs, sigma);
    s.QSqrt.push_back(qs);
    s.Sigma.push_back(sigma);
    s.SigmaSqrt.push_back(psd_sqrt(sigma));
    s.SigmaInvSqrt.push_back(pd_inv_sqrt(sigma));
    s.K.push_back(K);
    s.P.push_back(symmetrize(A * P * A.transpose() +
                             plant.Bu[t] * plant.Bu[t].transpose() -
                             K * sigma * K.transpose()));
  }
  return s;
}

Matrix dense_delta(const WhiteningSchedule& schedule, const LtvPlant& plant) {
  const int T = schedule.horizon();
  const int n = plant.state_dim();
  Matrix delta = Matrix::Zero(n * T, n * T);
  for (int j = 0; j < T; ++j) {
    delta.block(j * n, j * n, n, n) = schedule.SigmaSqrt[j];
    // eta_{j+1} = K_j Sigma_j^{1/2} e_j, then free propagation.
    Matrix eta = schedule.K[j] * schedule.SigmaSqrt[j];
    for (int i = j + 1; i < T; ++i) {
      if (i > j + 1) eta = plant.A[i - 1] * eta;
      delta.block(i * n, j * n, n, n) = schedule.QSqrt[i] * eta;
    }
  }
  return delta;
}

bool is_stabilizable(const Matrix& A, const Matrix& B, double tol) {
  return pbh_ok(A, B, true, tol);
}

bool is_detectable(const Matrix& A, const Matrix& C, double tol) {
  return pbh_ok(A, C, false, tol);
}

SpectralFactor spectral_factor_ih(const LtiPlant& plant,
                                  const DareOptions& options) {
  const int n = plant.state_dim();
  SpectralFactor f;
  f.QSqrt = psd_sqrt(plant.Q);
  if (!is_stabilizable(plant.A, plant.Bu)) {
    throw std::invalid_argument("(A, Bu) is not stabilizable");
  }
  if (!is_detectable(plant.A, f.QSqrt)) {
    throw std::invalid_argument("(A, Q^{1/2}) is not detectable");
  }
  // The filtering equation is the control Riccati equation of the dual
  // system (A', Q^{1/2}) with state weight Bu Bu'.
  const Matrix at = plant.A.transpose();
  const RiccatiFixedPoint dual =
      dare_fixed_point(at, f.QSqrt, Matrix::Identity(n, n),
                       symmetrize(plant.Bu * plant.Bu.transpose()), options);
  f.P = dual.P;
  f.iterations = dual.iterations;
  f.residual = dual.residual;
  f.verdict = dual.verdict;
  if (f.P.size() == 0) f.P = Matrix::Zero(n, n);
  f.Sigma = symmetrize(Matrix::Identity(n, n) + f.QSqrt * f.P * f.QSqrt);
  f.SigmaSqrt = psd_sqrt(f.Sigma);
  f.SigmaInvSqrt = pd_inv_sqrt(f.Sigma);
  f.K = right_solve_pd(plant.A * f.P * f.QSqrt, f.Sigma);
  f.Aw = plant.A - f.K * f.QSqrt;
  f.whitening_radius = spectral_radius(f.Aw);
  if (f.verdict.feasible && f.whitening_radius >= 1.0 - kStrictMargin) {
    f.verdict = Verdict::fail(Reason::kNotStabilizing,
                              "A - K Q^{1/2} is not stable");
  }
  if (!f.verdict.feasible &&
      f.verdict.reason != Reason::kNotStabilizing) {
    f.verdict.reason = Reason::kNoStabilizingSolution;
  }
  return f;
}

CMatrix delta_at(const LtiPlant& plant, const SpectralFactor& factor,
                 Complex z) {
  const Eigen::Index n = plant.A.rows();
  const CMatrix resolvent_k =
      (z * CMatrix::Identity(n, n) - plant.A.cast<Complex>())
          .partialPivLu()
          .solve(factor.K.cast<Complex>());
  return (CMatrix::Identity(n, n) + factor.QSqrt.cast<Complex>() * resolvent_k) *
         factor.SigmaSqrt.cast<Complex>();
}

LtvPlant SyntheticSystem::as_plant() const {
  LtvPlant p;
  p.A = A;
  p.Bu = Bu;
  p.Bw = Bw;
  p.Q = Q;
  return p;
}

namespace {

void append_stage(SyntheticSystem& s, const Matrix& A, const Matrix& Bu,
                  const Matrix& K, const Matrix& sigma_sqrt,
                  const Matrix& q_sqrt) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = Bu.cols();
  Matrix a = Matrix::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = A;
  a.topRightCorner(n, n) = K * sigma_sqrt;
  Matrix bu = Matrix::Zero(2 * n, m);
  bu.topRows(n) = Bu;
  Matrix bw = Matrix::Zero(2 * n, n);
  bw.bottomRows(n).setIdentity();
  Matrix c(n, 2 * n);
  c << q_sqrt, sigma_sqrt;
  s.A.push_back(std::move(a));
  s.Bu.push_back(std::move(bu));
  s.Bw.push_back(std::move(bw));
  s.Q.push_back(symmetrize(c.transpose() * c));
}

}  // namespace

SyntheticSystem build_synthetic(const LtvPlant& plant,
                                const WhiteningSchedule& schedule) {
  if (schedule.horizon() != plant.horizon()) {
    throw std::invalid_argument("whitening schedule does not match plant");
  }
  SyntheticSystem s;
  for (int t = 0; t < plant.horizon(); ++t) {
    append_stage(s, plant.A[t], plant.Bu[t], schedule.K[t],
                 schedule.SigmaSqrt[t], schedule.QSqrt[t]);
  }
  return s;
}

SyntheticSystem build_synthetic(const LtiPlant& plant,
                                const SpectralFactor& factor) {
  SyntheticSystem s;
  append_stage(s, plant.A, plant.Bu, factor.K, factor.SigmaSqrt,
               factor.QSqrt);
  return s;
}

WPrimeFilter::WPrimeFilter(const SpectralFactor& factor, const Matrix& Bw)
    : transition_{factor.Aw},
      input_{Bw},
      output_{factor.SigmaInvSqrt * factor.QSqrt},
      nu_(Vector::Zero(factor.Aw.rows())) {}

WPrimeFilter::WPrimeFilter(const WhiteningSchedule& schedule,
                           const LtvPlant& plant)
    : nu_(Vector::Zero(plant.state_dim())), finite_(true) {
  if (schedule.horizon() != plant.horizon()) {
    throw std::invalid_argument("whitening schedule does not match plant");
  }
  for (int t = 0; t < plant.horizon(); ++t) {
    transition_.push_back(plant.A[t] - schedule.K[t] * schedule.QSqrt[t]);
    input_.push_back(plant.Bw[t]);
    output_.push_back(schedule.SigmaInvSqrt[t] * schedule.QSqrt[t]);
  }
}

WPrimeFilter::WPrimeFilter(std::vector<Matrix> transition,
                           std::vector<Matrix> input,
                           std::vector<Matrix> output, bool finite)
    : transition_(std::move(transition)),
      input_(std::move(input)),
      output_(std::move(output)),
      finite_(finite) {
  if (transition_.empty() || input_.size() != transition_.size() ||
      output_.size() != transition_.size()) {
    throw std::invalid_argument("WPrimeFilter: inconsistent stage counts");
  }
  nu_ = Vector::Zero(transition_[0].rows());
}

int WPrimeFilter::output_dim() const {
  return output_.empty() ? 0 : static_cast<int>(output_[0].rows());
}

Vector WPrimeFilter::current() const {
  if (finite_ && t_ >= stages()) return Vector::Zero(output_dim());
  return output(t_) * nu_;
}

Vector WPrimeFilter::step(const Vector& w) {
  if (transition_.empty()) throw std::logic_error("WPrimeFilter is empty");
  if (finite_ && t_ >= stages()) {
    throw std::out_of_range("WPrimeFilter stepped past its horizon");
  }
  if (w.size() != input(t_).cols()) {
    throw std::invalid_argument("disturbance has wrong dimension");
  }
  nu_ = transition(t_) * nu_ + input(t_) * w;
  ++t_;
  return current();
}

void WPrimeFilter::retarget(const WPrimeFilter& model) {
  if (model.output_dim() != output_dim() && !transition_.empty()) {
    throw std::invalid_argument("retarget: filter dimensions differ");
  }
  transition_ = model.transition_;
  input_ = model.input_;
  output_ = model.output_;
  finite_ = model.finite_;
}

std::vector<Vector> WPrimeFilter::run(std::span<const Vector> w) {
  std::vector<Vector> out;
  out.reserve(w.size());
  for (const auto& wt : w) {
    out.push_back(current());
    step(wt);
  }
  return out;
}

}  // namespace compctl
