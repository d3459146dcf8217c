#include "amlab/hamiltonian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "amlab/errors.hpp"

namespace amlab {

void Hamiltonian::check_point(const Eigen::VectorXd& p) const {
  if (p.size() != dim())
    throw input_error("Hamiltonian: point has dimension " +
                      std::to_string(p.size()) + ", expected " +
                      std::to_string(dim()));
  if (!p.allFinite()) throw input_error("Hamiltonian: non-finite point");
}

std::array<double, 3> Hamiltonian::axis_eval(int, double) const {
  throw input_error("Hamiltonian: family '" + family() + "' is not separable");
}

// ---------------------------------------------------------------- quadratic

QuadraticHamiltonian::QuadraticHamiltonian(int dim, double c)
    : dim_(dim), c_(c) {
  if (dim < 1) throw input_error("quadratic: dimension must be >= 1");
  if (!(c > 0.0)) throw input_error("quadratic: coefficient must be positive");
}

HamiltonianEval QuadraticHamiltonian::eval(const Eigen::VectorXd& p) const {
  check_point(p);
  HamiltonianEval out;
  out.value = 0.5 * c_ * p.squaredNorm();
  out.gradient = c_ * p;
  out.hessian = c_ * Eigen::MatrixXd::Identity(dim_, dim_);
  return out;
}

std::array<double, 3> QuadraticHamiltonian::axis_eval(int, double t) const {
  return {0.5 * c_ * t * t, c_ * t, c_};
}

// -------------------------------------------------------------- anisotropic

AnisotropicHamiltonian::AnisotropicHamiltonian(Eigen::MatrixXd A)
    : A_(std::move(A)) {
  if (A_.rows() != A_.cols() || A_.rows() < 1)
    throw input_error("anisotropic: matrix must be square");
  if (!A_.isApprox(A_.transpose(), 1e-12))
    throw input_error("anisotropic: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_);
  lambda_ = es.eigenvalues().minCoeff();
  Lambda_ = es.eigenvalues().maxCoeff();
  if (!(lambda_ > 0.0))
    throw input_error("anisotropic: matrix must be positive definite");
}

HamiltonianEval AnisotropicHamiltonian::eval(const Eigen::VectorXd& p) const {
  check_point(p);
  HamiltonianEval out;
  Eigen::VectorXd Ap = A_ * p;
  out.value = 0.5 * p.dot(Ap);
  out.gradient = std::move(Ap);
  out.hessian = A_;
  return out;
}

// ---------------------------------------------------------- separable power

namespace {
// f(t) = ((1+t^2)^{a/2} - 1)/a, f'(t) = t (1+t^2)^{a/2-1},
// f''(t) = (1+t^2)^{a/2-2} (1 + (a-1) t^2).
std::array<double, 3> power_profile(double alpha, double t) {
  const double s = 1.0 + t * t;
  const double v = (std::pow(s, 0.5 * alpha) - 1.0) / alpha;
  const double d1 = t * std::pow(s, 0.5 * alpha - 1.0);
  const double d2 = std::pow(s, 0.5 * alpha - 2.0) * (1.0 + (alpha - 1.0) * t * t);
  return {v, d1, d2};
}
}  // namespace

std::pair<double, double> SeparablePowerHamiltonian::second_derivative_range(
    double alpha, double r) {
  // f'' is even with f''(0) = 1; monotone in t^2 for alpha > 2 (increasing)
  // and alpha < 2 (eventually decreasing).  Scan the stationary point of
  // g(s) = (1+s)^{a/2-2}(1+(a-1)s), s = t^2 in [0, r^2]:
  // g'(s) = 0  at  s* = (a/2 - 1 + (a-1)(a/2-1)... solved numerically.
  auto f2 = [&](double t) { return power_profile(alpha, t)[2]; };
  double lo = f2(0.0), hi = lo;
  const int m = 4096;
  for (int i = 1; i <= m; ++i) {
    double v = f2(r * i / m);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

SeparablePowerHamiltonian::SeparablePowerHamiltonian(int dim, double alpha,
                                                     double box_radius)
    : dim_(dim), alpha_(alpha) {
  if (dim < 1) throw input_error("separable_power: dimension must be >= 1");
  if (!((alpha > 1.0 && alpha < 2.0) || alpha > 2.0))
    throw input_error("separable_power: alpha must lie in (1,2) or (2,inf)");
  auto [lo, hi] = second_derivative_range(alpha, box_radius);
  lambda_ = lo;
  Lambda_ = hi;
}

HamiltonianEval SeparablePowerHamiltonian::eval(const Eigen::VectorXd& p) const {
  check_point(p);
  HamiltonianEval out;
  out.gradient = Eigen::VectorXd::Zero(dim_);
  out.hessian = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    auto [v, d1, d2] = power_profile(alpha_, p[i]);
    out.value += v;
    out.gradient[i] = d1;
    out.hessian(i, i) = d2;
  }
  return out;
}

std::array<double, 3> SeparablePowerHamiltonian::axis_eval(int, double t) const {
  return power_profile(alpha_, t);
}

// ---------------------------------------------------------------- tabulated

namespace {
// Catmull-Rom weights for the four support points around the query, with
// first and second derivative weights.  u in [0,1].
void catmull_rom(double u, double h, double w[4], double dw[4], double ddw[4]) {
  const double u2 = u * u, u3 = u2 * u;
  w[0] = 0.5 * (-u3 + 2 * u2 - u);
  w[1] = 0.5 * (3 * u3 - 5 * u2 + 2);
  w[2] = 0.5 * (-3 * u3 + 4 * u2 + u);
  w[3] = 0.5 * (u3 - u2);
  dw[0] = 0.5 * (-3 * u2 + 4 * u - 1) / h;
  dw[1] = 0.5 * (9 * u2 - 10 * u) / h;
  dw[2] = 0.5 * (-9 * u2 + 8 * u + 1) / h;
  dw[3] = 0.5 * (3 * u2 - 2 * u) / h;
  ddw[0] = 0.5 * (-6 * u + 4) / (h * h);
  ddw[1] = 0.5 * (18 * u - 10) / (h * h);
  ddw[2] = 0.5 * (-18 * u + 8) / (h * h);
  ddw[3] = 0.5 * (6 * u - 2) / (h * h);
}
}  // namespace

TabulatedHamiltonian::TabulatedHamiltonian(
    std::vector<std::array<double, 3>> axes, std::vector<double> values,
    double lambda, double Lambda)
    : axes_(std::move(axes)), values_(std::move(values)), lambda_(lambda),
      Lambda_(Lambda) {
  if (axes_.empty() || axes_.size() > 3)
    throw input_error("tabulated: dimension must be in {1,2,3}");
  std::size_t n = 1;
  for (auto& a : axes_) {
    if (a[2] < 4) throw input_error("tabulated: need >= 4 nodes per axis");
    if (!(a[1] > a[0])) throw input_error("tabulated: degenerate axis");
    n *= static_cast<std::size_t>(a[2]);
  }
  if (values_.size() != n)
    throw input_error("tabulated: value count does not match axes");
  if (!(lambda_ > 0.0 && Lambda_ >= lambda_))
    throw input_error("tabulated: need 0 < lambda <= Lambda");
}

HamiltonianEval TabulatedHamiltonian::eval(const Eigen::VectorXd& p) const {
  check_point(p);
  const int n = dim();
  int base[3] = {0, 0, 0};
  double w[3][4], dw[3][4], ddw[3][4];
  for (int d = 0; d < n; ++d) {
    const auto& ax = axes_[d];
    const int count = static_cast<int>(ax[2]);
    const double h = (ax[1] - ax[0]) / (count - 1);
    const double s = (p[d] - ax[0]) / h;
    // Cubic support needs one node on each side of the containing cell.
    if (s < 1.0 || s > count - 2.0)
      throw domain_error("tabulated: query outside the table interior");
    int cell = std::min(static_cast<int>(std::floor(s)), count - 3);
    base[d] = cell - 1;
    catmull_rom(s - cell, h, w[d], dw[d], ddw[d]);
  }
  // Strides, last axis fastest.
  std::size_t stride[3] = {1, 1, 1};
  for (int d = n - 2; d >= 0; --d)
    stride[d] = stride[d + 1] * static_cast<std::size_t>(axes_[d + 1][2]);

  HamiltonianEval out;
  out.gradient = Eigen::VectorXd::Zero(n);
  out.hessian = Eigen::MatrixXd::Zero(n, n);
  int span[3] = {n > 0 ? 4 : 1, n > 1 ? 4 : 1, n > 2 ? 4 : 1};
  for (int i = 0; i < span[0]; ++i)
    for (int j = 0; j < span[1]; ++j)
      for (int k = 0; k < span[2]; ++k) {
        std::size_t idx = (base[0] + i) * stride[0];
        if (n > 1) idx += (base[1] + j) * stride[1];
        if (n > 2) idx += (base[2] + k) * stride[2];
        const double val = values_[idx];
        const double wt[3] = {w[0][i], n > 1 ? w[1][j] : 1.0,
                              n > 2 ? w[2][k] : 1.0};
        const double dwt[3] = {dw[0][i], n > 1 ? dw[1][j] : 0.0,
                               n > 2 ? dw[2][k] : 0.0};
        const double ddwt[3] = {ddw[0][i], n > 1 ? ddw[1][j] : 0.0,
                                n > 2 ? ddw[2][k] : 0.0};
        out.value += val * wt[0] * wt[1] * wt[2];
        for (int a = 0; a < n; ++a) {
          double g = val;
          for (int b = 0; b < n; ++b) g *= (b == a) ? dwt[b] : wt[b];
          out.gradient[a] += g;
          for (int b = a; b < n; ++b) {
            double hcontrib = val;
            for (int c = 0; c < n; ++c) {
              if (c == a && c == b)
                hcontrib *= ddwt[c];
              else if (c == a || c == b)
                hcontrib *= dwt[c];
              else
                hcontrib *= wt[c];
            }
            out.hessian(a, b) += hcontrib;
          }
        }
      }
  out.hessian = out.hessian.selfadjointView<Eigen::Upper>();
  return out;
}

// ----------------------------------------------------------------- legendre

LegendreResult legendre(const Hamiltonian& model, const Eigen::VectorXd& q) {
  if (q.size() != model.dim()) throw input_error("legendre: dimension mismatch");
  if (!q.allFinite()) throw input_error("legendre: non-finite q");
  if (!(model.lambda() > 0.0))
    throw input_error("legendre: model not strongly convex");

  // Newton on grad H(p) = q; strong convexity makes the damped iteration
  // globally convergent.
  Eigen::VectorXd p = q / model.lambda();
  auto ev = model.eval(p);
  double res = (ev.gradient - q).norm();
  for (int it = 0; it < 100 && res > 1e-12; ++it) {
    Eigen::VectorXd step = ev.hessian.ldlt().solve(q - ev.gradient);
    double t = 1.0;
    for (int back = 0; back < 40; ++back) {
      Eigen::VectorXd trial = p + t * step;
      auto trial_ev = model.eval(trial);
      double trial_res = (trial_ev.gradient - q).norm();
      if (trial_res < res || trial_res < 1e-12) {
        p = std::move(trial);
        ev = std::move(trial_ev);
        res = trial_res;
        break;
      }
      t *= 0.5;
      if (back == 39)
        throw numerical_error("legendre: Newton failed to reduce residual",
                              "residual=" + std::to_string(res));
    }
  }
  if (res > 1e-8)
    throw numerical_error("legendre: Newton did not converge",
                          "residual=" + std::to_string(res));
  LegendreResult out;
  out.maximizer = p;
  out.value = p.dot(q) - ev.value;
  return out;
}

// --------------------------------------------------------------------- cone

double cone(const ConeSpec& spec, const Eigen::VectorXd& x) {
  if (!spec.model) throw input_error("cone: missing model");
  const Hamiltonian& H = *spec.model;
  if (x.size() != H.dim()) throw input_error("cone: dimension mismatch");
  if (!(spec.sigma > 0.0)) throw input_error("cone: sigma must be positive");
  const double xn = x.norm();
  if (xn == 0.0) return 0.0;

  // Stationarity: x = t grad H(p), H(p) = sigma.  Newton on (p, t).
  const int n = H.dim();
  Eigen::VectorXd p = std::sqrt(2.0 * spec.sigma / H.Lambda()) * x / xn;
  auto ev = H.eval(p);
  double t = xn / std::max(ev.gradient.norm(), 1e-300);

  auto residual = [&](const HamiltonianEval& e, double tt) {
    Eigen::VectorXd r(n + 1);
    r.head(n) = tt * e.gradient - x;
    r[n] = e.value - spec.sigma;
    return r;
  };
  Eigen::VectorXd r = residual(ev, t);
  for (int it = 0; it < 100 && r.norm() > 1e-12; ++it) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 1, n + 1);
    J.topLeftCorner(n, n) = t * ev.hessian;
    J.topRightCorner(n, 1) = ev.gradient;
    J.bottomLeftCorner(1, n) = ev.gradient.transpose();
    Eigen::VectorXd step = J.fullPivLu().solve(-r);
    double damp = 1.0;
    for (int back = 0; back < 40; ++back) {
      Eigen::VectorXd ptrial = p + damp * step.head(n);
      double ttrial = t + damp * step[n];
      auto etrial = H.eval(ptrial);
      Eigen::VectorXd rtrial = residual(etrial, ttrial);
      if (rtrial.norm() < r.norm() || rtrial.norm() < 1e-12) {
        p = std::move(ptrial);
        t = ttrial;
        ev = std::move(etrial);
        r = std::move(rtrial);
        break;
      }
      damp *= 0.5;
      if (back == 39)
        throw numerical_error("cone: constrained Newton stalled",
                              "residual=" + std::to_string(r.norm()));
    }
  }
  if (r.norm() > 1e-8)
    throw numerical_error("cone: constrained Newton did not converge",
                          "residual=" + std::to_string(r.norm()));
  return p.dot(x);
}

// -------------------------------------------------------------- H1/H2 check

H1H2Report check_H1_H2(const Hamiltonian& model, const Eigen::VectorXd& box_lo,
                       const Eigen::VectorXd& box_hi, int sample_count,
                       unsigned long long seed, double tol) {
  if (box_lo.size() != model.dim() || box_hi.size() != model.dim())
    throw input_error("check_H1_H2: box dimension mismatch");
  H1H2Report rep;
  rep.tolerance = tol;
  rep.value_at_zero = model.value(Eigen::VectorXd::Zero(model.dim()));
  rep.min_sampled_value = rep.value_at_zero;
  rep.min_hessian_eig = std::numeric_limits<double>::infinity();
  rep.max_hessian_eig = -std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < sample_count; ++s) {
    Eigen::VectorXd p(model.dim());
    for (int d = 0; d < model.dim(); ++d)
      p[d] = box_lo[d] + (box_hi[d] - box_lo[d]) * unit(rng);
    auto ev = model.eval(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ev.hessian);
    rep.min_hessian_eig = std::min(rep.min_hessian_eig, es.eigenvalues().minCoeff());
    rep.max_hessian_eig = std::max(rep.max_hessian_eig, es.eigenvalues().maxCoeff());
    rep.min_sampled_value = std::min(rep.min_sampled_value, ev.value);
    rep.max_strong_convexity_defect =
        std::max(rep.max_strong_convexity_defect,
                 0.5 * model.lambda() * p.squaredNorm() - ev.value);
  }
  rep.pass = rep.min_hessian_eig >= model.lambda() - tol &&
             rep.max_hessian_eig <= model.Lambda() + tol &&
             std::abs(rep.value_at_zero) <= tol &&
             rep.min_sampled_value >= -tol &&
             rep.max_strong_convexity_defect <= tol;
  return rep;
}

}  // namespace amlab
