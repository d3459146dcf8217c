#include <cmath>
#include <numbers>

#include "amlab/errors.hpp"
#include "amlab/hamiltonian.hpp"

namespace amlab {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// Normalized 1D bump (1 - t^2)^4 on [-1, 1]; integral is 256/315.
double bump(double t) {
  double s = 1.0 - t * t;
  return s <= 0.0 ? 0.0 : s * s * s * s * (315.0 / 256.0);
}

}  // namespace

std::shared_ptr<const MollifiedHamiltonian> MollifiedHamiltonian::make(
    HamiltonianPtr base, double gamma) {
  if (!base) throw input_error("mollify: missing base model");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw input_error("mollify: gamma must lie in (0, 1]");
  return std::shared_ptr<const MollifiedHamiltonian>(
      new MollifiedHamiltonian(std::move(base), gamma));
}

std::shared_ptr<const MollifiedHamiltonian> mollify(HamiltonianPtr model,
                                                    double gamma) {
  return MollifiedHamiltonian::make(std::move(model), gamma);
}

MollifiedHamiltonian::MollifiedHamiltonian(HamiltonianPtr base, double gamma)
    : base_(std::move(base)), gamma_(gamma) {
  const int n = base_->dim();
  // Convolving a quadratic with a symmetric mollifier only adds a constant,
  // which the normalization removes; those families are mollified exactly.
  if (dynamic_cast<const QuadraticHamiltonian*>(base_.get()) ||
      dynamic_cast<const AnisotropicHamiltonian*>(base_.get())) {
    mode_ = Mode::Exact;
    shift_ = Eigen::VectorXd::Zero(n);
    return;
  }
  mode_ = base_->separable() ? Mode::Separable : Mode::Tensor;
  order_ = std::max(8, static_cast<int>(std::ceil(4.0 / gamma_)));
  std::vector<double> gx, gw;
  gauss_legendre(order_, gx, gw);
  qnodes_.resize(order_);
  qweights_.resize(order_);
  double wsum = 0.0;
  for (int i = 0; i < order_; ++i) {
    qnodes_[i] = gamma_ * gx[i];
    qweights_[i] = gw[i] * bump(gx[i]);
    wsum += qweights_[i];
  }
  // Renormalize so the discrete mollifier has unit mass per axis.
  for (double& w : qweights_) w /= wsum;

  // p^gamma: argmin of the convolved function, by damped Newton.
  shift_ = Eigen::VectorXd::Zero(n);
  if (mode_ == Mode::Separable) {
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int it = 0; it < 100; ++it) {
        double g1 = 0.0, g2 = 0.0;
        for (int q = 0; q < order_; ++q) {
          auto [v, d1, d2] = base_->axis_eval(d, s - qnodes_[q]);
          (void)v;
          g1 += qweights_[q] * d1;
          g2 += qweights_[q] * d2;
        }
        double step = -g1 / g2;
        s += step;
        if (std::abs(step) < 1e-14) break;
        if (it == 99)
          throw numerical_error("mollify: axis argmin did not converge",
                                "axis=" + std::to_string(d));
      }
      shift_[d] = s;
      auto conv = axis_convolved(d, 0.0);  // uses shift_, so set offset after
      (void)conv;
    }
    offset_ = 0.0;
    double total = 0.0;
    for (int d = 0; d < n; ++d) {
      for (int q = 0; q < order_; ++q) {
        auto [v, d1, d2] = base_->axis_eval(d, shift_[d] - qnodes_[q]);
        (void)d1;
        (void)d2;
        total += qweights_[q] * v;
      }
    }
    offset_ = total;
  } else {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    shift_ = s;
    offset_ = 0.0;
    for (int it = 0; it < 100; ++it) {
      shift_ = s;
      auto ev = tensor_convolved(Eigen::VectorXd::Zero(n));
      Eigen::VectorXd step = ev.hessian.ldlt().solve(-ev.gradient);
      s += step;
      if (step.norm() < 1e-13) break;
      if (it == 99)
        throw numerical_error("mollify: argmin search did not converge",
                              "gradient=" + std::to_string(ev.gradient.norm()));
    }
    shift_ = s;
    offset_ = tensor_convolved(Eigen::VectorXd::Zero(n)).value;
  }
}

bool MollifiedHamiltonian::separable() const {
  return mode_ != Mode::Tensor && base_->separable();
}

// Convolved per-axis profile of H^gamma (shift and offset applied by caller
// for the value; derivative terms need no offset).
std::array<double, 3> MollifiedHamiltonian::axis_convolved(int axis,
                                                           double t) const {
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (int q = 0; q < order_; ++q) {
    auto e = base_->axis_eval(axis, t + shift_[axis] - qnodes_[q]);
    acc[0] += qweights_[q] * e[0];
    acc[1] += qweights_[q] * e[1];
    acc[2] += qweights_[q] * e[2];
  }
  return acc;
}

std::array<double, 3> MollifiedHamiltonian::axis_eval(int axis, double t) const {
  if (mode_ == Mode::Exact) return base_->axis_eval(axis, t);
  auto e = axis_convolved(axis, t);
  auto at0 = axis_convolved(axis, 0.0);
  e[0] -= at0[0];
  return e;
}

HamiltonianEval MollifiedHamiltonian::tensor_convolved(
    const Eigen::VectorXd& p) const {
  const int n = base_->dim();
  HamiltonianEval acc;
  acc.gradient = Eigen::VectorXd::Zero(n);
  acc.hessian = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> idx(n, 0);
  for (;;) {
    double w = 1.0;
    Eigen::VectorXd z(n);
    for (int d = 0; d < n; ++d) {
      w *= qweights_[idx[d]];
      z[d] = qnodes_[idx[d]];
    }
    auto e = base_->eval(p + shift_ - z);
    acc.value += w * e.value;
    acc.gradient += w * e.gradient;
    acc.hessian += w * e.hessian;
    int d = n - 1;
    for (; d >= 0; --d) {
      if (++idx[d] < order_) break;
      idx[d] = 0;
    }
    if (d < 0) break;
  }
  return acc;
}

HamiltonianEval MollifiedHamiltonian::eval(const Eigen::VectorXd& p) const {
  check_point(p);
  if (mode_ == Mode::Exact) return base_->eval(p);
  if (mode_ == Mode::Separable) {
    const int n = dim();
    HamiltonianEval out;
    out.gradient = Eigen::VectorXd::Zero(n);
    out.hessian = Eigen::MatrixXd::Zero(n, n);
    for (int d = 0; d < n; ++d) {
      auto e = axis_convolved(d, p[d]);
      out.value += e[0];
      out.gradient[d] = e[1];
      out.hessian(d, d) = e[2];
    }
    out.value -= offset_;
    return out;
  }
  auto out = tensor_convolved(p);
  out.value -= offset_;
  return out;
}

}  // namespace amlab
