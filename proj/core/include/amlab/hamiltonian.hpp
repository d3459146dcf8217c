#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>
#include <vector>

namespace amlab {

struct HamiltonianEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Convex coercive Hamiltonian H(p) with H(0) = min H = 0 and strong
// convexity/concavity constants 0 < lambda <= Lambda.  All derivatives are
// analytic closed forms of the family, never finite differences.
// Implementations are immutable after construction and safe for concurrent
// calls.
class Hamiltonian {
 public:
  virtual ~Hamiltonian() = default;

  virtual int dim() const = 0;
  virtual double lambda() const = 0;
  virtual double Lambda() const = 0;
  virtual std::string family() const = 0;

  virtual HamiltonianEval eval(const Eigen::VectorXd& p) const = 0;

  double value(const Eigen::VectorXd& p) const { return eval(p).value; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& p) const {
    return eval(p).gradient;
  }

  // Separable families (H(p) = sum_i f(p_i)) expose the per-axis 1D profile
  // so mollification can convolve axis by axis.
  virtual bool separable() const { return false; }
  // Returns {f(t), f'(t), f''(t)} for the given axis.
  virtual std::array<double, 3> axis_eval(int axis, double t) const;

 protected:
  void check_point(const Eigen::VectorXd& p) const;
};

using HamiltonianPtr = std::shared_ptr<const Hamiltonian>;

// H(p) = (c/2)|p|^2 with lambda = Lambda = c.
class QuadraticHamiltonian final : public Hamiltonian {
 public:
  QuadraticHamiltonian(int dim, double c = 1.0);
  int dim() const override { return dim_; }
  double lambda() const override { return c_; }
  double Lambda() const override { return c_; }
  std::string family() const override { return "quadratic"; }
  HamiltonianEval eval(const Eigen::VectorXd& p) const override;
  bool separable() const override { return true; }
  std::array<double, 3> axis_eval(int axis, double t) const override;

 private:
  int dim_;
  double c_;
};

// H(p) = (1/2) <A p, p> with SPD A; lambda/Lambda are the extreme
// eigenvalues of A.
class AnisotropicHamiltonian final : public Hamiltonian {
 public:
  explicit AnisotropicHamiltonian(Eigen::MatrixXd A);
  int dim() const override { return static_cast<int>(A_.rows()); }
  double lambda() const override { return lambda_; }
  double Lambda() const override { return Lambda_; }
  std::string family() const override { return "anisotropic"; }
  HamiltonianEval eval(const Eigen::VectorXd& p) const override;
  const Eigen::MatrixXd& matrix() const { return A_; }

 private:
  Eigen::MatrixXd A_;
  double lambda_, Lambda_;
};

// H(p) = sum_i ((1 + p_i^2)^{alpha/2} - 1)/alpha with alpha in (1,2) or
// (2,inf).  The convexity constants are valid on a bounded box only; the
// caller supplies the box radius and we take the tight per-axis second
// derivative range there.
class SeparablePowerHamiltonian final : public Hamiltonian {
 public:
  SeparablePowerHamiltonian(int dim, double alpha, double box_radius = 2.0);
  int dim() const override { return dim_; }
  double lambda() const override { return lambda_; }
  double Lambda() const override { return Lambda_; }
  std::string family() const override { return "separable_power"; }
  HamiltonianEval eval(const Eigen::VectorXd& p) const override;
  bool separable() const override { return true; }
  std::array<double, 3> axis_eval(int axis, double t) const override;
  double alpha() const { return alpha_; }

  // Exact range of f''(t) = (1+t^2)^{alpha/2-2} (1 + (alpha-1) t^2) on
  // |t| <= r.
  static std::pair<double, double> second_derivative_range(double alpha,
                                                           double r);

 private:
  int dim_;
  double alpha_;
  double lambda_, Lambda_;
};

// Values tabulated on a uniform per-axis grid; evaluated by tensor cubic
// (Catmull-Rom) interpolation with analytic derivatives of the interpolant.
// Queries outside the table are a domain error, never extrapolated.
class TabulatedHamiltonian final : public Hamiltonian {
 public:
  // axes[i] = {lo, hi, count}; values in row-major order, last axis fastest.
  TabulatedHamiltonian(std::vector<std::array<double, 3>> axes,
                       std::vector<double> values, double lambda,
                       double Lambda);
  int dim() const override { return static_cast<int>(axes_.size()); }
  double lambda() const override { return lambda_; }
  double Lambda() const override { return Lambda_; }
  std::string family() const override { return "tabulated"; }
  HamiltonianEval eval(const Eigen::VectorXd& p) const override;

 private:
  std::vector<std::array<double, 3>> axes_;  // lo, hi, count
  std::vector<double> values_;
  double lambda_, Lambda_;
};

// H^gamma: mollification of a base model with the tensor-product bump
// c_g (1 - (z/gamma)^2)^4, recentred so H^gamma(0) = min H^gamma = 0.
// Quadratic families are mollified exactly (the convolution only adds a
// constant); separable families convolve axis by axis; anything else goes
// through tensor-product Gauss-Legendre quadrature.
class MollifiedHamiltonian final : public Hamiltonian {
 public:
  static std::shared_ptr<const MollifiedHamiltonian> make(HamiltonianPtr base,
                                                          double gamma);

  int dim() const override { return base_->dim(); }
  double lambda() const override { return base_->lambda(); }
  double Lambda() const override { return base_->Lambda(); }
  std::string family() const override { return base_->family() + "+mollified"; }
  HamiltonianEval eval(const Eigen::VectorXd& p) const override;
  bool separable() const override;
  std::array<double, 3> axis_eval(int axis, double t) const override;

  double gamma() const { return gamma_; }
  const Eigen::VectorXd& shift() const { return shift_; }
  double min_offset() const { return offset_; }
  int quadrature_order() const { return order_; }
  const HamiltonianPtr& base() const { return base_; }

 private:
  enum class Mode { Exact, Separable, Tensor };
  MollifiedHamiltonian(HamiltonianPtr base, double gamma);

  std::array<double, 3> axis_convolved(int axis, double t) const;
  HamiltonianEval tensor_convolved(const Eigen::VectorXd& p) const;

  HamiltonianPtr base_;
  double gamma_;
  Mode mode_;
  int order_ = 0;
  std::vector<double> qnodes_, qweights_;  // on [-gamma, gamma], bump included
  Eigen::VectorXd shift_;                  // p^gamma, argmin of the convolution
  double offset_ = 0.0;                    // subtracted so H^gamma(0) = 0
};

// mollify(model, gamma): gamma in (0, 1].
std::shared_ptr<const MollifiedHamiltonian> mollify(HamiltonianPtr model,
                                                    double gamma);

struct LegendreResult {
  double value = 0.0;        // L(q) = sup_p { p.q - H(p) }
  Eigen::VectorXd maximizer;  // the unique argmax p*
};

// Legendre-Fenchel transform by damped Newton on the strongly concave
// objective.  Requires lambda > 0.
LegendreResult legendre(const Hamiltonian& model, const Eigen::VectorXd& q);

struct ConeSpec {
  double sigma = 1.0;
  HamiltonianPtr model;
};

// Generalized cone C^H_sigma(x) = max_{H(p)=sigma} p.x, solved as a
// Lagrange/Newton system on the level set.  Always lies between
// sqrt(2 sigma/Lambda)|x| and sqrt(2 sigma/lambda)|x|.
double cone(const ConeSpec& spec, const Eigen::VectorXd& x);

struct H1H2Report {
  double min_hessian_eig = 0.0;
  double max_hessian_eig = 0.0;
  double value_at_zero = 0.0;
  double min_sampled_value = 0.0;
  double max_strong_convexity_defect = 0.0;  // max over samples of
                                             // (lambda/2)|p|^2 - H(p)
  bool pass = false;
  double tolerance = 1e-6;
};

// Sampled verification of (H1)&(H2) on a box.
H1H2Report check_H1_H2(const Hamiltonian& model, const Eigen::VectorXd& box_lo,
                       const Eigen::VectorXd& box_hi, int sample_count,
                       unsigned long long seed = 0, double tol = 1e-6);

}  // namespace amlab
