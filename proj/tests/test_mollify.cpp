#include <cmath>

#include "amlab/errors.hpp"
#include "amlab/hamiltonian.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace amlab;
using namespace amlab::testutil;

TEST_CASE("quadratic families mollify exactly") {
  std::mt19937_64 rng(23);
  const auto quad = std::make_shared<QuadraticHamiltonian>(2, 1.7);
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.3, 0.3, 1.2;
  const auto aniso = std::make_shared<AnisotropicHamiltonian>(A);
  for (const HamiltonianPtr& base : {HamiltonianPtr(quad), HamiltonianPtr(aniso)}) {
    const auto mg = mollify(base, 0.1);
    for (int k = 0; k < 200; ++k) {
      const Eigen::VectorXd p = random_point(rng, 2, 2.0);
      CHECK(std::abs(mg->value(p) - base->value(p)) <= 1e-12);
    }
    CHECK(mg->value(Eigen::VectorXd::Zero(2)) == 0.0);
  }
}

TEST_CASE("separable-power mollification: normalization and convergence") {
  const auto base = std::make_shared<SeparablePowerHamiltonian>(2, 4.0, 2.0);
  std::mt19937_64 rng(31);
  std::vector<double> sup_dist;
  for (double gamma : {0.2, 0.1, 0.05}) {
    const auto mg = mollify(base, gamma);
    CHECK(std::abs(mg->value(Eigen::VectorXd::Zero(2))) <= 1e-14);
    CHECK(mg->gradient(Eigen::VectorXd::Zero(2)).norm() <= 1e-10);
    double sup = 0.0;
    for (int k = 0; k < 400; ++k) {
      const Eigen::VectorXd p = random_point(rng, 2, 1.8);
      sup = std::max(sup, std::abs(mg->value(p) - base->value(p)));
    }
    sup_dist.push_back(sup);
  }
  CHECK(sup_dist[1] < sup_dist[0]);
  CHECK(sup_dist[2] < sup_dist[1]);
}

TEST_CASE("mollified derivatives match finite differences") {
  std::mt19937_64 rng(41);
  const auto mg =
      mollify(std::make_shared<SeparablePowerHamiltonian>(2, 1.5, 2.0), 0.15);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd p = random_point(rng, 2, 1.5);
    const auto ev = mg->eval(p);
    CHECK((ev.gradient - fd_gradient(*mg, p)).norm() < 1e-6);
    CHECK((ev.hessian - fd_hessian(*mg, p)).norm() < 1e-4);
  }
}

TEST_CASE("1D axis convolution matches an independent trapezoid oracle") {
  const double gamma = 0.2;
  const auto base = std::make_shared<SeparablePowerHamiltonian>(1, 4.0, 2.0);
  const auto mg = mollify(base, gamma);

  // Trapezoid convolution of f with the normalized bump on [-gamma, gamma],
  // entirely independent of the Gauss-Legendre path.
  const int M = 4000;
  auto bump = [](double t) {
    const double s = 1.0 - t * t;
    return s <= 0.0 ? 0.0 : s * s * s * s;
  };
  auto conv = [&](double center) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= M; ++i) {
      const double z = -gamma + 2.0 * gamma * i / M;
      const double w = (i == 0 || i == M) ? 0.5 : 1.0;
      const double eta = bump(z / gamma);
      num += w * eta * base->axis_eval(0, center - z)[0];
      den += w * eta;
    }
    return num / den;
  };
  // The implementation recentres: H^g(t) = (eta*f)(t + shift) - (eta*f)(shift).
  const double shift = mg->shift()[0];
  for (double t : {-1.5, -0.7, -0.2, 0.0, 0.4, 1.1, 1.7}) {
    const double oracle = conv(t + shift) - conv(shift);
    Eigen::VectorXd p(1);
    p << t;
    CHECK(mg->value(p) == doctest::Approx(oracle).epsilon(1e-7));
  }
}

TEST_CASE("tensor-product path agrees with the separable path") {
  // A tabulated copy of a separable model is not detected as separable, so
  // it takes the tensor quadrature route; both must agree.
  const auto base = std::make_shared<SeparablePowerHamiltonian>(2, 4.0, 3.5);
  const int N = 121;
  std::vector<std::array<double, 3>> axes(2, {-3.5, 3.5, double(N)});
  std::vector<double> vals(N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Eigen::Vector2d p(-3.5 + 7.0 * i / (N - 1), -3.5 + 7.0 * j / (N - 1));
      vals[i * N + j] = base->value(p);
    }
  const auto tab = std::make_shared<TabulatedHamiltonian>(
      axes, vals, base->lambda(), base->Lambda());
  const auto m_sep = mollify(base, 0.2);
  const auto m_tab = mollify(std::static_pointer_cast<const Hamiltonian>(tab), 0.2);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 40; ++k) {
    const Eigen::VectorXd p = random_point(rng, 2, 1.5);
    CHECK(m_tab->value(p) == doctest::Approx(m_sep->value(p)).epsilon(1e-4));
  }
}

TEST_CASE("gamma bounds are enforced") {
  const auto base = std::make_shared<QuadraticHamiltonian>(2, 1.0);
  CHECK_THROWS_AS(mollify(base, 0.0), input_error);
  CHECK_THROWS_AS(mollify(base, 1.5), input_error);
}
