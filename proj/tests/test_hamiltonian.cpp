#include "amlab/hamiltonian.hpp"

#include <cmath>

#include "amlab/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace amlab;
using namespace amlab::testutil;

TEST_CASE("derivatives match finite differences per family") {
  std::mt19937_64 rng(17);
  for (const auto& H : sample_families()) {
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd p = random_point(rng, H->dim(), 1.8);
      const auto ev = H->eval(p);
      const Eigen::VectorXd gfd = fd_gradient(*H, p);
      const Eigen::MatrixXd hfd = fd_hessian(*H, p);
      const double gs = std::max(1.0, gfd.norm());
      const double hs = std::max(1.0, hfd.norm());
      CHECK((ev.gradient - gfd).norm() / gs < 1e-6);
      CHECK((ev.hessian - hfd).norm() / hs < 1e-5);
      CHECK(ev.hessian.isApprox(ev.hessian.transpose(), 1e-12));
    }
  }
}

TEST_CASE("(H1)(H2) hold on all sample families") {
  for (const auto& H : sample_families()) {
    const auto rep = check_H1_H2(*H, Eigen::VectorXd::Constant(H->dim(), -1.9),
                                 Eigen::VectorXd::Constant(H->dim(), 1.9), 200,
                                 3);
    CHECK(rep.pass);
    CHECK(rep.value_at_zero == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.min_hessian_eig >= H->lambda() - 1e-9);
    CHECK(rep.max_hessian_eig <= H->Lambda() + 1e-9);
  }
}

TEST_CASE("Legendre transform: stationarity, Fenchel, biconjugation") {
  std::mt19937_64 rng(5);
  for (const auto& H : sample_families()) {
    for (int k = 0; k < 30; ++k) {
      const Eigen::VectorXd q = random_point(rng, H->dim(), 1.2);
      const auto L = legendre(*H, q);
      // Stationarity of the maximizer.
      CHECK((H->gradient(L.maximizer) - q).norm() < 1e-9);
      // Fenchel: p.q - H(p) <= L(q) at arbitrary p.
      const Eigen::VectorXd p = random_point(rng, H->dim(), 1.5);
      CHECK(p.dot(q) - H->value(p) <= L.value + 1e-10);
      // Biconjugation: the inner sup for H**(p) sits at q* = grad H(p).
      const Eigen::VectorXd qs = H->gradient(p);
      const auto Ls = legendre(*H, qs);
      CHECK(std::abs(qs.dot(p) - Ls.value - H->value(p)) < 1e-6);
    }
  }
}

TEST_CASE("quadratic Legendre closed form") {
  QuadraticHamiltonian H(2, 2.0);  // L(q) = |q|^2 / (2c)
  Eigen::Vector2d q(0.6, -1.1);
  const auto L = legendre(H, q);
  CHECK(L.value == doctest::Approx(q.squaredNorm() / 4.0).epsilon(1e-12));
}

TEST_CASE("cone sandwich and quadratic closed form") {
  std::mt19937_64 rng(11);
  for (const auto& H : sample_families()) {
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd x = random_point(rng, H->dim(), 1.5);
      if (x.norm() < 1e-3) continue;
      const double sigma = 0.5 + 2.0 * (k % 4);
      const double C = cone(ConeSpec{sigma, H}, x);
      CHECK(C >= std::sqrt(2.0 * sigma / H->Lambda()) * x.norm() - 1e-9);
      CHECK(C <= std::sqrt(2.0 * sigma / H->lambda()) * x.norm() + 1e-9);
    }
  }
  QuadraticHamiltonian Q(2, 3.0);
  Eigen::Vector2d x(1.0, -2.0);
  CHECK(cone(ConeSpec{2.0, std::make_shared<QuadraticHamiltonian>(2, 3.0)}, x) ==
        doctest::Approx(std::sqrt(4.0 / 3.0) * x.norm()).epsilon(1e-10));
}

TEST_CASE("tabulated model reproduces its source near the center") {
  // Tabulate a quadratic and compare values/derivatives away from the edge.
  const int N = 41;
  std::vector<std::array<double, 3>> axes(2, {-3.0, 3.0, double(N)});
  std::vector<double> vals(N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double x = -3.0 + 6.0 * i / (N - 1), y = -3.0 + 6.0 * j / (N - 1);
      vals[i * N + j] = 0.5 * (x * x + y * y);
    }
  TabulatedHamiltonian T(axes, vals, 1.0, 1.0);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd p = random_point(rng, 2, 2.0);
    const auto ev = T.eval(p);
    CHECK(ev.value == doctest::Approx(0.5 * p.squaredNorm()).epsilon(1e-3));
    CHECK((ev.gradient - p).norm() < 1e-2);
  }
  Eigen::Vector2d outside(5.0, 0.0);
  CHECK_THROWS_AS(T.eval(outside), domain_error);
}
