#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>
#include <vector>

#include "amlab/hamiltonian.hpp"

namespace amlab::testutil {

inline Eigen::VectorXd random_point(std::mt19937_64& rng, int dim, double r) {
  std::uniform_real_distribution<double> d(-r, r);
  Eigen::VectorXd p(dim);
  for (int i = 0; i < dim; ++i) p[i] = d(rng);
  return p;
}

// Independent finite-difference oracle for the analytic derivatives.
inline Eigen::VectorXd fd_gradient(const Hamiltonian& H,
                                   const Eigen::VectorXd& p, double h = 1e-5) {
  Eigen::VectorXd g(p.size());
  for (int i = 0; i < p.size(); ++i) {
    Eigen::VectorXd a = p, b = p;
    a[i] += h;
    b[i] -= h;
    g[i] = (H.value(a) - H.value(b)) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const Hamiltonian& H,
                                  const Eigen::VectorXd& p, double h = 1e-4) {
  const int n = static_cast<int>(p.size());
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd pp = p, pm = p, mp = p, mm = p;
      pp[i] += h;
      pp[j] += h;
      pm[i] += h;
      pm[j] -= h;
      mp[i] -= h;
      mp[j] += h;
      mm[i] -= h;
      mm[j] -= h;
      M(i, j) =
          (H.value(pp) - H.value(pm) - H.value(mp) + H.value(mm)) / (4 * h * h);
    }
  return M;
}

inline std::vector<HamiltonianPtr> sample_families() {
  std::vector<HamiltonianPtr> fams;
  fams.push_back(std::make_shared<QuadraticHamiltonian>(2, 1.0));
  fams.push_back(std::make_shared<QuadraticHamiltonian>(3, 2.5));
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.4, 0.4, 1.0;
  fams.push_back(std::make_shared<AnisotropicHamiltonian>(A));
  fams.push_back(std::make_shared<SeparablePowerHamiltonian>(2, 4.0, 2.0));
  fams.push_back(std::make_shared<SeparablePowerHamiltonian>(2, 1.5, 2.0));
  return fams;
}

}  // namespace amlab::testutil
