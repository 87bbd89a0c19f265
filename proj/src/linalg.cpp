// Copyright 2026 The LAM Acoustics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lam/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace lam {

HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian_part(c));
  const Eigen::Index m = c.rows();
  HermitianEigen out;
  out.values.resize(m);
  out.vectors.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    // Eigen returns ascending order.
    out.values(i) = solver.eigenvalues()(m - 1 - i);
    Eigen::VectorXcd v = solver.eigenvectors().col(m - 1 - i);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (std::abs(v(k)) > 1e-12) {
        v *= std::conj(v(k)) / std::abs(v(k));
        v(k) = std::abs(v(k));
        break;
      }
    }
    out.vectors.col(i) = v;
  }
  return out;
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& c) {
  return 0.5 * (c + c.adjoint());
}

Eigen::MatrixXcd project_psd(const Eigen::MatrixXcd& c) {
  const Eigen::MatrixXcd h = hermitian_part(c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  const Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXcd out =
      solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().adjoint();
  return hermitian_part(out);
}

}  // namespace lam
