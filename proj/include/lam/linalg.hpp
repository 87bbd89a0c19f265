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

#pragma once

#include <Eigen/Core>

namespace lam {

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
/// Each eigenvector is phase-normalized so its first nonzero component is
/// real and positive.
struct HermitianEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  // columns
};

HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& c);

/// (C + C^H) / 2
Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& c);

/// Symmetrizes, then clips negative eigenvalues to zero.
Eigen::MatrixXcd project_psd(const Eigen::MatrixXcd& c);

}  // namespace lam
