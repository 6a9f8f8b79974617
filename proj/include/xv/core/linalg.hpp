// Copyright 2026 The crossview Authors.
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

#include <cmath>
#include <vector>

namespace xv::linalg {

// Cyclic Jacobi eigendecomposition of a symmetric n x n matrix (row-major,
// doubles). On return `a` holds leftover off-diagonal residue, `eigvals[i]`
// the i-th eigenvalue and `eigvecs` the eigenvectors as columns:
// A = V diag(w) V^T with V[r*n+i] = component r of eigenvector i.
// Plenty for the small dense problems here (9x9 DLT normals, feature-space
// covariances); not meant for large n.
inline void jacobi_eigen_sym(int n, std::vector<double>& a,
                             std::vector<double>& eigvals,
                             std::vector<double>& eigvecs) {
  eigvals.assign(static_cast<size_t>(n), 0.0);
  eigvecs.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) eigvecs[static_cast<size_t>(i) * n + i] = 1.0;

  auto at = [&](int r, int c) -> double& { return a[static_cast<size_t>(r) * n + c]; };
  auto vt = [&](int r, int c) -> double& { return eigvecs[static_cast<size_t>(r) * n + c]; };

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    }
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double app = at(p, p);
        const double aqq = at(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        at(p, p) = app - t * apq;
        at(q, q) = aqq + t * apq;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = at(r, p);
            const double arq = at(r, q);
            at(r, p) = c * arp - s * arq;
            at(p, r) = at(r, p);
            at(r, q) = c * arq + s * arp;
            at(q, r) = at(r, q);
          }
          const double vrp = vt(r, p);
          const double vrq = vt(r, q);
          vt(r, p) = c * vrp - s * vrq;
          vt(r, q) = c * vrq + s * vrp;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) eigvals[static_cast<size_t>(i)] = at(i, i);
}

}  // namespace xv::linalg
