#pragma once

#include <cmath>
#include <iostream>
#include <vector>

#include <Eigen/Dense>

#include "markstab/errors.hpp"
#include "markstab/graph.hpp"
#include "markstab/partition.hpp"

namespace markstab {

enum class ConstructorKind { kContinuousNormalized, kLinearized };

// Eigendecomposition of the symmetric normalized Laplacian
// L_sym = I - D^{-1/2} A D^{-1/2}, reusable across every scale of a sweep.
// The random-walk heat kernel follows by similarity transform:
//   exp(-t L_rw) = D^{-1/2} V e^{-t Lambda} V^T D^{1/2}.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns of V
  Eigen::VectorXd sqrt_deg;
  Eigen::VectorXd inv_sqrt_deg;
  int n = 0;
};

inline SpectralBasis spectral_basis(const Graph& g) {
  const int n = g.n();
  if (!is_connected(g))
    throw DisconnectedError("stability requires a connected graph");
  for (int v = 0; v < n; ++v)
    if (g.degree(v) <= 0)
      throw GraphError("node " + std::to_string(v) + " has nonpositive degree");
  if (n > 3000)
    std::cerr << "warning: dense eigendecomposition on n=" << n
              << " nodes will be slow\n";

  SpectralBasis basis;
  basis.n = n;
  basis.sqrt_deg.resize(n);
  basis.inv_sqrt_deg.resize(n);
  for (int v = 0; v < n; ++v) {
    basis.sqrt_deg[v] = std::sqrt(static_cast<double>(g.degree(v)));
    basis.inv_sqrt_deg[v] = 1.0 / basis.sqrt_deg[v];
  }
  Eigen::MatrixXd lsym = Eigen::MatrixXd::Identity(n, n);
  for (auto [u, v] : g.edges()) {
    double w = -basis.inv_sqrt_deg[u] * basis.inv_sqrt_deg[v];
    lsym(u, v) = w;
    lsym(v, u) = w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lsym);
  if (solver.info() != Eigen::Success)
    throw GraphError("eigendecomposition failed");
  basis.eigenvalues = solver.eigenvalues();
  basis.eigenvectors = solver.eigenvectors();
  return basis;
}

// exp(-t L_rw) with L_rw = I - D^{-1} A. Row-stochastic for every t >= 0.
inline Eigen::MatrixXd heat_kernel(const SpectralBasis& basis, double t) {
  Eigen::VectorXd decay = (-t * basis.eigenvalues.array()).exp();
  Eigen::MatrixXd core = basis.eigenvectors * decay.asDiagonal() *
                         basis.eigenvectors.transpose();
  return basis.inv_sqrt_deg.asDiagonal() * core *
         basis.sqrt_deg.asDiagonal();
}

inline Eigen::MatrixXd heat_kernel(const Graph& g, double t) {
  if (t < 0) throw GraphError("heat kernel needs t >= 0");
  return heat_kernel(spectral_basis(g), t);
}

// Quality matrix of the generalized stability objective at one scale:
//   B = sym( F(t) - pi pi^T ),   pi_i = d_i / 2m.
// Continuous-normalized kernel: F(t) = Pi exp(-t L_rw). Linearized:
// F(t) = (1 - t') Pi + t' A / 2m with t' = min(t, 1).
struct QualityMatrix {
  double t = 0.0;
  double log10_t = 0.0;
  Eigen::MatrixXd B;
};

inline QualityMatrix build_quality_matrix(ConstructorKind kind,
                                          const Graph& g, double t,
                                          const SpectralBasis* basis ) {
  if (t <= 0) throw GraphError("quality matrix needs t > 0");
  const int n = g.n();
  const double two_m = 2.0 * g.m();
  Eigen::VectorXd pi(n);
  for (int v = 0; v < n; ++v) pi[v] = g.degree(v) / two_m;

  Eigen::MatrixXd f;
  if (kind == ConstructorKind::kContinuousNormalized) {
    SpectralBasis local;
    if (!basis) {
      local = spectral_basis(g);
      basis = &local;
    }
    f = pi.asDiagonal() * heat_kernel(*basis, t);
  } else {
    double tp = std::min(t, 1.0);
    f = Eigen::MatrixXd::Zero(n, n);
    for (auto [u, v] : g.edges()) {
      f(u, v) += tp / two_m;
      f(v, u) += tp / two_m;
    }
    for (int v = 0; v < n; ++v) f(v, v) += (1.0 - tp) * pi[v];
  }
  QualityMatrix q;
  q.t = t;
  q.log10_t = std::log10(t);
  Eigen::MatrixXd b = f - pi * pi.transpose();
  q.B = 0.5 * (b + b.transpose());
  return q;
}

inline QualityMatrix build_quality_matrix(ConstructorKind kind,
                                          const Graph& g, double t) {
  return build_quality_matrix(kind, g, t, nullptr);
}

// Q_gen = sum over same-community pairs of B_ij (the trace form with the
// community indicator matrix).
inline double eval_q_gen(const QualityMatrix& q, const Partition& p) {
  if (p.n() != q.B.rows())
    throw DimensionError("partition size does not match quality matrix");
  double total = 0.0;
  auto comms = p.communities();
  for (const auto& comm : comms)
    for (int i : comm)
      for (int j : comm) total += q.B(i, j);
  return total;
}

}  // namespace markstab
