#pragma once

#include <Eigen/Dense>
#include <complex>

namespace shmvdr::linalg {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Default diagonal loading, relative to the mean diagonal of the PSD.
inline constexpr double kDefaultLoading = 1e-9;

bool is_hermitian(const CMat& a, double rel_tol = 1e-12);
bool is_positive_semidefinite(const CMat& a, double tol_scale = 1e-10);

// Solves (A + loading * (trace(A)/dim) * I) X = B for Hermitian A via LDLT.
// Throws NotFactorizable when the loaded matrix is numerically singular.
CMat loaded_hermitian_solve(const CMat& a, const CMat& b, double loading);

// One beamformer per output coefficient; column nm of W is w_nm, so the
// estimated coefficient vector is W^H x.
struct BeamformerBank {
  CMat W;
};

// Closed-form multi-output MVDR: w_nm = R^{-1} h (h^H R^{-1} h)^{-1} conj(h_nm).
// The stacked L^2-sized system is block-diagonal with identical blocks, so the
// solution decouples per column and the big matrices are never formed.
// Throws DegenerateConstraint when h^H R^{-1} h is numerically zero.
BeamformerBank mvdr_multi_output(const CMat& r, const CVec& h, double loading = kDefaultLoading);

// Single-output MVDR: w = R^{-1} a / (a^H R^{-1} a), distortionless toward a.
CVec mvdr_single_output(const CMat& r, const CVec& a, double loading = kDefaultLoading);

}  // namespace shmvdr::linalg
