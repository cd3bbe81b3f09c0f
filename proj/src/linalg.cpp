#include "linalg.hpp"

#include <Eigen/Eigenvalues>

#include "error.hpp"

namespace shmvdr::linalg {

bool is_hermitian(const CMat& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_positive_semidefinite(const CMat& a, double tol_scale) {
  if (!is_hermitian(a)) return false;
  Eigen::SelfAdjointEigenSolver<CMat> es(a, Eigen::EigenvaluesOnly);
  const double floor = -tol_scale * std::abs(a.trace().real()) / static_cast<double>(a.rows());
  return es.eigenvalues().minCoeff() >= floor;
}

namespace {

struct LoadedFactor {
  Eigen::LDLT<CMat> ldlt;
  double inv_norm_estimate;  // ~ ||R^{-1}||_2, from the smallest pivot
};

LoadedFactor loaded_factorization(const CMat& a, double loading) {
  if (a.rows() != a.cols())
    throw Error(ErrorCode::InvalidArgument, "PSD matrix must be square");
  if (loading < 0.0)
    throw Error(ErrorCode::InvalidArgument, "loading must be nonnegative");
  CMat loaded = a;
  if (loading > 0.0) {
    const double mean_diag = a.trace().real() / static_cast<double>(a.rows());
    loaded.diagonal().array() += loading * mean_diag;
  }
  LoadedFactor f{Eigen::LDLT<CMat>(loaded), 0.0};
  const Eigen::VectorXd d = f.ldlt.vectorD().real();
  const double dmin = d.minCoeff();
  const double dmax = d.maxCoeff();
  if (f.ldlt.info() != Eigen::Success || !(dmin > 0.0) || dmin < dmax * 1e-16)
    throw Error(ErrorCode::NotFactorizable, "loaded PSD is numerically singular; increase loading");
  f.inv_norm_estimate = 1.0 / dmin;
  return f;
}

}  // namespace

CMat loaded_hermitian_solve(const CMat& a, const CMat& b, double loading) {
  if (a.rows() != b.rows())
    throw Error(ErrorCode::InvalidArgument, "solve dimensions do not conform");
  return loaded_factorization(a, loading).ldlt.solve(b);
}

BeamformerBank mvdr_multi_output(const CMat& r, const CVec& h, double loading) {
  const auto L = r.rows();
  if (h.size() != L)
    throw Error(ErrorCode::InvalidArgument, "ReHC vector does not match PSD dimension");
  auto f = loaded_factorization(r, loading);
  const CVec rih = f.ldlt.solve(h);
  const double denom = std::real(h.dot(rih));  // h^H R^{-1} h, real for Hermitian R
  if (!(denom > 1e-14 * h.squaredNorm() * f.inv_norm_estimate))
    throw Error(ErrorCode::DegenerateConstraint, "h^H R^{-1} h is numerically zero");
  const CVec u = rih / denom;
  BeamformerBank bank;
  bank.W = u * h.adjoint();  // column nm = u * conj(h_nm)
  return bank;
}

CVec mvdr_single_output(const CMat& r, const CVec& a, double loading) {
  if (a.size() != r.rows())
    throw Error(ErrorCode::InvalidArgument, "steering vector does not match PSD dimension");
  if (a.norm() == 0.0)
    throw Error(ErrorCode::InvalidArgument, "steering vector must be nonzero");
  auto f = loaded_factorization(r, loading);
  const CVec ria = f.ldlt.solve(a);
  const double denom = std::real(a.dot(ria));
  if (!(denom > 1e-14 * a.squaredNorm() * f.inv_norm_estimate))
    throw Error(ErrorCode::DegenerateConstraint, "a^H R^{-1} a is numerically zero");
  return ria / denom;
}

}  // namespace shmvdr::linalg
