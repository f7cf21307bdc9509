#include "hardball/system.hpp"

#include "hardball/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace hardball {

SystemParams SystemParams::create(int balls, int dim, Real radius, Vec masses,
                                  ToleranceSet tol) {
  if (balls < 2) throw ContractViolation("SystemParams: need at least 2 balls");
  if (dim < 2) throw ContractViolation("SystemParams: torus dimension must be >= 2");
  if (masses.size() != balls)
    throw ContractViolation("SystemParams: mass list length != ball count");
  if ((masses.array() <= 0).any())
    throw ContractViolation("SystemParams: masses must be positive");
  if (!(radius > 0) || !(radius < 0.25))
    throw ContractViolation(
        "SystemParams: radius must lie in (0, 1/4) so that nearest-image "
        "contacts are unique and the table interior stays connected");
  if (!(tol.contact_tol > 0) || !(tol.singular_gap > 0) ||
      !(tol.grazing_cos > 0) || !(tol.conservation_tol > 0))
    throw ContractViolation("SystemParams: tolerances must be positive");

  SystemParams p;
  p.ball_count = balls;
  p.dim = dim;
  p.radius = radius;
  p.masses = std::move(masses);
  p.total_mass = p.masses.sum();
  p.min_mass = p.masses.minCoeff();
  p.reduced_dim = dim * (balls - 1);
  p.tol = tol;
  return p;
}

Real mass_inner(const SystemParams& p, const BallArray& u, const BallArray& w) {
  if (u.rows() != p.dim || u.cols() != p.ball_count || w.rows() != p.dim ||
      w.cols() != p.ball_count)
    throw ContractViolation("mass_inner: compound vector has wrong shape");
  return ((u.array() * w.array()).colwise().sum().transpose() * p.masses.array())
      .sum();
}

Real mass_norm(const SystemParams& p, const BallArray& u) {
  return std::sqrt(mass_inner(p, u, u));
}

Real phase_norm(const SystemParams& p, const BallArray& dq, const BallArray& dv) {
  return std::sqrt(mass_inner(p, dq, dq) + mass_inner(p, dv, dv));
}

BallArray remove_translation(const SystemParams& p, const BallArray& u) {
  Vec mean = (u * p.masses) / p.total_mass;  // mass-weighted mean per coordinate
  return u.colwise() - mean;
}

Vec mass_diagonal(const SystemParams& p) {
  Vec d(static_cast<Index>(p.dim) * p.ball_count);
  for (int i = 0; i < p.ball_count; ++i)
    d.segment(static_cast<Index>(i) * p.dim, p.dim).setConstant(p.masses[i]);
  return d;
}

Mat reduced_basis(const SystemParams& p) {
  const Index n = static_cast<Index>(p.dim) * p.ball_count;
  // Work in mass-weighted coordinates w_hat = sqrt(M) w, where the metric is
  // Euclidean; the translation constraint becomes sum_i sqrt(m_i) w_hat_i = 0.
  Mat constraint = Mat::Zero(p.dim, n);
  for (int i = 0; i < p.ball_count; ++i)
    for (int c = 0; c < p.dim; ++c)
      constraint(c, static_cast<Index>(i) * p.dim + c) = std::sqrt(p.masses[i]);

  Eigen::FullPivLU<Mat> lu(constraint);
  Mat kernel = lu.kernel();  // n x reduced_dim
  Eigen::HouseholderQR<Mat> qr(kernel);
  Mat q = qr.householderQ() * Mat::Identity(n, kernel.cols());

  Vec inv_sqrt_mass = mass_diagonal(p).cwiseSqrt().cwiseInverse();
  return inv_sqrt_mass.asDiagonal() * q;
}

}  // namespace hardball
