#pragma once

#include "pcnls/domain_core.hpp"
#include "pcnls/grid.hpp"
#include "pcnls/integrator.hpp"

#include <utility>
#include <vector>

namespace pcnls
{

/// Least-squares fit of y ~ C x^p on log-log data.
struct FitResult
{
  double exponent = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  std::size_t samples = 0;
};

FitResult fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

/// L = -Im(conj(v) Lap v) / |v|.  Throws when min |v| < 1e-12.
std::vector<double> compute_L(const Field& v);

/// Per snapshot, the largest relative defect of the exact magnitude identity
///   |v|^alpha = |v0|^alpha / (1 + f + c |v0|^alpha [(1-bt)^{-(2-N alpha)/2} - 1]),
///   c = 2 alpha |Re lambda| / ((2 - N alpha) b),
/// over the inner half-domain.  Requires b > 0 and Re lambda < 0.
std::vector<double> magnitude_identity_residual(const Trajectory& traj);

/// Limits of the decomposition v = omega psi e^{i theta}.
struct ProfileSet
{
  ModelParams params;
  Field v0;
  std::vector<double> f0;
  Field omega0;
  std::vector<double> v0_mag_alpha;
  double final_distance = 1.0;
  /// 1 - bt at the first snapshot (below 1 for runs resumed from a checkpoint)
  double initial_distance = 1.0;
  /// ||<x>^n (omega(t) - omega0)||_inf on the inner half-domain per snapshot.
  std::vector<double> omega_drift;

  /// psi at distance r = 1 - bt for node i.
  double psi(double distance, std::size_t i) const;
  /// theta = (Im lambda / Re lambda) log psi.
  double theta(double distance, std::size_t i) const;
  /// omega0 psi e^{i theta} at distance r.
  Field profile_field(double distance) const;
  /// omega(t) = v e^{-i theta} / psi.
  Field omega(const Field& v) const;
};

/// Takes f0 and omega0 at the final snapshot.  Requires 1 - bt <= 1e-2 at
/// the end of the run and 1 + f0 > 0 everywhere.
ProfileSet build_profiles(const Trajectory& traj, const IndexSet& idx);

struct ProfileErrorResult
{
  std::vector<double> distances;
  std::vector<double> errors;
  FitResult fit;
};

/// e(t) = sup over the inner half-domain of <x>^n |v - omega0 psi e^{i theta}|,
/// fitted against 1 - bt over [r_lo, r_hi] (final snapshot excluded).
ProfileErrorResult profile_error(const Trajectory& traj, const ProfileSet& prof, const IndexSet& idx,
                                 double r_lo = 2e-3, double r_hi = 1e-2);

struct SupLimitResult
{
  double target = 0.0;
  double final_deviation = 0.0;
  std::vector<double> distances;
  std::vector<double> deviations;
  /// deviation ~ C r^p over the last decade; p > 0 means decreasing as r -> 0
  FitResult trend;
  bool decreasing = false;
};

/// Deviation of (1-bt)^{-(2-N alpha)/2} ||v||_inf^alpha from b(2-N alpha)/(2 alpha |Re lambda|).
SupLimitResult sup_limit_check(const Trajectory& traj);

struct L2RateResult
{
  double target_exponent = 0.0;
  FitResult solver;
  FitResult profile;
};

/// Fits ||v||_2 and the closed-form ||omega0 psi||_2 against 1 - bt over the
/// last decade of the run.
L2RateResult l2_rate_check(const Trajectory& traj, const ProfileSet& prof, const IndexSet& idx);

/// (1/alpha - N/2)(1 - N/(2n)).
double l2_target_exponent(const ModelParams& p, const IndexSet& idx);

struct ProfileAlgebraResult
{
  /// max over snapshots of | |omega| psi - |v| | / ||v||_inf
  double modulus_defect = 0.0;
  /// max wrapped angle between omega e^{i theta} and v
  double phase_defect = 0.0;
  /// max over the inner half-domain of | |omega0|^alpha (1 + f0) - |v0|^alpha | / |v0|^alpha
  double omega0_defect = 0.0;
  double f0_sup = 0.0;
  /// the (2/3, 2) sandwich is asserted only when ||f0||_inf <= 1/2
  bool sandwich_applicable = false;
  bool sandwich_holds = false;
};

ProfileAlgebraResult profile_algebra(const Trajectory& traj, const ProfileSet& prof);

/// Psi(t, y) of the physical-space profile at node i of the profile grid.
double physical_psi(const ProfileSet& prof, double t, std::size_t i);

/// z(t, x) = (1+bt)^{-N/2} e^{i Theta} Psi(t, x/(1+bt)) omega0(x/(1+bt)) on `target`.
Field physical_profile_z(const ProfileSet& prof, double t, const Grid& target);

} // namespace pcnls
