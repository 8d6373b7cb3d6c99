#pragma once

#include "pcnls/domain_core.hpp"
#include "pcnls/grid.hpp"
#include "pcnls/integrator.hpp"

#include <functional>
#include <vector>

namespace pcnls
{

/// Matched times of the pseudo-conformal map: u at t corresponds to v at
/// s = t / (1 + bt), with spatial scale 1 / (1 + bt) = 1 - bs.
struct TransformPair
{
  double u_time = 0.0;
  double v_time = 0.0;
  double scale = 1.0;
  double b = 0.0;

  static TransformPair from_u_time(double t, double b);
  static TransformPair from_v_time(double s, double b);
};

/// Largest b L h / (2 (1 + bt)) allowed for the quadratic phase (8 samples
/// per wrap at the edge of the grid).
inline constexpr double kChirpLimit = 0.7853981633974483; // pi / 4

/// b L h / (2 (1+bt)) for a grid; must not exceed kChirpLimit.
double chirp_resolution(const Grid& g, double b, double t);

/// u(t, x) = (1+bt)^{-N/2} e^{i b|x|^2 / (4(1+bt))} v(s, x/(1+bt)) on `target`,
/// with t = s / (1 - bs) and s = v.time.
Field v_to_u(const Field& v, const ModelParams& p, const Grid& target);

/// v(s, y) = (1-bs)^{-N/2} e^{-i b|y|^2 / (4(1-bs))} u(t, y/(1-bs)) on `target`.
/// The chirp is removed on the source grid before resampling.
Field u_to_v(const Field& u, const ModelParams& p, const Grid& target);

struct EquivalenceOptions
{
  Grid v_grid;
  Grid u_grid;
  double v_dt = 1e-3;
  double u_dt = 1e-3;
  /// fraction of the u-grid half width compared (inner region)
  double compare_fraction = 0.5;
  /// modulus floor of the v run (0 for linear oracles on decaying data)
  double v_modulus_floor = 1e-12;
};

struct EquivalencePoint
{
  double t = 0.0;
  double s = 0.0;
  double discrepancy = 0.0;
};

/// Simulates v through the nonautonomous equation and u directly from
/// u0 = e^{i b|x|^2/4} v0, and reports max |v_to_u(v(s)) - u(t)| on the
/// inner part of the u grid at each requested t.  `initial` evaluates v0 on
/// a given grid.
std::vector<EquivalencePoint> equivalence_test(const std::function<Field(const Grid&)>& initial,
                                               const ModelParams& p, const std::vector<double>& times,
                                               const EquivalenceOptions& opt);

/// Convenience overload: both simulations on v0's grid, no modulus floor.
std::vector<EquivalencePoint> equivalence_test(const Field& v0, const ModelParams& p,
                                               const std::vector<double>& times, double dt);

} // namespace pcnls
