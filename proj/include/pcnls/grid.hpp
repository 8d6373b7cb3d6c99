#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pcnls
{

using cplx = std::complex<double>;

/// Periodic lattice on [-L, L)^N with M nodes per axis.  Nodes are stored
/// row-major, last axis fastest.
class Grid
{
public:
  Grid() = default;
  Grid(int dim, double half_width, int points);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points() const { return points_; }
  double spacing() const { return 2.0 * half_width_ / points_; }
  std::size_t size() const { return size_; }
  /// Quadrature weight h^N of one node.
  double cell_volume() const;

  /// Coordinate of node j along an axis, -L + j h.
  double coordinate(int j) const { return -half_width_ + j * spacing(); }
  /// Angular wavenumber of FFT bin j (j in [0, M)), pi * jj / L with jj the
  /// signed bin in [-M/2, M/2).
  double wavenumber(int j) const;
  /// Signed bin index in [-M/2, M/2).
  int signed_bin(int j) const { return j < points_ / 2 ? j : j - points_; }

  /// Axis indices of a flat node index.
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::array<double, 3> position(std::size_t flat) const;
  double radius_squared(std::size_t flat) const;

  bool operator==(const Grid& o) const
  {
    return dim_ == o.dim_ && half_width_ == o.half_width_ && points_ == o.points_;
  }

private:
  int dim_ = 1;
  double half_width_ = 1.0;
  int points_ = 16;
  std::size_t size_ = 16;
};

/// Complex samples on a grid stamped with a time.
struct Field
{
  Grid grid;
  std::vector<cplx> values;
  double time = 0.0;

  Field() = default;
  Field(Grid g, double t = 0.0) : grid(g), values(g.size()), time(t) {}
  Field(Grid g, std::vector<cplx> v, double t) : grid(g), values(std::move(v)), time(t) {}

  std::size_t size() const { return values.size(); }
  bool all_finite() const;
};

/// Japanese bracket <x> = (1 + |x|^2)^{1/2} at a node.
double japanese(const Grid& g, std::size_t flat);

/// True when every coordinate of the node satisfies |x_i| <= fraction * L.
bool in_inner_box(const Grid& g, std::size_t flat, double fraction = 0.5);

double sup_norm(const Field& f);
double sup_norm_inner(const Field& f, double fraction = 0.5);
/// Rectangle-rule L2 norm with the periodic measure.
double l2_norm(const Field& f);
/// h^N sum |f|^p.
double lp_norm_pow(const Field& f, double p);
/// Largest |f| on the outer annulus |x_i| >= 0.9 L for some axis.
double boundary_contamination(const Field& f);
/// max |a - b| over all nodes (grids must match).
double max_abs_diff(const Field& a, const Field& b);
double max_abs_diff_inner(const Field& a, const Field& b, double fraction = 0.5);

} // namespace pcnls
