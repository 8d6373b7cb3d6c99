#include "pcnls/grid.hpp"

#include "pcnls/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pcnls
{

Grid::Grid(int dim, double half_width, int points)
  : dim_(dim), half_width_(half_width), points_(points)
{
  if (dim < 1 || dim > 3)
    throw Error("Grid: dimension must be 1, 2 or 3");
  if (!(half_width > 0.0))
    throw Error("Grid: half width must be positive");
  if (points < 16 || (points & (points - 1)) != 0)
    throw Error("Grid: points per axis must be a power of two >= 16");
  size_ = 1;
  for (int a = 0; a < dim; ++a)
    size_ *= static_cast<std::size_t>(points);
}

double Grid::cell_volume() const
{
  return std::pow(spacing(), dim_);
}

double Grid::wavenumber(int j) const
{
  return std::numbers::pi * signed_bin(j) / half_width_;
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const
{
  std::array<int, 3> ix{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a)
  {
    ix[a] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return ix;
}

std::array<double, 3> Grid::position(std::size_t flat) const
{
  const auto ix = unflatten(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a)
    x[a] = coordinate(ix[a]);
  return x;
}

double Grid::radius_squared(std::size_t flat) const
{
  const auto x = position(flat);
  return x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
}

bool Field::all_finite() const
{
  return std::all_of(values.begin(), values.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

double japanese(const Grid& g, std::size_t flat)
{
  return std::sqrt(1.0 + g.radius_squared(flat));
}

bool in_inner_box(const Grid& g, std::size_t flat, double fraction)
{
  const auto x = g.position(flat);
  const double lim = fraction * g.half_width() * (1.0 + 1e-12);
  for (int a = 0; a < g.dim(); ++a)
    if (std::abs(x[a]) > lim)
      return false;
  return true;
}

double sup_norm(const Field& f)
{
  double s = 0.0;
  for (const auto& z : f.values)
    s = std::max(s, std::abs(z));
  return s;
}

double sup_norm_inner(const Field& f, double fraction)
{
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (in_inner_box(f.grid, i, fraction))
      s = std::max(s, std::abs(f.values[i]));
  return s;
}

double l2_norm(const Field& f)
{
  return std::sqrt(lp_norm_pow(f, 2.0));
}

double lp_norm_pow(const Field& f, double p)
{
  double s = 0.0;
  if (p == 2.0)
    for (const auto& z : f.values)
      s += std::norm(z);
  else
    for (const auto& z : f.values)
      s += std::pow(std::abs(z), p);
  return s * f.grid.cell_volume();
}

double boundary_contamination(const Field& f)
{
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!in_inner_box(f.grid, i, 0.9))
      s = std::max(s, std::abs(f.values[i]));
  return s;
}

double max_abs_diff(const Field& a, const Field& b)
{
  if (!(a.grid == b.grid))
    throw Error("max_abs_diff: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s = std::max(s, std::abs(a.values[i] - b.values[i]));
  return s;
}

double max_abs_diff_inner(const Field& a, const Field& b, double fraction)
{
  if (!(a.grid == b.grid))
    throw Error("max_abs_diff_inner: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (in_inner_box(a.grid, i, fraction))
      s = std::max(s, std::abs(a.values[i] - b.values[i]));
  return s;
}

} // namespace pcnls
