#include "pcnls/spectral.hpp"

#include "pcnls/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pcnls
{

namespace
{

// FFTW's planner is not thread safe; execution of an existing plan is.
class PlanCache
{
public:
  ~PlanCache()
  {
    for (auto& [key, plan] : plans_)
      fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int points, int sign)
  {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, points, sign);
    if (auto it = plans_.find(key); it != plans_.end())
      return it->second;

    std::size_t total = 1;
    int n[3];
    for (int a = 0; a < dim; ++a)
    {
      n[a] = points;
      total *= static_cast<std::size_t>(points);
    }
    fftw_complex* scratch = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, n, scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (!plan)
      throw Error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache()
{
  static PlanCache cache;
  return cache;
}

void execute(const Grid& g, std::vector<cplx>& data, int sign)
{
  if (data.size() != g.size())
    throw Error("fft: data size does not match grid");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_cache().get(g.dim(), g.points(), sign), ptr, ptr);
}

} // namespace

std::vector<MultiIndex> multi_indices_of_order(int dim, int ord)
{
  std::vector<MultiIndex> out;
  if (dim == 1)
    out.push_back({ord, 0, 0});
  else if (dim == 2)
    for (int a = ord; a >= 0; --a)
      out.push_back({a, ord - a, 0});
  else
    for (int a = ord; a >= 0; --a)
      for (int b = ord - a; b >= 0; --b)
        out.push_back({a, b, ord - a - b});
  return out;
}

void fft_forward(const Grid& g, std::vector<cplx>& data)
{
  execute(g, data, FFTW_FORWARD);
}

void fft_inverse(const Grid& g, std::vector<cplx>& data)
{
  execute(g, data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& z : data)
    z *= scale;
}

std::vector<double> xi_squared(const Grid& g)
{
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    const auto ix = g.unflatten(i);
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a)
    {
      const double xi = g.wavenumber(ix[a]);
      s += xi * xi;
    }
    out[i] = s;
  }
  return out;
}

Field apply_multiplier(const Field& f, const std::vector<cplx>& symbol)
{
  Field out(f.grid, f.values, f.time);
  fft_forward(f.grid, out.values);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] *= symbol[i];
  fft_inverse(f.grid, out.values);
  return out;
}

Field laplacian(const Field& f)
{
  const auto k2 = xi_squared(f.grid);
  std::vector<cplx> symbol(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i)
    symbol[i] = -k2[i];
  return apply_multiplier(f, symbol);
}

Field derivative(const Field& f, const MultiIndex& beta, int max_order)
{
  const int ord = order(beta);
  if (ord > max_order)
    throw Error("derivative: order exceeds J");
  for (int a = 0; a < 3; ++a)
    if (beta[a] < 0 || (a >= f.grid.dim() && beta[a] != 0))
      throw Error("derivative: invalid multi-index");
  if (ord == 0)
    return f;

  const Grid& g = f.grid;
  const int M = g.points();
  // per-axis factors (i xi)^beta_a
  std::array<std::vector<cplx>, 3> axis;
  for (int a = 0; a < g.dim(); ++a)
  {
    axis[a].resize(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j)
    {
      if (beta[a] % 2 == 1 && j == M / 2)
        axis[a][j] = 0.0;
      else
        axis[a][j] = std::pow(cplx(0.0, g.wavenumber(j)), beta[a]);
    }
  }
  std::vector<cplx> symbol(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    const auto ix = g.unflatten(i);
    cplx s = 1.0;
    for (int a = 0; a < g.dim(); ++a)
      s *= axis[a][ix[a]];
    symbol[i] = s;
  }
  Field out(f.grid, f.values, f.time);
  fft_forward(g, out.values);
  // coefficients at the roundoff level carry no signal and (i xi)^beta would
  // amplify them by up to xi_max^|beta|
  double peak = 0.0;
  for (const auto& c : out.values)
    peak = std::max(peak, std::abs(c));
  const double floor = kDerivativeNoiseFloor * peak;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = std::abs(out.values[i]) > floor ? out.values[i] * symbol[i] : cplx(0.0);
  fft_inverse(g, out.values);
  return out;
}

Field free_propagate(const Field& f, double dt)
{
  if (dt == 0.0)
    return f;
  const auto k2 = xi_squared(f.grid);
  std::vector<cplx> symbol(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i)
    symbol[i] = std::polar(1.0, -k2[i] * dt);
  return apply_multiplier(f, symbol);
}

Field resample(const Field& f, double scale, const Grid& target)
{
  if (!(scale > 0.0))
    throw Error("resample: scale must be positive");
  const Grid& src = f.grid;
  if (target.dim() != src.dim())
    throw Error("resample: dimension mismatch");
  if (scale == 1.0 && target == src)
    return f;

  const double reach = scale * target.half_width();
  if (reach > 0.9 * src.half_width() * (1.0 + 1e-12))
    throw Error("resample: dilated target leaves the reliable region of the source grid");

  const int Ms = src.points();
  const int Mt = target.points();
  const double Ls = src.half_width();

  // centred subgrid with the same spacing: plain restriction
  if (scale == 1.0 && Mt <= Ms && (Ms - Mt) % 2 == 0 && target.spacing() == src.spacing() &&
      target.coordinate(0) == src.coordinate((Ms - Mt) / 2))
  {
    const std::size_t off = static_cast<std::size_t>((Ms - Mt) / 2);
    Field out(target, f.time);
    for (std::size_t i = 0; i < target.size(); ++i)
    {
      const auto a = target.unflatten(i);
      std::size_t flat = 0;
      for (int d = 0; d < src.dim(); ++d)
        flat = flat * static_cast<std::size_t>(Ms) + static_cast<std::size_t>(a[d]) + off;
      out.values[i] = f.values[flat];
    }
    return out;
  }

  std::vector<cplx> data = f.values;
  fft_forward(src, data);
  const double norm = 1.0 / static_cast<double>(src.size());
  for (auto& z : data)
    z *= norm;

  // row i of the evaluation matrix, exp(i xi_k (scale y_i + Ls)), by
  // recurrence in the signed bin with an exact restart every 32 bins; the
  // Nyquist bin uses the cosine so that real data stay real
  std::vector<cplx> row(static_cast<std::size_t>(Ms));
  auto fill_row = [&](int i) {
    const double arg = scale * target.coordinate(i) + Ls;
    const double theta = M_PI * arg / Ls;
    const cplx w = std::polar(1.0, theta);
    cplx pos(1.0, 0.0);
    for (int j = 0; j <= Ms / 2; ++j)
    {
      if (j % 32 == 0)
        pos = std::polar(1.0, theta * j);
      if (j == Ms / 2)
        row[j] = cplx(pos.real(), 0.0);
      else
      {
        row[j] = pos;
        if (j > 0)
          row[Ms - j] = std::conj(pos);
      }
      pos *= w;
    }
  };

  std::array<int, 3> dims{1, 1, 1};
  for (int a = 0; a < src.dim(); ++a)
    dims[a] = Ms;
  for (int a = 0; a < src.dim(); ++a)
  {
    std::size_t outer = 1, inner = 1;
    for (int b = 0; b < a; ++b)
      outer *= static_cast<std::size_t>(dims[b]);
    for (int b = a + 1; b < src.dim(); ++b)
      inner *= static_cast<std::size_t>(dims[b]);

    std::vector<cplx> next(outer * Mt * inner, cplx(0.0));
    for (int i = 0; i < Mt; ++i)
    {
      fill_row(i);
      for (std::size_t o = 0; o < outer; ++o)
      {
        cplx* dst = &next[(o * Mt + i) * inner];
        for (int k = 0; k < Ms; ++k)
        {
          const double wr = row[k].real(), wi = row[k].imag();
          const cplx* s = &data[(o * Ms + k) * inner];
          for (std::size_t q = 0; q < inner; ++q)
            dst[q] += cplx(wr * s[q].real() - wi * s[q].imag(), wr * s[q].imag() + wi * s[q].real());
        }
      }
    }
    data.swap(next);
    dims[a] = Mt;
  }
  return Field(target, std::move(data), f.time);
}

double spectral_l2_norm(const Field& f)
{
  std::vector<cplx> data = f.values;
  fft_forward(f.grid, data);
  double s = 0.0;
  for (const auto& z : data)
    s += std::norm(z);
  return std::sqrt(s * f.grid.cell_volume() / static_cast<double>(f.grid.size()));
}

double spectral_tail_ratio(const Field& f)
{
  std::vector<cplx> data = f.values;
  fft_forward(f.grid, data);
  const int M = f.grid.points();
  const int cutoff = static_cast<int>(0.9 * (M / 2));
  double peak = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
  {
    const auto ix = f.grid.unflatten(i);
    const double a = std::abs(data[i]);
    peak = std::max(peak, a);
    bool outer = false;
    for (int d = 0; d < f.grid.dim(); ++d)
      outer = outer || std::abs(f.grid.signed_bin(ix[d])) >= cutoff;
    if (outer)
      tail = std::max(tail, a);
  }
  return peak > 0.0 ? tail / peak : 0.0;
}

} // namespace pcnls
