#include "pcnls/error.hpp"
#include "pcnls/harness.hpp"
#include "pcnls/seminorm.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace pcnls
{

namespace
{

// trigonometric polynomial normalised so that |g| <= 1 everywhere
struct Bump
{
  std::vector<cplx> coeff;
  std::vector<std::array<double, 3>> wave;

  Bump(int dim, int modes, double kmax, std::uint64_t seed)
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double total = 0.0;
    for (int j = 0; j < modes; ++j)
    {
      const cplx a(unit(rng), unit(rng));
      std::array<double, 3> k{0.0, 0.0, 0.0};
      for (int d = 0; d < dim; ++d)
        k[d] = kmax * unit(rng);
      coeff.push_back(a);
      wave.push_back(k);
      total += std::abs(a);
    }
    if (total > 0.0)
      for (auto& a : coeff)
        a /= total;
  }

  cplx operator()(const std::array<double, 3>& x) const
  {
    cplx s = 0.0;
    for (std::size_t j = 0; j < coeff.size(); ++j)
      s += coeff[j] * std::polar(1.0, wave[j][0] * x[0] + wave[j][1] * x[1] + wave[j][2] * x[2]);
    return s;
  }
};

} // namespace

InitialData make_initial_data(const InitialDataSpec& spec, const Grid& g, const IndexSet& idx,
                              bool theorem_mode, std::uint64_t seed)
{
  const cplx c(spec.c_re, spec.c_im);
  const int power = spec.power > 0 ? spec.power : idx.n;
  if (spec.power < 0)
    throw Error("initial data: power must be non-negative");

  InitialData out;
  out.field = Field(g, 0.0);
  auto& v = out.field.values;

  if (spec.family == "power_decay")
  {
    for (std::size_t i = 0; i < g.size(); ++i)
      v[i] = c * std::pow(japanese(g, i), -power);
  }
  else if (spec.family == "perturbed")
  {
    const double cabs = std::abs(c);
    if (!(spec.epsilon > 0.0 && spec.epsilon <= cabs))
      throw Error("initial data: epsilon must lie in (0, |c|]");
    if (!(spec.amplitude >= 0.0 && spec.amplitude <= 1.0))
      throw Error("initial data: perturbation amplitude must lie in [0, 1] to keep the lower bound");
    if (spec.modes < 1)
      throw Error("initial data: modes must be >= 1");
    const Bump bump(g.dim(), spec.modes, spec.max_wavenumber, seed);
    const double scale = spec.amplitude * (cabs - spec.epsilon);
    for (std::size_t i = 0; i < g.size(); ++i)
    {
      const double w = std::pow(japanese(g, i), -power);
      v[i] = c * w + scale * w * bump(g.position(i));
    }
  }
  else if (spec.family == "gaussian")
  {
    if (theorem_mode)
      throw Error("initial data: gaussian data violate inf <x>^n |v0| > 0 (theorem mode)");
    if (!(spec.width > 0.0))
      throw Error("initial data: width must be positive");
    for (std::size_t i = 0; i < g.size(); ++i)
      v[i] = c * std::exp(-g.radius_squared(i) / (2.0 * spec.width * spec.width));
  }
  else
    throw Error("initial data: unknown family '" + spec.family + "'");

  if (idx.J <= kMaxMonitorOrder)
  {
    const SeminormTable tab = seminorms(out.field, idx);
    out.x_norm = tab.x_norm;
    out.inf_weighted = tab.inf_weighted;
  }
  else
  {
    out.x_norm = std::numeric_limits<double>::quiet_NaN();
    double inf_w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i)
      inf_w = std::min(inf_w, std::pow(japanese(g, i), idx.n) * std::abs(v[i]));
    out.inf_weighted = inf_w;
  }
  out.K = out.inf_weighted > 0.0 ? out.x_norm + 1.0 / out.inf_weighted
                                 : std::numeric_limits<double>::infinity();
  if (theorem_mode && !(out.inf_weighted > 0.0))
    throw Error("initial data: inf <x>^n |v0| vanishes on the grid");
  return out;
}

} // namespace pcnls
