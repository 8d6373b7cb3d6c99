#include "pcnls/domain_core.hpp"

#include "pcnls/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcnls
{

IndexSet IndexSet::defaults_for(int dim)
{
  switch (dim)
  {
  case 1: return {1, 2, 2, 9};
  case 2: return {2, 3, 3, 13};
  case 3: return {2, 4, 4, 16};
  default: throw Error("no default indices for dimension " + std::to_string(dim));
  }
}

ValidationReport validate_params(const ModelParams& p, bool theorem_mode)
{
  ValidationReport r;
  if (p.dim < 1 || p.dim > 3)
    r.violations.push_back("dim must be 1, 2 or 3");
  if (!(p.lambda_re <= 0.0))
    r.violations.push_back("Re lambda must be <= 0");
  if (theorem_mode && !(p.lambda_re < 0.0))
    r.violations.push_back("theorem mode requires Re lambda < 0");
  if (p.dim >= 1)
  {
    const double crit = 2.0 / p.dim;
    if (!(p.alpha > 0.0) || !(p.alpha <= crit))
      r.violations.push_back("alpha must lie in (0, 2/N]");
    if (theorem_mode && !(p.alpha < crit))
      r.violations.push_back("theorem mode requires alpha < 2/N");
  }
  if (!(p.b >= 0.0))
    r.violations.push_back("b must be >= 0");
  if (!(p.K >= 1.0))
    r.violations.push_back("K must be >= 1");
  return r;
}

ValidationReport validate_indices(const ModelParams& p, const IndexSet& idx, bool theorem_mode)
{
  ValidationReport r;
  const int N = p.dim;
  auto fail = [&](const std::string& s) { r.violations.push_back(s); };

  // k > N/2
  if (!(2 * idx.k > N))
    fail("k > N/2 violated");
  // n > max(N/2 + 1, N(N+1)/4)
  if (!(2 * idx.n > N + 2))
    fail("n > N/2 + 1 violated");
  if (!(4 * idx.n > N * (N + 1)))
    fail("n > N(N+1)/4 violated");
  if (!(2 * idx.m >= idx.k + idx.n + 1))
    fail("2m >= k + n + 1 violated");
  if (idx.J != 2 * idx.m + 2 + idx.k + idx.n)
  {
    std::ostringstream os;
    os << "J = 2m + 2 + k + n violated (J = " << idx.J << ", expected "
       << 2 * idx.m + 2 + idx.k + idx.n << ")";
    fail(os.str());
  }
  if (theorem_mode && !(2.0 * idx.n * p.alpha >= N))
    fail("theorem mode requires n >= N/(2 alpha)");
  return r;
}

double sigma_one(const ModelParams& p, const IndexSet& idx)
{
  const double J = idx.J;
  const double m = idx.m;
  const double bracket = 4.0 * J * (J - 2.0 * m - 1.0) + 4.0 * J + 4.0 / p.dim + 1.0;
  return 1.0 / (4.0 * bracket * std::pow(8.0 * m + 1.0, 2.0 * m));
}

SigmaSchedule sigma_schedule_from(double sigma1, const ModelParams& p, const IndexSet& idx)
{
  if (auto rep = validate_indices(p, idx); !rep.ok())
    throw Error("sigma_schedule: invalid indices: " + rep.violations.front());

  const int J = idx.J;
  const int m2 = 2 * idx.m;
  SigmaSchedule s;
  s.sigma.assign(static_cast<std::size_t>(J + 1), 0.0);
  auto& sg = s.sigma;
  sg[1] = sigma1;
  for (int j = 2; j <= m2; ++j)
    sg[j] = std::pow(8.0 * idx.m + 1.0, j) * sigma1;
  sg[m2 + 1] = p.nu() + (4.0 * J + 2.0 * p.alpha + 1.0) * sg[m2];
  for (int j = m2 + 2; j <= J; ++j)
    sg[j] = 4.0 * J * sg[m2] * (j - m2 - 1) + sg[m2 + 1];

  if (!schedule_is_monotone(s))
    throw Error("sigma_schedule: ladder is not monotone");
  return s;
}

SigmaSchedule sigma_schedule(const ModelParams& p, const IndexSet& idx)
{
  return sigma_schedule_from(sigma_one(p, idx), p, idx);
}

double sigma_J_closed_form(const ModelParams& p, const IndexSet& idx)
{
  const double J = idx.J;
  const double m = idx.m;
  const double bracket = 4.0 * J * (J - 2.0 * m - 1.0) + 4.0 * J + 2.0 * p.alpha + 1.0;
  return bracket * std::pow(8.0 * m + 1.0, 2.0 * m) * sigma_one(p, idx) + p.nu();
}

double sigma_closed_form_mismatch(const SigmaSchedule& s, const ModelParams& p,
                                  const IndexSet& idx)
{
  const double closed = sigma_J_closed_form(p, idx);
  return std::abs(s[s.J()] - closed) / std::abs(closed);
}

bool schedule_is_monotone(const SigmaSchedule& s)
{
  if (s.sigma.size() < 2 || s.sigma[0] != 0.0 || !(s.sigma[1] > 0.0))
    return false;
  for (std::size_t j = 2; j < s.sigma.size(); ++j)
    if (!(s.sigma[j] > s.sigma[j - 1]))
      return false;
  return true;
}

double threshold_b0(int dim, double K)
{
  return (16.0 / dim) * std::pow(4.0 * K, 4.0 / dim + 2.0);
}

ThresholdConfig thresholds(const ModelParams& p, const IndexSet& idx, ThresholdConfig c)
{
  if (p.lambda_re == 0.0)
    throw Error("thresholds: Re lambda = 0 (division by |Re lambda|)");
  if (c.C1 < 1.0 || c.C2 < 1.0 || c.C3 < 1.0)
    throw Error("thresholds: C1, C2, C3 must be >= 1");

  const int N = p.dim;
  const double s1 = sigma_one(p, idx);
  const double fourK = 4.0 * p.K;
  const double lam = p.lambda_abs();
  const double re = std::abs(p.lambda_re);

  c.notes.clear();
  c.b0 = threshold_b0(N, p.K);

  // (12 C1 C2 (4K)^{4J+1} |lambda| / (sigma_1 |Re lambda|)) (2/alpha1 - N) = 1
  const double log_coeff = std::log(12.0 * c.C1 * c.C2 * lam / (s1 * re))
                           + (4.0 * idx.J + 1.0) * std::log(fourK);
  c.alpha1_gap = std::exp(-log_coeff);
  c.alpha1 = 2.0 / (N + c.alpha1_gap);
  c.alpha1_degenerate = !(c.alpha1 < 2.0 / N);
  if (c.alpha1_degenerate)
  {
    std::ostringstream os;
    os << "alpha1 is within " << 2.0 * c.alpha1_gap / (N * N)
       << " of 2/N; no double-precision alpha < 2/N reaches the proven regime";
    c.notes.push_back(os.str());
  }
  const double lower = std::max(3.0 / (2.0 * N), 2.0 / (N + 1.0));
  if (!(c.alpha1 > lower))
    c.notes.push_back("alpha1 falls below max{3/(2N), 2/(N+1)}");

  c.b1_terms = {
    c.b0,
    8.0 * c.C3,
    std::exp(std::log(32.0 * lam * c.C1 * c.C2 / s1) + (4.0 * idx.J + 4.0) * std::log(fourK)),
    std::pow(2.0, 4.0 / N + 3.0) * p.alpha * fourK * fourK / (std::pow(3.0, 1.0 / N) - 1.0),
  };
  c.b1 = *std::max_element(c.b1_terms.begin(), c.b1_terms.end());

  c.theorem_regime = p.alpha >= c.alpha1 && p.alpha < 2.0 / N && p.b >= c.b1;
  if (!c.theorem_regime)
    c.notes.push_back("parameters lie outside the proven constant regime");
  return c;
}

} // namespace pcnls
