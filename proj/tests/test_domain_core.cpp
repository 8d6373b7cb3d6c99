#include "pcnls/domain_core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pcnls;

namespace
{

ModelParams model(int dim, double alpha)
{
  ModelParams p;
  p.dim = dim;
  p.alpha = alpha;
  return p;
}

// the ladder written out term by term, independent of the library code
std::vector<double> ladder(double s1, double alpha, int N, int m, int J)
{
  std::vector<double> s(J + 1, 0.0);
  s[1] = s1;
  double f = 1.0;
  for (int j = 2; j <= 2 * m; ++j)
  {
    f = 1.0;
    for (int q = 0; q < j; ++q)
      f *= 8 * m + 1;
    s[j] = f * s1;
  }
  s[2 * m + 1] = (2.0 - N * alpha) / 2.0 + (4.0 * J + 2.0 * alpha + 1.0) * s[2 * m];
  for (int j = 2 * m + 2; j <= J; ++j)
    s[j] = s[j - 1] + 4.0 * J * s[2 * m];
  return s;
}

} // namespace

TEST_CASE("parameter validation")
{
  ModelParams p;
  CHECK(validate_params(p, true).ok());
  p.lambda_re = 0.5;
  CHECK_FALSE(validate_params(p).ok());
  p.lambda_re = 0.0;
  CHECK(validate_params(p).ok());
  CHECK_FALSE(validate_params(p, true).ok());

  ModelParams q;
  q.alpha = 2.0;
  CHECK(validate_params(q).ok());
  CHECK_FALSE(validate_params(q, true).ok());
  q.alpha = 2.1;
  CHECK_FALSE(validate_params(q).ok());
  q.alpha = 1.0;
  q.K = 0.5;
  CHECK_FALSE(validate_params(q).ok());
}

TEST_CASE("index validation")
{
  CHECK(validate_indices(model(1, 1.8), {1, 2, 2, 9}).ok());
  CHECK_FALSE(validate_indices(model(1, 1.8), {1, 2, 2, 8}).ok());
  CHECK(validate_indices(model(2, 0.9), {2, 3, 3, 13}).ok());
  // k must exceed N/2
  CHECK_FALSE(validate_indices(model(2, 0.9), {1, 3, 3, 12}).ok());
  // 2m >= k + n + 1
  CHECK_FALSE(validate_indices(model(1, 1.8), {1, 2, 1, 7}).ok());
  // theorem mode also wants n >= N / (2 alpha)
  CHECK(validate_indices(model(1, 0.2), {1, 2, 2, 9}).ok());
  CHECK_FALSE(validate_indices(model(1, 0.2), {1, 2, 2, 9}, true).ok());
  for (int N = 1; N <= 3; ++N)
    CHECK(validate_indices(model(N, 1.0 / N), IndexSet::defaults_for(N)).ok());
}

TEST_CASE("sigma_1 and the ladder")
{
  const ModelParams p = model(1, 1.8);
  const IndexSet idx{1, 2, 2, 9};
  CHECK(sigma_one(p, idx) == doctest::Approx(1.0 / 61805540.0).epsilon(1e-14));

  const SigmaSchedule s = sigma_schedule(p, idx);
  CHECK(s.J() == 9);
  CHECK(s[0] == 0.0);
  CHECK(s[3] == doctest::Approx(17.0 * 17.0 * 17.0 * s[1]).epsilon(1e-14));
  const auto ref = ladder(s[1], p.alpha, 1, 2, 9);
  for (int j = 1; j <= 9; ++j)
    CHECK(s[j] == doctest::Approx(ref[j]).epsilon(1e-13));
  CHECK(schedule_is_monotone(s));
  CHECK(sigma_closed_form_mismatch(s, p, idx) < 1e-12);
}

TEST_CASE("alpha = 2/N removes the offset")
{
  for (int N = 1; N <= 3; ++N)
  {
    const ModelParams p = model(N, 2.0 / N);
    const IndexSet idx = IndexSet::defaults_for(N);
    const SigmaSchedule s = sigma_schedule(p, idx);
    const int m2 = 2 * idx.m;
    CHECK(std::abs(s[m2 + 1] - (4.0 * idx.J + 2.0 * p.alpha + 1.0) * s[m2]) <= 1e-15 * s[m2 + 1]);
  }
}

TEST_CASE("property: ladder is monotone and sigma_J <= 1/2 on [3/(2N), 2/N]")
{
  std::mt19937_64 rng(11);
  for (int N = 1; N <= 3; ++N)
  {
    std::uniform_real_distribution<double> a(1.5 / N, 2.0 / N);
    const IndexSet idx = IndexSet::defaults_for(N);
    for (int trial = 0; trial < 200; ++trial)
    {
      const ModelParams p = model(N, a(rng));
      const SigmaSchedule s = sigma_schedule(p, idx);
      CHECK(schedule_is_monotone(s));
      CHECK(s[s.J()] <= 0.5);
      CHECK(sigma_closed_form_mismatch(s, p, idx) <= 1e-12);
    }
  }
}

TEST_CASE("a wrong sigma_1 breaks the closed form")
{
  const ModelParams p = model(1, 1.8);
  const IndexSet idx{1, 2, 2, 9};
  const SigmaSchedule s = sigma_schedule_from(1.01 * sigma_one(p, idx), p, idx);
  CHECK(sigma_closed_form_mismatch(s, p, idx) > 1e-12);
}

TEST_CASE("thresholds")
{
  CHECK(threshold_b0(1, 1.0) == 65536.0);
  CHECK(threshold_b0(2, 1.0) == 2048.0);
  CHECK(threshold_b0(1, 2.0) > threshold_b0(1, 1.0));

  ModelParams p = model(1, 1.8);
  p.b = 4.0;
  const ThresholdConfig t = thresholds(p, {1, 2, 2, 9});
  CHECK_FALSE(t.theorem_regime);
  CHECK(t.alpha1_degenerate);
  CHECK(t.b0 == 65536.0);
  CHECK(t.alpha1 <= 2.0);
  CHECK_FALSE(t.notes.empty());
}
