#pragma once

#include <complex>
#include <string>
#include <vector>

namespace pcnls
{

/// Physical parameters of  du/dt = i Lap u + lambda |u|^alpha u  and of the
/// pseudo-conformal rate b.  K bounds the data size (X-norm plus the inverse
/// weighted lower bound).
struct ModelParams
{
  double lambda_re = -1.0;
  double lambda_im = 0.0;
  double alpha = 1.8;
  int dim = 1;
  double b = 4.0;
  double K = 1.0;

  std::complex<double> lambda() const { return {lambda_re, lambda_im}; }
  double lambda_abs() const { return std::abs(lambda()); }

  /// (2 - N alpha) / 2, the exponent that governs every decay law.
  double nu() const { return (2.0 - dim * alpha) / 2.0; }
};

struct IndexSet
{
  int k = 1;
  int n = 2;
  int m = 2;
  int J = 9;

  /// Smallest admissible integers for N = 1, 2, 3.
  static IndexSet defaults_for(int dim);
};

struct ValidationReport
{
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Standing assumptions on the model.  Theorem mode adds the strict
/// inequalities (Re lambda < 0, alpha < 2/N).
ValidationReport validate_params(const ModelParams& p, bool theorem_mode = false);

/// Checks the (k, n, m, J) constraints.  In theorem mode also n >= N/(2 alpha).
ValidationReport validate_indices(const ModelParams& p, const IndexSet& idx,
                                  bool theorem_mode = false);

/// The exponent ladder sigma_0 .. sigma_J.
struct SigmaSchedule
{
  std::vector<double> sigma;

  double operator[](int j) const { return sigma.at(static_cast<std::size_t>(j)); }
  int J() const { return static_cast<int>(sigma.size()) - 1; }
};

/// sigma_1 = 1 / (4 [4J(J-2m-1) + 4J + 4/N + 1] (8m+1)^{2m}).
double sigma_one(const ModelParams& p, const IndexSet& idx);

/// Builds the ladder from the standard sigma_1.  Throws pcnls::Error if the
/// indices are invalid or the result is not monotone.
SigmaSchedule sigma_schedule(const ModelParams& p, const IndexSet& idx);

/// Same recursion seeded with an arbitrary sigma_1 (used by mutation tests).
SigmaSchedule sigma_schedule_from(double sigma1, const ModelParams& p, const IndexSet& idx);

/// Closed form  sigma_J = [4J(J-2m-1) + 4J + 2 alpha + 1](8m+1)^{2m} sigma_1 + (2 - N alpha)/2
/// with the standard sigma_1.
double sigma_J_closed_form(const ModelParams& p, const IndexSet& idx);

/// Relative mismatch between a schedule's last entry and the closed form.
double sigma_closed_form_mismatch(const SigmaSchedule& s, const ModelParams& p,
                                  const IndexSet& idx);

/// True when sigma_0 = 0 < sigma_1 <= ... strictly increasing up to sigma_J.
bool schedule_is_monotone(const SigmaSchedule& s);

/// Inexplicit constants C1, C2, C3 (default 1) and the derived thresholds.
struct ThresholdConfig
{
  double C1 = 1.0;
  double C2 = 1.0;
  double C3 = 1.0;

  // filled by thresholds()
  double alpha1 = 0.0;
  /// 2/alpha1 - N, kept separately since alpha1 itself rounds to 2/N.
  double alpha1_gap = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  std::vector<double> b1_terms;
  bool theorem_regime = false;
  /// Set when alpha1 is not representable as distinct from 2/N in double.
  bool alpha1_degenerate = false;
  std::vector<std::string> notes;
};

/// b0 = (16/N)(4K)^{4/N+2}.
double threshold_b0(int dim, double K);

ThresholdConfig thresholds(const ModelParams& p, const IndexSet& idx, ThresholdConfig c = {});

} // namespace pcnls
