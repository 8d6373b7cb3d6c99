#pragma once

#include "pcnls/grid.hpp"

#include <array>
#include <vector>

namespace pcnls
{

using MultiIndex = std::array<int, 3>;

inline int order(const MultiIndex& beta) { return beta[0] + beta[1] + beta[2]; }

/// All multi-indices of total order `ord` in `dim` dimensions.
std::vector<MultiIndex> multi_indices_of_order(int dim, int ord);

/// Unnormalised forward DFT in place (FFTW, deterministic ESTIMATE plans).
void fft_forward(const Grid& g, std::vector<cplx>& data);
/// Inverse DFT in place, normalised by 1/M^N.
void fft_inverse(const Grid& g, std::vector<cplx>& data);

/// |xi|^2 for every flat Fourier bin.
std::vector<double> xi_squared(const Grid& g);

/// Multiplies the spectrum by `symbol` (one entry per flat bin) and returns
/// the physical-space result stamped with f.time.
Field apply_multiplier(const Field& f, const std::vector<cplx>& symbol);

/// Delta f through the Fourier symbol -|xi|^2.
Field laplacian(const Field& f);

/// Fourier coefficients below this fraction of the largest one are treated
/// as roundoff by derivative().
inline constexpr double kDerivativeNoiseFloor = 1e-13;

/// D^beta f through (i xi)^beta.  The Nyquist bin is dropped along axes of
/// odd order, and coefficients under the noise floor are dropped.  Throws if
/// |beta| > max_order.
Field derivative(const Field& f, const MultiIndex& beta, int max_order);

/// e^{i dt Delta} f: spectrum times e^{-i |xi|^2 dt}.
Field free_propagate(const Field& f, double dt);

/// g(y) = f(scale * y) on the nodes of `target`, by direct summation of the
/// Fourier series of f.  Scaled nodes must satisfy |scale * y_i| <= 0.9 L of
/// the source grid; the trivial case (scale 1, same grid) is a copy.
Field resample(const Field& f, double scale, const Grid& target);

/// L2 norm computed from the spectrum (Parseval).
double spectral_l2_norm(const Field& f);

/// Largest |F| on the outer 10% of the band relative to the peak |F|.
double spectral_tail_ratio(const Field& f);

} // namespace pcnls
