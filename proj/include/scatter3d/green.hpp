#pragma once

// Green's functions of the torus Laplacian at the scatterer point,
//
//   G_lambda(x)   = -(1/8 pi^3) sum_{xi}                    e^{i xi.(x - x0)} / (|xi|^2 - lambda)
//   G_lambda,L(x) = -(1/8 pi^3) sum_{||xi|^2 - lambda| < L} e^{i xi.(x - x0)} / (|xi|^2 - lambda)
//
// with ||G||^2 = (1/8 pi^3) sum_n r3(n) / (n - lambda)^2 on the torus (2 pi)^3.

#include <cstdint>
#include <utility>
#include <vector>

#include "scatter3d/harmonics.hpp"
#include "scatter3d/lattice_arith.hpp"
#include "scatter3d/torus.hpp"

namespace scatter3d {

/// 1 / (8 pi^3)
double inverse_torus_volume();

/// Default shell cutoff for ||G_lambda||: max(10^5, 16 lambda).
std::uint64_t default_green_cutoff(double lambda);

/// ||G_lambda||_2^2 from the shells up to cutoff plus the integral tail.
/// Throws PoleError near a shell and ParameterError if the table is short or
/// the cutoff is not well above lambda.
double green_norm_sq(double lambda, const R3Table& table, std::uint64_t cutoff);
double green_norm_sq(double lambda, const R3Table& table);

/// Integer range [lo, hi] of n with |n - lambda| < width (may be empty: lo > hi).
std::pair<std::uint64_t, std::uint64_t> annulus_range(double lambda, double width);

/// sum_{|n - lambda| < width} r3(n) / (n - lambda)^2 (no 1/8 pi^3 factor).
double annulus_shell_sum(double lambda, double width, const R3Table& table);

struct GreenCoefficient {
  LatticePoint xi;
  Complex value;
};

struct TruncatedGreen {
  double lambda = 0.0;
  double width = 0.0;
  TorusPoint x0;
  std::vector<GreenCoefficient> coeffs;  // lexicographic in xi
  double norm_trunc_sq = 0.0;            // shell form
  double norm_trunc_sq_points = 0.0;     // (2 pi)^3 sum |coeff|^2
  double norm_full_sq = 0.0;
};

/// Fourier coefficients of G_lambda,L with both norm computations. Throws
/// EmptyAnnulus when no shell satisfies |n - lambda| < width.
TruncatedGreen build_truncated(double lambda, double width, const TorusPoint& x0,
                               const R3Table& table);

struct TruncationReport {
  double norm_full_sq = 0.0;
  double norm_trunc_sq = 0.0;
  double ratio = 0.0;     // ||G_lambda,L|| / ||G_lambda||
  double distance = 0.0;  // ||g_lambda - g_lambda,L||
};

/// ||g_lambda - g_lambda,L|| = sqrt(2 - 2 ||G_lambda,L|| / ||G_lambda||), since
/// G_lambda,L is the frequency restriction of G_lambda.
TruncationReport truncation_distance(double lambda, double width, const R3Table& table,
                                     std::uint64_t cutoff);
TruncationReport truncation_distance(double lambda, double width, const R3Table& table);

/// <G_lambda, G_lambda,L> from the coefficient sum, with the G_lambda
/// coefficients recomputed from xi rather than copied.
double projection_inner_product(const TruncatedGreen& tg);

/// g_lambda,L(x) = G_lambda,L(x) / ||G_lambda,L||.
Complex evaluate_g(const TruncatedGreen& tg, const TorusPoint& x);

}  // namespace scatter3d
