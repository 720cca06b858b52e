#pragma once

#include <cstdint>
#include <vector>

#include "bec/lattice.hpp"

namespace bec {

/// (beta, mu, V) evaluation context.
struct GrandSpec {
    double beta = 1.0;
    double mu = 0.0;
    double volume = 1.0;
    /// Relative truncation tolerance of every per-mode sum: summation stops
    /// once a geometric bound on the remaining mass is below tail_rel times
    /// the partial sum.
    double tail_rel = 1e-17;
    /// Tolerance handed to quadratures and tail certificates downstream.
    double quad_tol = 1e-10;

    void validate() const;
};

/// Occupation distribution nu(n) of one mode on the retained window
/// n = first .. first + weights.size() - 1.
struct ModePMF {
    std::int64_t first = 0;
    std::vector<double> weights;
    double log_norm = 0.0;
    /// Bound on the dropped mass relative to the retained sum.
    double tail_bound = 0.0;

    std::int64_t last() const { return first + static_cast<std::int64_t>(weights.size()) - 1; }
    double at(std::int64_t n) const;
};

struct ModeStats {
    double log_partition = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

/// Effective linear and quadratic coefficients of the log-weight
/// -beta (a n + b n^2): a = eps - mu - g/2V, b = g/2V.
struct ModeCoeffs {
    double a = 0.0;
    double b = 0.0;
};
ModeCoeffs mode_coeffs(const Mode& mode, const GrandSpec& spec);

/// Throws DivergenceError if the mode sum does not converge (g = 0, mu >= eps).
void check_mode_convergence(const Mode& mode, const GrandSpec& spec);

ModePMF mode_pmf(const Mode& mode, const GrandSpec& spec);

/// log sum_n exp(-beta[(eps - mu - g/2V) n + (g/2V) n^2]).
double mode_log_partition(const Mode& mode, const GrandSpec& spec);

/// Mean and variance of n in one pass without materializing the pmf.
ModeStats mode_stats(const Mode& mode, const GrandSpec& spec);

double mode_occupation(const Mode& mode, const GrandSpec& spec);

/// 1/(e^{beta(eps - mu - g/V)} - 1) - <N>; requires eps - mu - g/V > 0.
double occupation_bound_gap(const Mode& mode, const GrandSpec& spec);

/// e^{-x/2} sum_n nu(n) L_n(x) with x = hk_abs_sq / 2V.
double mode_weyl_factor(const Mode& mode, const GrandSpec& spec, double hk_abs_sq);

/// exp(-(hk_abs_sq/4V) coth(beta(eps - mu)/2)); g is ignored.
double mode_weyl_factor_free(const Mode& mode, const GrandSpec& spec, double hk_abs_sq);

}  // namespace bec
