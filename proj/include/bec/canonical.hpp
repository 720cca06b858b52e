#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <json.hpp>

#include "bec/lattice.hpp"

namespace bec {

/// Truncated polynomial sum_n coeffs[n] x^n scaled by exp(scale).
/// Stored coefficients are normalized so that max |coeffs[n]| = 1.
struct ModePoly {
    std::vector<double> coeffs;
    double scale = 0.0;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    bool is_zero() const;
};

/// Coefficient of x^N as sign * exp(log_abs); sign 0 when it vanishes.
struct LogCoeff {
    double log_abs = 0.0;
    int sign = 0;

    double value() const;
};

/// Polynomial from explicit (linear-scale) coefficients.
ModePoly poly_from_weights(const std::vector<double>& weights);

/// Product truncated at degree N, renormalized.
ModePoly poly_multiply(const ModePoly& a, const ModePoly& b, int N);
ModePoly poly_power(const ModePoly& p, std::int64_t k, int N);

enum class ProductOrder { Sequential, Tree };

/// Product of factors[i]^multiplicity[i] truncated at degree N. Sequential
/// multiplies one mode at a time; Tree uses squaring per factor and a balanced
/// pairwise tree whose levels run on the worker pool.
ModePoly poly_product(const std::vector<ModePoly>& factors,
                      const std::vector<std::int64_t>& multiplicity, int N,
                      ProductOrder order = ProductOrder::Tree);

LogCoeff coefficient(const ModePoly& p, int N);

/// Exhaustive sum over occupation vectors with sum n_k = N of prod_k w_k(n_k).
/// Exponential cost; intended for a handful of modes.
double enumerate_coefficient(const std::vector<std::vector<double>>& weights, int N);

/// Partition polynomial of one mode, w(n) = exp(-beta (eps n + g n (n-1) / 2V)),
/// cut at degree N or where the weight drops below e^-40 of its maximum.
/// With weyl_x >= 0 each weight is multiplied by e^{-x/2} L_n(x).
ModePoly mode_poly(const Mode& mode, double beta, double volume, int N, double weyl_x = -1.0);

/// Hard cap on (modes) x (N + 1) for canonical products.
inline constexpr double kCanonicalWorkCap = 5e7;

struct CanonicalPartition {
    int N = 0;
    double V = 0.0;
    double log_Z = 0.0;
    double free_energy = 0.0;  // -(1/(beta V)) log Z_N
    std::int64_t modes = 0;
};

CanonicalPartition canonical_partition(const ModelParams& params, double beta, int N,
                                       double eps_cutoff, ProductOrder order = ProductOrder::Tree);

struct CanonicalGenfun {
    int N = 0;
    double value = 1.0;
    double log_Z = 0.0;
    std::int64_t modes = 0;
};

/// <W(h)> in the fixed-N state: modes up to max(eps_cutoff, tf cutoff).
CanonicalGenfun canonical_genfun(const ModelParams& params, double beta, int N,
                                 const TestFunction& tf, double eps_cutoff,
                                 ProductOrder order = ProductOrder::Tree);

/// Mode cutoff for a canonical run: the grand-canonical density cutoff at the
/// chemical potential matched to N / V.
double canonical_default_cutoff(const ModelParams& params, double beta, int N);

struct EquivalenceGap {
    double L = 0.0;
    double V = 0.0;
    int N = 0;
    double rho = 0.0;  // N / V
    double mu = 0.0;
    double E_can = 1.0;
    double E_gc = 1.0;
    double gap = 0.0;
    std::int64_t modes = 0;
    /// Above rho_c_I (d > 2): the conjectured canonical limit and its distance
    /// to E_can. NaN otherwise.
    double E_hypothesis = std::numeric_limits<double>::quiet_NaN();
    double hypothesis_gap = std::numeric_limits<double>::quiet_NaN();
};

/// |E_can - E_gc| at N = floor(V rho) and the mu that reproduces N / V.
EquivalenceGap equivalence_gap(const ModelParams& params, double beta, double rho,
                               const TestFunction& tf, double L);

void to_json(nlohmann::json& j, const CanonicalPartition& c);
void to_json(nlohmann::json& j, const CanonicalGenfun& c);
void to_json(nlohmann::json& j, const EquivalenceGap& g);

}  // namespace bec
