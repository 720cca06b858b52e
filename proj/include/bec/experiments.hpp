#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "bec/grand_canonical.hpp"
#include "bec/lattice.hpp"

namespace bec::experiments {

struct LadderPoint {
    double L = 0.0;
    double V = 0.0;
    double mu = 0.0;
    bool excluded = false;
};

/// log mu = log B + slope * log V by ordinary least squares.
struct ScalingFit {
    std::vector<LadderPoint> points;
    double slope = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
    /// Intercept with the slope held at theory_slope.
    double prefactor_pinned = 0.0;
    /// Refit on the larger half of the ladder.
    double upper_slope = 0.0;
    double theory_slope = 0.0;
    double theory_B = 0.0;
    double rho = 0.0;
    double rho_c = 0.0;
    std::vector<std::string> warnings;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Needs d > 2, a constant g profile and rho > rho_c_I. Points with mu <= 0
/// are kept in the output, flagged, and left out of the fit.
ScalingFit mu_scaling_study(const ModelParams& params, double beta, double rho,
                            const std::vector<double>& L_ladder);

struct CondensatePoint {
    double L = 0.0;
    double V = 0.0;
    double mu = 0.0;
    CondensateReport report;
};

struct TypeIIIStudy {
    double rho = 0.0;
    double rho_c = 0.0;
    double excess = 0.0;  // rho - rho_c_I, clipped at 0
    std::vector<CondensatePoint> points;  // sorted by L
    bool fraction_strictly_decreasing = false;
    /// Shell density at the smallest delta on the largest L, and its
    /// relative deviation from excess.
    double final_shell_density = 0.0;
    double final_shell_rel_error = 0.0;
    /// Largest per-mode fraction at the largest L, its multiplicity and the
    /// ratio to excess / multiplicity (meaningful for the Zero profile).
    std::int64_t final_macroscopic_modes = 0;
    double final_top_fraction = 0.0;
    double final_top_rel_error = 0.0;
};

TypeIIIStudy typeIII_study(const ModelParams& params, double beta, double rho,
                           const std::vector<double>& L_ladder, const std::vector<double>& deltas);

/// Zero-mode density against max(0, (mu - eps0)/g0) at fixed mu along a ladder;
/// runs in any dimension.
struct ZeroModePoint {
    double L = 0.0;
    double rho_zero = 0.0;
    double rho_total = 0.0;
};
struct ZeroModeStudy {
    double mu = 0.0;
    double target = 0.0;
    std::vector<ZeroModePoint> points;
};
ZeroModeStudy zero_mode_study(const ModelParams& params, double beta, double mu,
                              const std::vector<double>& L_ladder);

struct GenfunPoint {
    double L = 0.0;
    double V = 0.0;
    double mu = 0.0;
    double E_finite = 1.0;
    double gap = 0.0;
    std::int64_t modes = 0;
};

struct GenfunStudy {
    bool fixed_rho = false;
    double beta = 0.0;
    double control = 0.0;  // mu or rho
    double E_limit = 1.0;
    std::vector<GenfunPoint> points;
    bool gaps_decreasing = false;
};

GenfunStudy genfun_study_mu(const ModelParams& params, double beta, double mu, const TestFunction& tf,
                            const std::vector<double>& L_ladder);
GenfunStudy genfun_study_rho(const ModelParams& params, double beta, double rho, const TestFunction& tf,
                             const std::vector<double>& L_ladder);

/// Interacting model against its Zero-profile truncation at the same density.
struct TruncatedPoint {
    double L = 0.0;
    double E_full = 1.0;
    double E_truncated = 1.0;
    double gap_full = 0.0;
    double gap_truncated = 0.0;
    double mutual_gap = 0.0;
};
struct TruncatedComparison {
    double rho = 0.0;
    double E_limit = 1.0;
    std::vector<TruncatedPoint> points;
};
TruncatedComparison truncated_comparison(const ModelParams& params, double beta, double rho,
                                         const TestFunction& tf, const std::vector<double>& L_ladder);

using Functional = std::function<double(const TestFunction&)>;

struct PositivityResult {
    std::size_t n = 0;
    double min_eigenvalue = 0.0;
    std::vector<double> eigenvalues;
};

/// Smallest eigenvalue of M_ls = E(h_l - h_s) exp((i/2) Im(h_l, h_s)). n <= 12.
PositivityResult positivity_check(const Functional& E, const std::vector<TestFunction>& tf_set);

/// Random set of n test functions: one or two Gaussian terms each, complex
/// amplitudes with |a| <= 1.5, widths in [0.5, 2].
std::vector<TestFunction> random_tf_set(std::mt19937_64& rng, int d, int n);

struct PositivitySweep {
    std::uint64_t seed = 0;
    double mu_sub = 0.0;
    double rho_super = 0.0;
    std::vector<std::size_t> sizes;
    std::vector<double> min_eig_sub;
    std::vector<double> min_eig_super;
    double worst = 0.0;
};

/// `sets` random sets of 3-8 functions against the subcritical limit at mu_sub
/// and the supercritical limit at rho_super.
PositivitySweep positivity_sweep(const ModelParams& params, double beta, double mu_sub, double rho_super,
                                 int sets, std::uint64_t seed);

void to_json(nlohmann::json& j, const ScalingFit& f);
void to_json(nlohmann::json& j, const TypeIIIStudy& s);
void to_json(nlohmann::json& j, const ZeroModeStudy& s);
void to_json(nlohmann::json& j, const GenfunStudy& s);
void to_json(nlohmann::json& j, const TruncatedComparison& s);
void to_json(nlohmann::json& j, const PositivityResult& r);
void to_json(nlohmann::json& j, const PositivitySweep& s);

/// Ladder tables, one row per point, header first.
std::string to_csv(const ScalingFit& f);
std::string to_csv(const TypeIIIStudy& s);
std::string to_csv(const GenfunStudy& s);
std::string to_csv(const TruncatedComparison& s);
std::string to_csv(const PositivitySweep& s);

}  // namespace bec::experiments
