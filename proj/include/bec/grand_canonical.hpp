#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bec/lattice.hpp"
#include "bec/single_mode.hpp"

namespace bec {

/// Grand-canonical density split by mode class. D- holds the k != 0 modes
/// with eps - mu - g/2V < 0, D+ the rest.
struct DensityBreakdown {
    double rho_total = 0.0;
    double rho_zero_mode = 0.0;
    double rho_Dminus = 0.0;
    double rho_Dplus = 0.0;
    double max_mode_fraction = 0.0;
    double mu = 0.0;
    double V = 0.0;
    /// Certified bound on the density carried by modes above the cutoff
    /// (not included in rho_total).
    double tail_bound = 0.0;
    double eps_cutoff = 0.0;
    std::int64_t modes = 0;
};

/// Mean occupation of every mode in one |s|^2 shell.
struct ShellOccupation {
    std::int64_t s_sq = 0;
    std::int64_t multiplicity = 0;
    double k_norm_sq = 0.0;
    double eps = 0.0;
    double g = 0.0;
    double occupation = 0.0;  // per mode
};

/// Lowest k != 0 energy of the box.
double first_excited_energy(const ModelParams& params);

/// Throws DivergenceError if some mode has g = 0 and mu >= eps.
void check_spec_for_model(const ModelParams& params, const GrandSpec& spec);

/// Mode cutoff whose dropped occupation is certified below density_tol.
double model_density_cutoff(const ModelParams& params, const GrandSpec& spec,
                            double density_tol = 1e-10);

std::vector<ShellOccupation> shell_occupations(const ModelParams& params, const GrandSpec& spec,
                                               double eps_cutoff);

DensityBreakdown total_density(const ModelParams& params, const GrandSpec& spec);

/// mu with |rho_Lambda(mu) - rho| <= rel_tol * rho, by bracketed bisection.
/// spec_template supplies beta, V and tolerances; its mu is ignored.
double solve_mu(const ModelParams& params, const GrandSpec& spec_template, double rho,
                double rel_tol = 1e-10);

enum class CondensateType { None, NonConventionalOnly, TypeIII, TypeI };
std::string to_string(CondensateType t);

struct CondensateReport {
    /// (delta, (1/V) sum_{0<|k|<delta} <N_k>)
    std::vector<std::pair<double, double>> shell_densities;
    CondensateType classification = CondensateType::None;
    double max_mode_fraction = 0.0;
    double rho_zero_mode = 0.0;
    /// k != 0 modes with fraction above the type-I threshold.
    std::int64_t macroscopic_modes = 0;
    /// Largest per-mode fractions with their |s|^2, descending.
    std::vector<std::pair<std::int64_t, double>> top_modes;
    DensityBreakdown density;
};

/// Classification thresholds (artifact conventions).
inline constexpr double kTypeIIIRatio = 10.0;
inline constexpr double kTypeIIIFloor = 1e-3;
inline constexpr double kMacroscopicFraction = 1e-2;

CondensateReport condensate_scan(const ModelParams& params, const GrandSpec& spec,
                                 const std::vector<double>& deltas);

struct GenfunFinite {
    double value = 1.0;
    int sign = 1;
    double log_abs = 0.0;
    /// Bound on |log| of the product over dropped modes.
    double log_tail_bound = 0.0;
    std::int64_t modes = 0;
};

/// Product over the dual lattice of per-mode Weyl factors at |h^(k)|^2.
GenfunFinite genfun_finite(const ModelParams& params, const GrandSpec& spec, const TestFunction& tf);

void to_json(nlohmann::json& j, const DensityBreakdown& b);
void to_json(nlohmann::json& j, const CondensateReport& r);
void to_json(nlohmann::json& j, const GenfunFinite& g);

/// Sweep CSV layout.
std::string density_csv_header();
std::string density_csv_row(const ModelParams& params, double beta, const DensityBreakdown& b);

/// Shortest-round-trip-safe formatting used in every CSV cell.
std::string fmt17(double x);

}  // namespace bec
