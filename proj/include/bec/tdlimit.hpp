#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "bec/lattice.hpp"

namespace bec::tdlimit {

/// (2pi)^{-d} int d^dk / (e^{beta(kappa k^2 - mu)} - 1), by radial quadrature.
/// Throws DomainError for mu > 0 and DivergenceError for mu = 0, d <= 2.
double rho_P(double beta, double mu, int d, double kinetic = 1.0);

/// Critical density rho_P(beta, 0).
double rho_c_P(double beta, int d, double kinetic = 1.0);

/// max{0, (mu - eps0)/g0}.
double rho_0_I(double beta, double mu, double eps0, double g0);

/// rho_c_P + max{0, -eps0/g0}.
double rho_c_I(double beta, const ModelParams& params);

/// Total limit density rho_P + rho_0_I at mu <= 0.
double rho_I(double beta, double mu, const ModelParams& params);

/// A_{beta,mu}(h,h) = (2pi)^{-d} int |h^(k)|^2 / (e^{beta(eps_k - mu)} - 1) d^dk.
double quad_form_A(double beta, double mu, const TestFunction& tf, int d, double kinetic = 1.0);

/// Unique mu < 0 with rho_I(beta, mu) = rho below rho_c_I; 0 at and above it.
double mu_of_rho_limit(double beta, double rho, const ModelParams& params);

/// Limit functional at fixed mu <= 0:
/// J0(sqrt(2 rho_0_I) |h0|) exp(-||h||^2/4 - A_{beta,mu}(h,h)/2).
double genfun_limit_mu(double beta, double mu, const ModelParams& params, const TestFunction& tf);

/// Limit functional at fixed density. Below rho_c_I it is genfun_limit_mu at
/// mu_of_rho_limit; above, the mu = 0 value times exp(-|h0|^2 (rho - rho_c_I)/2).
double genfun_limit_rho(double beta, double rho, const ModelParams& params, const TestFunction& tf);

/// Conjectured supercritical canonical functional: the mu = 0 value times
/// J0(sqrt(2 (rho - rho_c_I)) |h0|). Unproven; used for reporting only.
double canonical_hypothesis(double beta, double rho, const ModelParams& params, const TestFunction& tf);

/// (1/kinetic)^{d/2} / [g 2^{d-2} pi^{d/2} d (d+2) Gamma(d/2)].
double constant_C(int d, double g, double kinetic = 1.0);

/// ((rho - rho_c_I)/C)^{2/(d+2)}.
double B_of_rho(double beta, double rho, const ModelParams& params);

/// Exponential Kac density (1/lambda) e^{-(x - rho_c)/lambda} on x >= rho_c,
/// lambda = rho - rho_c.
double kac_density(double x, double rho, double rho_c);

/// First moment of the Kac measure by quadrature.
double kac_mean(double rho, double rho_c, double quad_tol = 1e-12);

enum class KacFamily { PBG, Interacting };

struct KacCheck {
    double mixture = 0.0;
    double direct = 0.0;
    double residual = 0.0;
};

/// |int K(dx) E_base(h) J0(sqrt(2(x - rho_c)) |h0|) - E_super(rho; h)|.
/// PBG uses rho_c_P and E_base = exp(-||h||^2/4 - A_{beta,0}/2); Interacting
/// uses rho_c_I and E_base = genfun_limit_mu(beta, 0). Throws NumericError
/// when the quadrature misses quad_tol.
KacCheck kac_mixture_check(double beta, double rho, const ModelParams& params, const TestFunction& tf,
                           double quad_tol, KacFamily family = KacFamily::Interacting);

enum class Regime { Subcritical, Critical, Supercritical };
std::string to_string(Regime r);

struct LimitReport {
    double beta = 0.0;
    double rho_P = 0.0;
    double rho_c_P = 0.0;
    double rho_c_I = 0.0;
    double rho_0_I = 0.0;
    double mu_limit = 0.0;
    double rho = 0.0;
    double A_hh = 0.0;
    double E_limit = 1.0;
    Regime regime = Regime::Subcritical;
    /// eps0 >= 0: no zero-mode condensate at any density.
    bool no_nonconventional_condensate = false;
};

/// Exactly one of mu, rho must be given. d <= 2 leaves rho_c infinite and
/// only the subcritical branch is reachable.
LimitReport limit_report(double beta, std::optional<double> mu, std::optional<double> rho,
                         const ModelParams& params, const TestFunction& tf);

void to_json(nlohmann::json& j, const LimitReport& r);

}  // namespace bec::tdlimit
