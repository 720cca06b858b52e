#include "bec/tdlimit.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bec/errors.hpp"
#include "bec/numeric.hpp"
#include "bec/specfun.hpp"

namespace bec::tdlimit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be > 0");
}

void check_mu(double mu, int d) {
    if (d < 1) throw DomainError("dimension must be >= 1");
    if (mu > 0.0) throw DomainError("limit densities need mu <= 0");
    if (mu == 0.0 && d <= 2)
        throw DivergenceError("mu = 0 integral diverges for d <= 2 (rho_c = +inf)");
}

// (2pi)^{-d} S_d int_0^inf k^{d-1} weight(k^2) / (e^{beta(kappa k^2 - mu)} - 1) dk
template <class Weight>
double radial_bose_integral(double beta, double mu, int d, double kinetic, Weight&& weight,
                            double k_decay) {
    const double k_bose = std::sqrt((std::max(mu, 0.0) + 745.0 / beta) / kinetic);
    const double k_max = std::min(k_bose, k_decay);
    auto f = [&](double k) {
        if (k == 0.0) return 0.0;
        const double x = beta * (kinetic * k * k - mu);
        return std::pow(k, d - 1) * weight(k * k) / std::expm1(x);
    };
    // geometric refinement toward k = 0, where the mu = 0 integrand is peaked
    std::vector<double> breaks{0.0};
    for (int j = 40; j >= 1; --j) breaks.push_back(k_max * std::ldexp(1.0, -j));
    for (int i = 1; i <= 16; ++i) breaks.push_back(k_max * (0.5 + 0.5 * i / 16.0));
    const auto r = integrate_pieces(f, breaks, 1e-13, 1e-300, 20000);
    return unit_sphere_area(d) * r.value / std::pow(2.0 * std::numbers::pi, d);
}

}  // namespace

double rho_P(double beta, double mu, int d, double kinetic) {
    check_beta(beta);
    check_mu(mu, d);
    if (!(kinetic > 0.0)) throw DomainError("kinetic must be > 0");
    return radial_bose_integral(beta, mu, d, kinetic, [](double) { return 1.0; }, kInf);
}

double rho_c_P(double beta, int d, double kinetic) { return rho_P(beta, 0.0, d, kinetic); }

double rho_0_I(double /*beta*/, double mu, double eps0, double g0) {
    if (!(g0 > 0.0)) throw DomainError("g0 must be > 0");
    return std::max(0.0, (mu - eps0) / g0);
}

double rho_c_I(double beta, const ModelParams& params) {
    params.validate();
    return rho_c_P(beta, params.d, params.kinetic) + std::max(0.0, -params.eps0 / params.g0);
}

double rho_I(double beta, double mu, const ModelParams& params) {
    return rho_P(beta, mu, params.d, params.kinetic) + rho_0_I(beta, mu, params.eps0, params.g0);
}

double quad_form_A(double beta, double mu, const TestFunction& tf, int d, double kinetic) {
    check_beta(beta);
    check_mu(mu, d);
    if (tf.dim() != d) throw DomainError("quad_form_A: test function dimension mismatch");
    if (tf.is_zero()) return 0.0;
    const double w = tf.min_width();
    return radial_bose_integral(beta, mu, d, kinetic, [&tf](double k2) { return tf.abs_sq(k2); },
                                std::sqrt(800.0) / w);
}

double mu_of_rho_limit(double beta, double rho, const ModelParams& params) {
    check_beta(beta);
    params.validate();
    if (!(rho > 0.0)) throw DomainError("mu_of_rho_limit: rho must be > 0");
    if (params.d > 2 && rho >= rho_c_I(beta, params)) return 0.0;
    auto excess = [&](double mu) { return rho_I(beta, mu, params) - rho; };
    double lo = -1.0;
    while (excess(lo) >= 0.0) {
        lo *= 2.0;
        if (lo < -1e6) throw SolverError("mu_of_rho_limit: no lower bracket", lo, 0.0);
    }
    double hi = lo / 2.0;
    if (excess(hi) < 0.0) hi = 0.0;
    // bisection; mu = 0 itself is never evaluated
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double genfun_limit_mu(double beta, double mu, const ModelParams& params, const TestFunction& tf) {
    params.validate();
    if (tf.is_zero()) return 1.0;
    const double r0 = rho_0_I(beta, mu, params.eps0, params.g0);
    const double h0 = std::abs(tf.value_at_zero());
    const double a = quad_form_A(beta, mu, tf, params.d, params.kinetic);
    return specfun::bessel_j0(std::sqrt(2.0 * r0) * h0) * std::exp(-tf.norm_sq() / 4.0 - a / 2.0);
}

double genfun_limit_rho(double beta, double rho, const ModelParams& params, const TestFunction& tf) {
    const double mu = mu_of_rho_limit(beta, rho, params);
    if (mu < 0.0) return genfun_limit_mu(beta, mu, params, tf);
    if (params.d <= 2) throw DomainError("genfun_limit_rho: supercritical branch needs d > 2");
    const double excess = rho - rho_c_I(beta, params);
    const double h0 = std::abs(tf.value_at_zero());
    return genfun_limit_mu(beta, 0.0, params, tf) * std::exp(-0.5 * h0 * h0 * excess);
}

double canonical_hypothesis(double beta, double rho, const ModelParams& params, const TestFunction& tf) {
    if (params.d <= 2) throw DomainError("canonical_hypothesis: needs d > 2");
    const double excess = rho - rho_c_I(beta, params);
    if (!(excess > 0.0)) throw DomainError("canonical_hypothesis: rho must exceed rho_c_I");
    const double h0 = std::abs(tf.value_at_zero());
    return genfun_limit_mu(beta, 0.0, params, tf) * specfun::bessel_j0(std::sqrt(2.0 * excess) * h0);
}

double constant_C(int d, double g, double kinetic) {
    if (d <= 2) throw DomainError("constant_C: requires d > 2");
    if (!(g > 0.0) || !(kinetic > 0.0)) throw DomainError("constant_C: g and kinetic must be > 0");
    const double dd = d;
    return std::pow(1.0 / kinetic, dd / 2.0) /
           (g * std::pow(2.0, dd - 2.0) * std::pow(std::numbers::pi, dd / 2.0) * dd * (dd + 2.0) *
            std::tgamma(dd / 2.0));
}

double B_of_rho(double beta, double rho, const ModelParams& params) {
    params.validate();
    if (params.gk_profile.is_zero()) throw DomainError("B_of_rho: requires a constant g profile");
    const double excess = rho - rho_c_I(beta, params);
    if (excess < 0.0) throw DomainError("B_of_rho: rho below the critical density");
    const double C = constant_C(params.d, params.gk_profile.value(), params.kinetic);
    return std::pow(excess / C, 2.0 / (params.d + 2.0));
}

double kac_density(double x, double rho, double rho_c) {
    const double lambda = rho - rho_c;
    if (!(lambda > 0.0)) throw DomainError("kac_density: rho must exceed rho_c");
    if (x < rho_c) return 0.0;
    return std::exp(-(x - rho_c) / lambda) / lambda;
}

double kac_mean(double rho, double rho_c, double quad_tol) {
    const double lambda = rho - rho_c;
    if (!(lambda > 0.0)) throw DomainError("kac_mean: rho must exceed rho_c");
    const double x_max = rho_c + lambda * (std::log(1.0 / quad_tol) + 50.0);
    auto f = [&](double x) { return x * kac_density(x, rho, rho_c); };
    std::vector<double> breaks;
    for (int i = 0; i <= 64; ++i) breaks.push_back(rho_c + (x_max - rho_c) * i / 64.0);
    return integrate_pieces(f, breaks, 0.0, 0.01 * quad_tol).value;
}

KacCheck kac_mixture_check(double beta, double rho, const ModelParams& params, const TestFunction& tf,
                           double quad_tol, KacFamily family) {
    params.validate();
    if (params.d <= 2) throw DomainError("kac_mixture_check: requires d > 2");
    const double rho_c = family == KacFamily::PBG ? rho_c_P(beta, params.d, params.kinetic)
                                                  : rho_c_I(beta, params);
    const double lambda = rho - rho_c;
    if (!(lambda > 0.0)) throw DomainError("kac_mixture_check: rho must exceed the critical density");
    KacCheck out;
    if (tf.is_zero()) {
        out.mixture = out.direct = 1.0;
        return out;
    }
    double base;
    if (family == KacFamily::PBG)
        base = std::exp(-tf.norm_sq() / 4.0 -
                        quad_form_A(beta, 0.0, tf, params.d, params.kinetic) / 2.0);
    else
        base = genfun_limit_mu(beta, 0.0, params, tf);
    const double h0 = std::abs(tf.value_at_zero());
    // base is constant in x, so the mixture is base times the Kac-weighted J0 integral
    out.mixture = base * specfun::laplace_j0_lhs(lambda, h0, quad_tol);
    out.direct = base * std::exp(-0.5 * h0 * h0 * lambda);
    out.residual = std::abs(out.mixture - out.direct);
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "unknown";
}

LimitReport limit_report(double beta, std::optional<double> mu, std::optional<double> rho,
                         const ModelParams& params, const TestFunction& tf) {
    params.validate();
    if (mu.has_value() == rho.has_value())
        throw DomainError("limit_report: exactly one of mu or rho must be given");
    LimitReport r;
    r.beta = beta;
    r.no_nonconventional_condensate = !params.nonconventional_possible();
    const bool finite_c = params.d > 2;
    r.rho_c_P = finite_c ? rho_c_P(beta, params.d, params.kinetic) : kInf;
    r.rho_c_I = finite_c ? rho_c_I(beta, params) : kInf;
    if (mu) {
        r.mu_limit = *mu;
        r.rho_P = rho_P(beta, *mu, params.d, params.kinetic);
        r.rho_0_I = rho_0_I(beta, *mu, params.eps0, params.g0);
        r.rho = r.rho_P + r.rho_0_I;
        r.regime = *mu < 0.0 ? Regime::Subcritical : Regime::Critical;
        r.A_hh = quad_form_A(beta, *mu, tf, params.d, params.kinetic);
        r.E_limit = genfun_limit_mu(beta, *mu, params, tf);
    } else {
        r.rho = *rho;
        r.mu_limit = mu_of_rho_limit(beta, *rho, params);
        r.rho_P = finite_c && r.mu_limit == 0.0 ? r.rho_c_P
                                                 : rho_P(beta, r.mu_limit, params.d, params.kinetic);
        r.rho_0_I = rho_0_I(beta, r.mu_limit, params.eps0, params.g0);
        r.regime = *rho < r.rho_c_I    ? Regime::Subcritical
                   : *rho == r.rho_c_I ? Regime::Critical
                                       : Regime::Supercritical;
        r.A_hh = quad_form_A(beta, r.mu_limit, tf, params.d, params.kinetic);
        r.E_limit = genfun_limit_rho(beta, *rho, params, tf);
    }
    return r;
}

void to_json(nlohmann::json& j, const LimitReport& r) {
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"); };
    j = nlohmann::json{{"beta", r.beta},
                       {"rho", r.rho},
                       {"rho_P", r.rho_P},
                       {"rho_c_P", num(r.rho_c_P)},
                       {"rho_c_I", num(r.rho_c_I)},
                       {"rho_0_I", r.rho_0_I},
                       {"mu_limit", r.mu_limit},
                       {"A_hh", r.A_hh},
                       {"E_limit", r.E_limit},
                       {"regime", to_string(r.regime)},
                       {"no_nonconventional_condensate", r.no_nonconventional_condensate}};
}

}  // namespace bec::tdlimit
