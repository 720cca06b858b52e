#include "bec/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "bec/errors.hpp"
#include "bec/tdlimit.hpp"

namespace bec::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

GrandSpec spec_for(const ModelParams& p, double beta, double mu = 0.0) {
    GrandSpec s;
    s.beta = beta;
    s.mu = mu;
    s.volume = p.volume();
    s.validate();
    return s;
}

std::vector<double> sorted_ladder(std::vector<double> L) {
    if (L.empty()) throw DomainError("ladder: L list is empty");
    for (double x : L)
        if (!(x > 0) || !std::isfinite(x)) throw DomainError("ladder: every L must be finite and > 0");
    std::sort(L.begin(), L.end());
    if (std::adjacent_find(L.begin(), L.end()) != L.end()) throw DomainError("ladder: repeated L");
    return L;
}

ModelParams with_L(ModelParams p, double L) {
    p.L = L;
    p.validate();
    return p;
}

bool decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1]) && !(v[i] == 0.0 && v[i - 1] == 0.0)) return false;
    return true;
}

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_line: x values are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
    return f;
}

ScalingFit mu_scaling_study(const ModelParams& params, double beta, double rho,
                            const std::vector<double>& L_ladder) {
    params.validate();
    if (params.d <= 2) throw DomainError("mu_scaling_study: needs d > 2");
    if (params.gk_profile.is_zero()) throw DomainError("mu_scaling_study: needs a constant g profile");
    const auto ladder = sorted_ladder(L_ladder);
    if (ladder.size() < 4) throw DomainError("mu_scaling_study: the fit needs >= 4 ladder points");
    ScalingFit fit;
    fit.rho = rho;
    fit.rho_c = tdlimit::rho_c_I(beta, params);
    if (!(rho > fit.rho_c)) throw DomainError("mu_scaling_study: rho must exceed rho_c_I");
    fit.theory_slope = -2.0 / (params.d + 2.0);
    fit.theory_B = tdlimit::B_of_rho(beta, rho, params);

    std::vector<double> lx, ly;
    for (double L : ladder) {
        const auto p = with_L(params, L);
        LadderPoint pt;
        pt.L = L;
        pt.V = p.volume();
        pt.mu = solve_mu(p, spec_for(p, beta), rho);
        pt.excluded = !(pt.mu > 0.0);
        if (pt.excluded) {
            fit.warnings.push_back("L=" + fmt17(L) + ": mu <= 0, point excluded from the fit");
        } else {
            lx.push_back(std::log(pt.V));
            ly.push_back(std::log(pt.mu));
        }
        fit.points.push_back(pt);
    }
    if (lx.size() < 2) throw NumericError("mu_scaling_study: fewer than 2 points with mu > 0");
    if (lx.size() < 4) fit.warnings.push_back("fewer than 4 usable points");
    const auto f = fit_line(lx, ly);
    fit.slope = f.slope;
    fit.prefactor = std::exp(f.intercept);
    fit.r_squared = f.r_squared;
    double pinned = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) pinned += ly[i] - fit.theory_slope * lx[i];
    fit.prefactor_pinned = std::exp(pinned / static_cast<double>(lx.size()));
    const std::size_t half = (lx.size() + 1) / 2;
    if (half >= 2 && half < lx.size()) {
        const std::vector<double> ux(lx.end() - half, lx.end()), uy(ly.end() - half, ly.end());
        fit.upper_slope = fit_line(ux, uy).slope;
    } else {
        fit.upper_slope = kNaN;
    }
    return fit;
}

TypeIIIStudy typeIII_study(const ModelParams& params, double beta, double rho,
                           const std::vector<double>& L_ladder, const std::vector<double>& deltas) {
    params.validate();
    const auto ladder = sorted_ladder(L_ladder);
    TypeIIIStudy st;
    st.rho = rho;
    st.rho_c = tdlimit::rho_c_I(beta, params);
    st.excess = std::isfinite(st.rho_c) ? std::max(0.0, rho - st.rho_c) : 0.0;
    std::vector<double> frac;
    for (double L : ladder) {
        const auto p = with_L(params, L);
        auto spec = spec_for(p, beta);
        spec.mu = solve_mu(p, spec, rho);
        CondensatePoint pt;
        pt.L = L;
        pt.V = spec.volume;
        pt.mu = spec.mu;
        pt.report = condensate_scan(p, spec, deltas);
        frac.push_back(pt.report.max_mode_fraction);
        st.points.push_back(std::move(pt));
    }
    st.fraction_strictly_decreasing = true;
    for (std::size_t i = 1; i < frac.size(); ++i)
        if (!(frac[i] < frac[i - 1])) st.fraction_strictly_decreasing = false;
    const auto& last = st.points.back().report;
    st.final_shell_density = last.shell_densities.front().second;
    st.final_shell_rel_error = st.excess > 0 ? std::abs(st.final_shell_density / st.excess - 1.0) : kNaN;
    st.final_macroscopic_modes = last.macroscopic_modes;
    st.final_top_fraction = last.top_modes.empty() ? 0.0 : last.top_modes.front().second;
    st.final_top_rel_error =
        st.excess > 0 && last.macroscopic_modes > 0
            ? std::abs(st.final_top_fraction / (st.excess / static_cast<double>(last.macroscopic_modes)) - 1.0)
            : kNaN;
    return st;
}

ZeroModeStudy zero_mode_study(const ModelParams& params, double beta, double mu,
                              const std::vector<double>& L_ladder) {
    params.validate();
    ZeroModeStudy st;
    st.mu = mu;
    st.target = std::max(0.0, (mu - params.eps0) / params.g0);
    for (double L : sorted_ladder(L_ladder)) {
        const auto p = with_L(params, L);
        const auto b = total_density(p, spec_for(p, beta, mu));
        st.points.push_back({L, b.rho_zero_mode, b.rho_total});
    }
    return st;
}

namespace {

GenfunStudy genfun_study(const ModelParams& params, double beta, double control, bool fixed_rho,
                         const TestFunction& tf, const std::vector<double>& L_ladder) {
    params.validate();
    const auto ladder = sorted_ladder(L_ladder);
    GenfunStudy st;
    st.fixed_rho = fixed_rho;
    st.beta = beta;
    st.control = control;
    st.E_limit = fixed_rho ? tdlimit::genfun_limit_rho(beta, control, params, tf)
                           : tdlimit::genfun_limit_mu(beta, control, params, tf);
    std::vector<double> gaps;
    for (double L : ladder) {
        const auto p = with_L(params, L);
        auto spec = spec_for(p, beta, control);
        if (fixed_rho) spec.mu = solve_mu(p, spec, control);
        const auto g = genfun_finite(p, spec, tf);
        GenfunPoint pt;
        pt.L = L;
        pt.V = spec.volume;
        pt.mu = spec.mu;
        pt.E_finite = g.value;
        pt.gap = std::abs(g.value - st.E_limit);
        pt.modes = g.modes;
        gaps.push_back(pt.gap);
        st.points.push_back(pt);
    }
    st.gaps_decreasing = decreasing(gaps);
    return st;
}

}  // namespace

GenfunStudy genfun_study_mu(const ModelParams& params, double beta, double mu, const TestFunction& tf,
                            const std::vector<double>& L_ladder) {
    return genfun_study(params, beta, mu, false, tf, L_ladder);
}

GenfunStudy genfun_study_rho(const ModelParams& params, double beta, double rho, const TestFunction& tf,
                             const std::vector<double>& L_ladder) {
    return genfun_study(params, beta, rho, true, tf, L_ladder);
}

TruncatedComparison truncated_comparison(const ModelParams& params, double beta, double rho,
                                         const TestFunction& tf, const std::vector<double>& L_ladder) {
    params.validate();
    if (params.gk_profile.is_zero()) throw DomainError("truncated_comparison: params must be the full model");
    ModelParams trunc = params;
    trunc.gk_profile = GProfile::zero();
    const auto full = genfun_study_rho(params, beta, rho, tf, L_ladder);
    const auto zero = genfun_study_rho(trunc, beta, rho, tf, L_ladder);
    TruncatedComparison out;
    out.rho = rho;
    out.E_limit = full.E_limit;
    for (std::size_t i = 0; i < full.points.size(); ++i) {
        const auto& a = full.points[i];
        const auto& b = zero.points[i];
        out.points.push_back({a.L, a.E_finite, b.E_finite, std::abs(a.E_finite - out.E_limit),
                              std::abs(b.E_finite - out.E_limit), std::abs(a.E_finite - b.E_finite)});
    }
    return out;
}

PositivityResult positivity_check(const Functional& E, const std::vector<TestFunction>& tf_set) {
    const std::size_t n = tf_set.size();
    if (n == 0 || n > 12) throw DomainError("positivity_check: set size must be in [1, 12]");
    Eigen::MatrixXcd M(n, n);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t s = l; s < n; ++s) {
            const double phase = 0.5 * tf_set[l].inner(tf_set[s]).imag();
            const std::complex<double> v = E(tf_set[l] - tf_set[s]) * std::polar(1.0, phase);
            M(l, s) = v;
            M(s, l) = std::conj(v);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("positivity_check: eigensolver failed");
    PositivityResult r;
    r.n = n;
    const auto& ev = solver.eigenvalues();
    r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    r.min_eigenvalue = *std::min_element(r.eigenvalues.begin(), r.eigenvalues.end());
    return r;
}

std::vector<TestFunction> random_tf_set(std::mt19937_64& rng, int d, int n) {
    std::uniform_real_distribution<double> mag(0.2, 1.5), phase(0.0, 2.0 * std::numbers::pi),
        width(0.5, 2.0);
    std::uniform_int_distribution<int> terms(1, 2);
    std::vector<TestFunction> out;
    for (int i = 0; i < n; ++i) {
        std::vector<GaussianTerm> t;
        const int m = terms(rng);
        for (int j = 0; j < m; ++j) {
            const double a = mag(rng), ph = phase(rng);
            t.push_back({std::polar(a, ph), width(rng)});
        }
        out.emplace_back(d, std::move(t));
    }
    return out;
}

PositivitySweep positivity_sweep(const ModelParams& params, double beta, double mu_sub, double rho_super,
                                 int sets, std::uint64_t seed) {
    params.validate();
    if (sets < 1) throw DomainError("positivity_sweep: sets must be >= 1");
    PositivitySweep out;
    out.seed = seed;
    out.mu_sub = mu_sub;
    out.rho_super = rho_super;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(3, 8);
    const Functional sub = [&](const TestFunction& h) {
        return tdlimit::genfun_limit_mu(beta, mu_sub, params, h);
    };
    const Functional super = [&](const TestFunction& h) {
        return tdlimit::genfun_limit_rho(beta, rho_super, params, h);
    };
    out.worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < sets; ++k) {
        const auto set = random_tf_set(rng, params.d, size(rng));
        out.sizes.push_back(set.size());
        out.min_eig_sub.push_back(positivity_check(sub, set).min_eigenvalue);
        out.min_eig_super.push_back(positivity_check(super, set).min_eigenvalue);
        out.worst = std::min({out.worst, out.min_eig_sub.back(), out.min_eig_super.back()});
    }
    return out;
}

void to_json(nlohmann::json& j, const ScalingFit& f) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : f.points) pts.push_back({{"L", p.L}, {"V", p.V}, {"mu", p.mu}, {"excluded", p.excluded}});
    j = nlohmann::json{{"points", pts},
                       {"slope", f.slope},
                       {"prefactor", f.prefactor},
                       {"prefactor_pinned_slope", f.prefactor_pinned},
                       {"r_squared", f.r_squared},
                       {"upper_half_slope", num(f.upper_slope)},
                       {"theory_slope", f.theory_slope},
                       {"theory_B", f.theory_B},
                       {"rho", f.rho},
                       {"rho_c", f.rho_c},
                       {"warnings", f.warnings}};
}

void to_json(nlohmann::json& j, const TypeIIIStudy& s) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.points) pts.push_back({{"L", p.L}, {"V", p.V}, {"mu", p.mu}, {"scan", p.report}});
    j = nlohmann::json{{"rho", s.rho},
                       {"rho_c", num(s.rho_c)},
                       {"excess", s.excess},
                       {"points", pts},
                       {"fraction_strictly_decreasing", s.fraction_strictly_decreasing},
                       {"final_shell_density", s.final_shell_density},
                       {"final_shell_rel_error", num(s.final_shell_rel_error)},
                       {"final_macroscopic_modes", s.final_macroscopic_modes},
                       {"final_top_fraction", s.final_top_fraction},
                       {"final_top_rel_error", num(s.final_top_rel_error)}};
}

void to_json(nlohmann::json& j, const ZeroModeStudy& s) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.points)
        pts.push_back({{"L", p.L}, {"rho_zero", p.rho_zero}, {"rho_total", p.rho_total}});
    j = nlohmann::json{{"mu", s.mu}, {"target", s.target}, {"points", pts}};
}

void to_json(nlohmann::json& j, const GenfunStudy& s) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.points)
        pts.push_back({{"L", p.L}, {"V", p.V}, {"mu", p.mu}, {"E_finite", p.E_finite}, {"gap", p.gap},
                       {"modes", p.modes}});
    j = nlohmann::json{{s.fixed_rho ? "rho" : "mu", s.control},
                       {"beta", s.beta},
                       {"E_limit", s.E_limit},
                       {"points", pts},
                       {"gaps_decreasing", s.gaps_decreasing}};
}

void to_json(nlohmann::json& j, const TruncatedComparison& s) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.points)
        pts.push_back({{"L", p.L}, {"E_full", p.E_full}, {"E_truncated", p.E_truncated},
                       {"gap_full", p.gap_full}, {"gap_truncated", p.gap_truncated},
                       {"mutual_gap", p.mutual_gap}});
    j = nlohmann::json{{"rho", s.rho}, {"E_limit", s.E_limit}, {"points", pts}};
}

void to_json(nlohmann::json& j, const PositivityResult& r) {
    j = nlohmann::json{{"n", r.n}, {"min_eigenvalue", r.min_eigenvalue}, {"eigenvalues", r.eigenvalues}};
}

void to_json(nlohmann::json& j, const PositivitySweep& s) {
    j = nlohmann::json{{"seed", s.seed},         {"mu_sub", s.mu_sub},
                       {"rho_super", s.rho_super}, {"sizes", s.sizes},
                       {"min_eig_sub", s.min_eig_sub}, {"min_eig_super", s.min_eig_super},
                       {"worst", s.worst}};
}

std::string to_csv(const ScalingFit& f) {
    std::ostringstream o;
    o << "L,V,mu,excluded\n";
    for (const auto& p : f.points) o << fmt17(p.L) << ',' << fmt17(p.V) << ',' << fmt17(p.mu) << ',' << p.excluded << '\n';
    return o.str();
}

std::string to_csv(const TypeIIIStudy& s) {
    std::ostringstream o;
    o << "L,V,mu,classification,max_mode_fraction,rho_zero_mode,rho_Dminus,macroscopic_modes,delta,shell_density\n";
    for (const auto& p : s.points)
        for (const auto& [delta, rho] : p.report.shell_densities)
            o << fmt17(p.L) << ',' << fmt17(p.V) << ',' << fmt17(p.mu) << ',' << to_string(p.report.classification)
              << ',' << fmt17(p.report.max_mode_fraction) << ',' << fmt17(p.report.rho_zero_mode) << ','
              << fmt17(p.report.density.rho_Dminus) << ',' << p.report.macroscopic_modes << ',' << fmt17(delta)
              << ',' << fmt17(rho) << '\n';
    return o.str();
}

std::string to_csv(const GenfunStudy& s) {
    std::ostringstream o;
    o << "L,V,mu,E_finite,E_limit,gap\n";
    for (const auto& p : s.points)
        o << fmt17(p.L) << ',' << fmt17(p.V) << ',' << fmt17(p.mu) << ',' << fmt17(p.E_finite) << ','
          << fmt17(s.E_limit) << ',' << fmt17(p.gap) << '\n';
    return o.str();
}

std::string to_csv(const TruncatedComparison& s) {
    std::ostringstream o;
    o << "L,E_full,E_truncated,E_limit,gap_full,gap_truncated,mutual_gap\n";
    for (const auto& p : s.points)
        o << fmt17(p.L) << ',' << fmt17(p.E_full) << ',' << fmt17(p.E_truncated) << ',' << fmt17(s.E_limit) << ','
          << fmt17(p.gap_full) << ',' << fmt17(p.gap_truncated) << ',' << fmt17(p.mutual_gap) << '\n';
    return o.str();
}

std::string to_csv(const PositivitySweep& s) {
    std::ostringstream o;
    o << "set,n,min_eig_sub,min_eig_super\n";
    for (std::size_t i = 0; i < s.sizes.size(); ++i)
        o << i << ',' << s.sizes[i] << ',' << fmt17(s.min_eig_sub[i]) << ',' << fmt17(s.min_eig_super[i]) << '\n';
    return o.str();
}

}  // namespace bec::experiments
