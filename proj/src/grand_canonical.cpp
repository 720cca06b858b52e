#include "bec/grand_canonical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bec/errors.hpp"
#include "bec/numeric.hpp"
#include "bec/parallel.hpp"

namespace bec {

double first_excited_energy(const ModelParams& params) { return params.energy_unit(); }

void check_spec_for_model(const ModelParams& params, const GrandSpec& spec) {
    params.validate();
    spec.validate();
    if (params.gk_profile.is_zero() && !(spec.mu < first_excited_energy(params)))
        throw DivergenceError("free k != 0 modes need mu below the first excited energy");
}

double model_density_cutoff(const ModelParams& params, const GrandSpec& spec, double density_tol) {
    // <N_k> <= 1/(e^{beta(eps - mu - g/V)} - 1) above the cutoff
    const double mu_eff = spec.mu + params.gk_profile.value() / spec.volume;
    const double cut = density_cutoff(params, spec.beta, mu_eff, density_tol);
    return std::max(cut, params.energy_unit());
}

std::vector<ShellOccupation> shell_occupations(const ModelParams& params, const GrandSpec& spec,
                                               double eps_cutoff) {
    check_spec_for_model(params, spec);
    const auto shells = enumerate_shells(params, eps_cutoff);
    std::vector<ShellOccupation> out(shells.size());
    parallel_for(shells.size(), [&](std::size_t i) {
        const auto& sh = shells[i];
        ShellOccupation& o = out[i];
        o.s_sq = sh.s_sq;
        o.multiplicity = sh.multiplicity;
        o.k_norm_sq = sh.k_norm_sq;
        o.eps = sh.eps;
        o.g = sh.g;
        if (sh.g == 0.0)
            o.occupation = 1.0 / std::expm1(spec.beta * (sh.eps - spec.mu));
        else
            o.occupation = mode_occupation(sh.representative(), spec);
    });
    return out;
}

DensityBreakdown total_density(const ModelParams& params, const GrandSpec& spec) {
    DensityBreakdown b;
    b.mu = spec.mu;
    b.V = spec.volume;
    b.eps_cutoff = model_density_cutoff(params, spec);
    const auto occ = shell_occupations(params, spec, b.eps_cutoff);
    CompensatedSum zero, minus, plus;
    for (const auto& o : occ) {
        const double density = static_cast<double>(o.multiplicity) * o.occupation / spec.volume;
        b.modes += o.multiplicity;
        if (o.s_sq == 0) {
            zero += density;
            continue;
        }
        b.max_mode_fraction = std::max(b.max_mode_fraction, o.occupation / spec.volume);
        if (o.eps - spec.mu - o.g / (2.0 * spec.volume) < 0.0)
            minus += density;
        else
            plus += density;
    }
    b.rho_zero_mode = zero.value();
    b.rho_Dminus = minus.value();
    b.rho_Dplus = plus.value();
    CompensatedSum total;
    total += zero;
    total += minus;
    total += plus;
    b.rho_total = total.value();
    const double mu_eff = spec.mu + params.gk_profile.value() / spec.volume;
    b.tail_bound = occupation_tail_bound(params, spec.beta, mu_eff, max_index_sq(params, b.eps_cutoff)) /
                   spec.volume;
    return b;
}

double solve_mu(const ModelParams& params, const GrandSpec& spec_template, double rho, double rel_tol) {
    params.validate();
    spec_template.validate();
    if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("solve_mu: rho must be > 0");
    GrandSpec spec = spec_template;
    auto density = [&](double mu) {
        spec.mu = mu;
        return total_density(params, spec).rho_total;
    };
    const double beta = spec.beta;
    double lo = params.eps0 - 10.0 / beta;
    double hi = params.eps0 + params.g0 * rho + 1.0;
    const bool capped = params.gk_profile.is_zero();
    const double cap = first_excited_energy(params);
    if (capped) {
        if (lo >= cap) lo = cap - 10.0 / beta;
        if (hi >= cap) hi = cap - std::min(1.0, 0.5 * (cap - lo));
    }

    int steps = 0;
    while (density(lo) > rho) {
        const double width = hi - lo;
        hi = lo;
        lo -= 2.0 * width;
        if (++steps > 200) throw SolverError("solve_mu: lower bracket expansion failed", lo, hi);
    }
    while (density(hi) < rho) {
        const double width = hi - lo;
        lo = hi;
        if (capped)
            hi = cap - 0.5 * (cap - hi);
        else
            hi += 2.0 * width + 1.0;
        if (++steps > 200) throw SolverError("solve_mu: upper bracket expansion failed", lo, hi);
    }

    double best = 0.5 * (lo + hi);
    double best_res = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = density(mid);
        const double res = std::abs(r - rho);
        if (res < best_res) {
            best_res = res;
            best = mid;
        }
        if (res <= rel_tol * rho) return mid;
        if (mid == lo || mid == hi) break;
        (r < rho ? lo : hi) = mid;
    }
    if (best_res > rel_tol * rho)
        throw NumericError("solve_mu: bisection stalled above tolerance", best_res / rho);
    return best;
}

std::string to_string(CondensateType t) {
    switch (t) {
        case CondensateType::None: return "None";
        case CondensateType::NonConventionalOnly: return "NonConventionalOnly";
        case CondensateType::TypeIII: return "TypeIII";
        case CondensateType::TypeI: return "TypeI";
    }
    return "unknown";
}

CondensateReport condensate_scan(const ModelParams& params, const GrandSpec& spec,
                                 const std::vector<double>& deltas) {
    if (deltas.empty()) throw DomainError("condensate_scan: deltas must be non-empty");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw DomainError("condensate_scan: deltas must be > 0");
        if (i > 0 && !(deltas[i] > deltas[i - 1]))
            throw DomainError("condensate_scan: deltas must be ascending");
    }
    CondensateReport rep;
    rep.density = total_density(params, spec);
    rep.max_mode_fraction = rep.density.max_mode_fraction;
    rep.rho_zero_mode = rep.density.rho_zero_mode;

    const double d_max = deltas.back();
    const double cut = std::max(rep.density.eps_cutoff, params.kinetic * d_max * d_max);
    const auto occ = shell_occupations(params, spec, cut);

    // D- part of the smallest shell: the non-extensive condensate sits there
    double condensed_small = 0.0;
    for (double delta : deltas) {
        CompensatedSum all, minus;
        for (const auto& o : occ) {
            if (o.s_sq == 0 || !(o.k_norm_sq < delta * delta)) continue;
            const double density = static_cast<double>(o.multiplicity) * o.occupation / spec.volume;
            all += density;
            if (o.eps - spec.mu - o.g / (2.0 * spec.volume) < 0.0) minus += density;
        }
        rep.shell_densities.emplace_back(delta, all.value());
        if (delta == deltas.front()) condensed_small = minus.value();
    }

    std::vector<std::pair<std::int64_t, double>> fractions;
    for (const auto& o : occ) {
        if (o.s_sq == 0) continue;
        const double f = o.occupation / spec.volume;
        fractions.emplace_back(o.s_sq, f);
        if (f > kMacroscopicFraction) rep.macroscopic_modes += o.multiplicity;
    }
    std::stable_sort(fractions.begin(), fractions.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (fractions.size() > 8) fractions.resize(8);
    rep.top_modes = fractions;

    if (condensed_small > kTypeIIIRatio * rep.max_mode_fraction && condensed_small > kTypeIIIFloor)
        rep.classification = CondensateType::TypeIII;
    else if (rep.macroscopic_modes > 0)
        rep.classification = CondensateType::TypeI;
    else if (rep.rho_zero_mode > kMacroscopicFraction)
        rep.classification = CondensateType::NonConventionalOnly;
    else
        rep.classification = CondensateType::None;
    return rep;
}

GenfunFinite genfun_finite(const ModelParams& params, const GrandSpec& spec, const TestFunction& tf) {
    check_spec_for_model(params, spec);
    if (tf.dim() != params.d) throw DomainError("genfun_finite: test function dimension mismatch");
    GenfunFinite out;
    if (tf.is_zero()) return out;
    const double cut = std::max(model_density_cutoff(params, spec), tf_cutoff(params, tf, 1e-12));
    const auto shells = enumerate_shells(params, cut);
    std::vector<double> factor(shells.size());
    parallel_for(shells.size(), [&](std::size_t i) {
        const auto& sh = shells[i];
        const double h2 = tf.abs_sq(sh.k_norm_sq);
        factor[i] = sh.g == 0.0 ? mode_weyl_factor_free(sh.representative(), spec, h2)
                                : mode_weyl_factor(sh.representative(), spec, h2);
    });
    CompensatedSum log_abs;
    for (std::size_t i = 0; i < shells.size(); ++i) {
        out.modes += shells[i].multiplicity;
        const double f = factor[i];
        if (f == 0.0) {
            out.value = 0.0;
            out.sign = 0;
            out.log_abs = -std::numeric_limits<double>::infinity();
            return out;
        }
        if (f < 0.0 && shells[i].multiplicity % 2 == 1) out.sign = -out.sign;
        log_abs += static_cast<double>(shells[i].multiplicity) * std::log(std::abs(f));
    }
    out.log_abs = log_abs.value();
    out.value = out.sign * std::exp(out.log_abs);
    // dropped modes: |log Gamma_k| <= (|h_k|^2/4V)(1 + 2<N_k>) up to O(x^2) corrections
    const auto max_sq = max_index_sq(params, cut);
    const double mu_eff = spec.mu + params.gk_profile.value() / spec.volume;
    const double eps_next = params.energy_unit() * static_cast<double>(max_sq + 1);
    const double n_cut = eps_next > mu_eff ? 1.0 / std::expm1(spec.beta * (eps_next - mu_eff))
                                           : std::numeric_limits<double>::infinity();
    out.log_tail_bound = 0.5 * (1.0 + 2.0 * n_cut) * tf_tail_bound(params, tf, max_sq);
    return out;
}

void to_json(nlohmann::json& j, const DensityBreakdown& b) {
    j = nlohmann::json{{"rho_total", b.rho_total},
                       {"rho_zero_mode", b.rho_zero_mode},
                       {"rho_Dminus", b.rho_Dminus},
                       {"rho_Dplus", b.rho_Dplus},
                       {"max_mode_fraction", b.max_mode_fraction},
                       {"mu", b.mu},
                       {"V", b.V},
                       {"tail_bound", b.tail_bound},
                       {"eps_cutoff", b.eps_cutoff},
                       {"modes", b.modes}};
}

void to_json(nlohmann::json& j, const CondensateReport& r) {
    nlohmann::json shells = nlohmann::json::array();
    for (auto [delta, rho] : r.shell_densities) shells.push_back({{"delta", delta}, {"density", rho}});
    nlohmann::json top = nlohmann::json::array();
    for (auto [s_sq, f] : r.top_modes) top.push_back({{"s_sq", s_sq}, {"fraction", f}});
    j = nlohmann::json{{"classification", to_string(r.classification)},
                       {"shell_densities", shells},
                       {"evidence",
                        {{"max_mode_fraction", r.max_mode_fraction},
                         {"rho_zero_mode", r.rho_zero_mode},
                         {"macroscopic_modes", r.macroscopic_modes},
                         {"top_modes", top}}},
                       {"density", r.density}};
}

void to_json(nlohmann::json& j, const GenfunFinite& g) {
    j = nlohmann::json{{"value", g.value},
                       {"sign", g.sign},
                       {"log_abs", std::isfinite(g.log_abs) ? nlohmann::json(g.log_abs) : nlohmann::json("-inf")},
                       {"log_tail_bound", g.log_tail_bound},
                       {"modes", g.modes}};
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string density_csv_header() {
    return "d,L,beta,mu,rho_total,rho_zero,rho_Dminus,rho_Dplus,max_mode_fraction";
}

std::string density_csv_row(const ModelParams& params, double beta, const DensityBreakdown& b) {
    std::string row = std::to_string(params.d);
    for (double x : {params.L, beta, b.mu, b.rho_total, b.rho_zero_mode, b.rho_Dminus, b.rho_Dplus,
                     b.max_mode_fraction})
        row += "," + fmt17(x);
    return row;
}

}  // namespace bec
