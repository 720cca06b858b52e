#include "bec/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "bec/errors.hpp"
#include "bec/grand_canonical.hpp"
#include "bec/parallel.hpp"
#include "bec/single_mode.hpp"
#include "bec/specfun.hpp"
#include "bec/tdlimit.hpp"

namespace bec {

namespace {

constexpr double kLogCut = 40.0;

void renormalize(ModePoly& p) {
    double m = 0.0;
    for (double c : p.coeffs) m = std::max(m, std::abs(c));
    if (m == 0.0 || !std::isfinite(m)) {
        if (!std::isfinite(m)) throw NumericError("canonical: non-finite polynomial coefficient");
        p.scale = 0.0;
        return;
    }
    for (double& c : p.coeffs) c /= m;
    p.scale += std::log(m);
}

void check_degree(int N) {
    if (N < 0) throw DomainError("canonical: N must be >= 0, got " + std::to_string(N));
}

ModePoly unit_poly() { return ModePoly{{1.0}, 0.0}; }

void check_work(std::int64_t modes, int N) {
    const double work = static_cast<double>(modes) * (static_cast<double>(N) + 1.0);
    if (work > kCanonicalWorkCap)
        throw ResourceError("canonical: modes x (N+1) = " + std::to_string(work) +
                            " exceeds the cap " + std::to_string(kCanonicalWorkCap));
}

GrandSpec matched_spec(const ModelParams& params, double beta) {
    GrandSpec s;
    s.beta = beta;
    s.volume = params.volume();
    s.validate();
    return s;
}

}  // namespace

bool ModePoly::is_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
}

double LogCoeff::value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

ModePoly poly_from_weights(const std::vector<double>& weights) {
    if (weights.empty()) throw DomainError("poly_from_weights: empty weight list");
    for (double w : weights)
        if (!std::isfinite(w)) throw DomainError("poly_from_weights: non-finite weight");
    ModePoly p{weights, 0.0};
    renormalize(p);
    return p;
}

ModePoly poly_multiply(const ModePoly& a, const ModePoly& b, int N) {
    check_degree(N);
    const int deg = std::min(N, a.degree() + b.degree());
    ModePoly c{std::vector<double>(static_cast<std::size_t>(deg) + 1, 0.0), a.scale + b.scale};
    for (int i = 0; i <= std::min(a.degree(), deg); ++i) {
        const double ai = a.coeffs[i];
        if (ai == 0.0) continue;
        const int jmax = std::min(b.degree(), deg - i);
        for (int j = 0; j <= jmax; ++j) c.coeffs[i + j] += ai * b.coeffs[j];
    }
    renormalize(c);
    return c;
}

ModePoly poly_power(const ModePoly& p, std::int64_t k, int N) {
    if (k < 0) throw DomainError("poly_power: negative exponent");
    ModePoly result = unit_poly();
    ModePoly base = p;
    while (k > 0) {
        if (k & 1) result = poly_multiply(result, base, N);
        k >>= 1;
        if (k > 0) base = poly_multiply(base, base, N);
    }
    return result;
}

ModePoly poly_product(const std::vector<ModePoly>& factors,
                      const std::vector<std::int64_t>& multiplicity, int N, ProductOrder order) {
    check_degree(N);
    if (factors.size() != multiplicity.size())
        throw DomainError("poly_product: factor and multiplicity lists differ in length");
    if (order == ProductOrder::Sequential) {
        ModePoly acc = unit_poly();
        for (std::size_t i = 0; i < factors.size(); ++i)
            for (std::int64_t m = 0; m < multiplicity[i]; ++m) acc = poly_multiply(acc, factors[i], N);
        return acc;
    }
    std::vector<ModePoly> level(factors.size());
    parallel_for(factors.size(),
                 [&](std::size_t i) { level[i] = poly_power(factors[i], multiplicity[i], N); });
    if (level.empty()) return unit_poly();
    while (level.size() > 1) {
        std::vector<ModePoly> next((level.size() + 1) / 2);
        parallel_for(level.size() / 2,
                     [&](std::size_t i) { next[i] = poly_multiply(level[2 * i], level[2 * i + 1], N); });
        if (level.size() % 2 == 1) next.back() = std::move(level.back());
        level = std::move(next);
    }
    return level.front();
}

LogCoeff coefficient(const ModePoly& p, int N) {
    check_degree(N);
    LogCoeff out;
    if (N > p.degree() || p.coeffs[N] == 0.0) {
        out.log_abs = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.sign = p.coeffs[N] > 0 ? 1 : -1;
    out.log_abs = p.scale + std::log(std::abs(p.coeffs[N]));
    return out;
}

double enumerate_coefficient(const std::vector<std::vector<double>>& weights, int N) {
    check_degree(N);
    // depth-first over n_0, n_1, ... with the last mode taking the remainder
    std::function<double(std::size_t, int)> rec = [&](std::size_t k, int left) -> double {
        const auto& w = weights[k];
        if (k + 1 == weights.size()) return left < static_cast<int>(w.size()) ? w[left] : 0.0;
        double s = 0.0;
        for (int n = 0; n <= left && n < static_cast<int>(w.size()); ++n) s += w[n] * rec(k + 1, left - n);
        return s;
    };
    if (weights.empty()) return N == 0 ? 1.0 : 0.0;
    return rec(0, N);
}

ModePoly mode_poly(const Mode& mode, double beta, double volume, int N, double weyl_x) {
    check_degree(N);
    if (!(beta > 0) || !(volume > 0)) throw DomainError("mode_poly: beta and volume must be > 0");
    const double b = mode.g / (2.0 * volume);
    std::vector<double> phi;
    phi.reserve(static_cast<std::size_t>(std::min(N, 4096)) + 1);
    double best = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= N; ++n) {
        const double v = -beta * (mode.eps * n + b * n * (n - 1.0));
        // concave in n: once past the peak and e^-40 below it, the rest is smaller
        if (n > 0 && v < phi.back() && v < best - kLogCut) break;
        phi.push_back(v);
        best = std::max(best, v);
    }
    ModePoly p{std::vector<double>(phi.size()), best};
    for (std::size_t n = 0; n < phi.size(); ++n) p.coeffs[n] = std::exp(phi[n] - best);
    if (weyl_x >= 0.0) {
        const auto lag = specfun::laguerre_sequence(p.degree(), weyl_x);
        for (std::size_t n = 0; n < phi.size(); ++n) p.coeffs[n] *= lag.values[n];
        p.scale -= 0.5 * weyl_x;
        renormalize(p);
    }
    return p;
}

namespace {

struct ShellSet {
    std::vector<ModeShell> shells;
    std::int64_t modes = 0;
};

ShellSet shells_for(const ModelParams& params, double eps_cutoff, int N) {
    ShellSet out;
    out.shells = enumerate_shells(params, eps_cutoff);
    for (const auto& sh : out.shells) out.modes += sh.multiplicity;
    check_work(out.modes, N);
    return out;
}

double log_partition_of(const std::vector<ModeShell>& shells, const ModelParams& params, double beta,
                        int N, ProductOrder order) {
    const double V = params.volume();
    std::vector<ModePoly> polys(shells.size());
    std::vector<std::int64_t> mult(shells.size());
    parallel_for(shells.size(), [&](std::size_t i) {
        polys[i] = mode_poly(shells[i].representative(), beta, V, N);
        mult[i] = shells[i].multiplicity;
    });
    const auto c = coefficient(poly_product(polys, mult, N, order), N);
    if (c.sign <= 0) throw NumericError("canonical_partition: Z_N underflowed to zero");
    return c.log_abs;
}

}  // namespace

CanonicalPartition canonical_partition(const ModelParams& params, double beta, int N,
                                       double eps_cutoff, ProductOrder order) {
    params.validate();
    check_degree(N);
    if (!(beta > 0)) throw DomainError("canonical_partition: beta must be > 0");
    const auto set = shells_for(params, eps_cutoff, N);
    CanonicalPartition out;
    out.N = N;
    out.V = params.volume();
    out.modes = set.modes;
    out.log_Z = log_partition_of(set.shells, params, beta, N, order);
    out.free_energy = -out.log_Z / (beta * out.V);
    return out;
}

CanonicalGenfun canonical_genfun(const ModelParams& params, double beta, int N, const TestFunction& tf,
                                 double eps_cutoff, ProductOrder order) {
    params.validate();
    check_degree(N);
    if (!(beta > 0)) throw DomainError("canonical_genfun: beta must be > 0");
    if (tf.dim() != params.d) throw DomainError("canonical_genfun: test function dimension mismatch");
    const double cut = tf.is_zero() ? eps_cutoff : std::max(eps_cutoff, tf_cutoff(params, tf, 1e-12));
    const auto set = shells_for(params, cut, N);
    const double V = params.volume();
    CanonicalGenfun out;
    out.N = N;
    out.modes = set.modes;
    out.log_Z = log_partition_of(set.shells, params, beta, N, order);
    if (tf.is_zero()) return out;

    const auto& shells = set.shells;
    std::vector<ModePoly> polys(shells.size());
    std::vector<std::int64_t> mult(shells.size());
    parallel_for(shells.size(), [&](std::size_t i) {
        const double x = tf.abs_sq(shells[i].k_norm_sq) / (2.0 * V);
        polys[i] = mode_poly(shells[i].representative(), beta, V, N, x);
        mult[i] = shells[i].multiplicity;
    });
    const auto num = coefficient(poly_product(polys, mult, N, order), N);
    out.value = num.sign == 0 ? 0.0 : num.sign * std::exp(num.log_abs - out.log_Z);
    return out;
}

double canonical_default_cutoff(const ModelParams& params, double beta, int N) {
    params.validate();
    check_degree(N);
    auto spec = matched_spec(params, beta);
    if (N == 0) return first_excited_energy(params);
    spec.mu = solve_mu(params, spec, N / spec.volume);
    return model_density_cutoff(params, spec, 1e-12);
}

EquivalenceGap equivalence_gap(const ModelParams& params, double beta, double rho, const TestFunction& tf,
                               double L) {
    if (!(rho > 0) || !std::isfinite(rho)) throw DomainError("equivalence_gap: rho must be > 0");
    ModelParams p = params;
    p.L = L;
    p.validate();
    auto spec = matched_spec(p, beta);
    EquivalenceGap out;
    out.L = L;
    out.V = spec.volume;
    const double n = std::floor(spec.volume * rho);
    if (n < 1) throw DomainError("equivalence_gap: floor(V rho) must be >= 1");
    if (n > 1e6) throw ResourceError("equivalence_gap: N = floor(V rho) too large for the canonical DP");
    out.N = static_cast<int>(n);
    out.rho = out.N / spec.volume;
    out.mu = solve_mu(p, spec, out.rho);
    spec.mu = out.mu;
    out.E_gc = genfun_finite(p, spec, tf).value;
    const auto can = canonical_genfun(p, beta, out.N, tf, model_density_cutoff(p, spec, 1e-12));
    out.E_can = can.value;
    out.modes = can.modes;
    out.gap = std::abs(out.E_can - out.E_gc);
    if (p.d > 2 && rho > tdlimit::rho_c_I(beta, p)) {
        out.E_hypothesis = tdlimit::canonical_hypothesis(beta, rho, p, tf);
        out.hypothesis_gap = std::abs(out.E_can - out.E_hypothesis);
    }
    return out;
}

void to_json(nlohmann::json& j, const CanonicalPartition& c) {
    j = nlohmann::json{{"N", c.N}, {"V", c.V}, {"log_Z", c.log_Z}, {"free_energy", c.free_energy},
                       {"modes", c.modes}};
}

void to_json(nlohmann::json& j, const CanonicalGenfun& c) {
    j = nlohmann::json{{"N", c.N}, {"value", c.value}, {"log_Z", c.log_Z}, {"modes", c.modes}};
}

void to_json(nlohmann::json& j, const EquivalenceGap& g) {
    j = nlohmann::json{{"L", g.L},         {"V", g.V},         {"N", g.N},
                       {"rho", g.rho},     {"mu", g.mu},       {"E_can", g.E_can},
                       {"E_gc", g.E_gc},   {"gap", g.gap},     {"modes", g.modes}};
    if (std::isfinite(g.E_hypothesis)) {
        j["E_hypothesis"] = g.E_hypothesis;
        j["hypothesis_gap"] = g.hypothesis_gap;
    }
}

}  // namespace bec
