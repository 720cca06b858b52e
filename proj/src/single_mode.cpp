#include "bec/single_mode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bec/errors.hpp"
#include "bec/numeric.hpp"
#include "bec/specfun.hpp"

namespace bec {

void GrandSpec::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("spec.beta must be > 0");
    if (!std::isfinite(mu)) throw DomainError("spec.mu must be finite");
    if (!(volume > 0.0) || !std::isfinite(volume)) throw DomainError("spec.volume must be > 0");
    if (!(tail_rel > 0.0) || !(quad_tol > 0.0)) throw DomainError("spec tolerances must be > 0");
}

double ModePMF::at(std::int64_t n) const {
    if (n < first || n > last()) return 0.0;
    return weights[static_cast<std::size_t>(n - first)];
}

ModeCoeffs mode_coeffs(const Mode& mode, const GrandSpec& spec) {
    const double half = mode.g / (2.0 * spec.volume);
    return {mode.eps - spec.mu - half, half};
}

void check_mode_convergence(const Mode& mode, const GrandSpec& spec) {
    spec.validate();
    if (mode.g < 0.0) throw DomainError("mode coupling must be >= 0");
    if (mode.g == 0.0 && !(spec.mu < mode.eps))
        throw DivergenceError("free mode with mu >= eps: occupation sum diverges (mu=" +
                              std::to_string(spec.mu) + ", eps=" + std::to_string(mode.eps) + ")");
}

namespace {

constexpr std::int64_t kMaxTerms = 2'000'000'000;

// Walks the weights w(n) = exp(phi(n) - phi(n*)) outward from the peak n*
// of the concave log-weight phi(n) = -beta(a n + b n^2). Each direction
// stops when the geometric bound on its remainder drops below tail_rel of
// the running sum; visit(n, w) sees every retained term.
struct Walk {
    std::int64_t peak = 0;
    double log_peak = 0.0;  // phi(n*)
    std::int64_t lo = 0, hi = 0;
    double sum = 0.0;
    double tail = 0.0;      // relative
};

template <class Visit>
Walk walk_terms(const ModeCoeffs& c, double beta, double tail_rel, Visit&& visit) {
    Walk w;
    if (c.b > 0.0) {
        const double star = -c.a / (2.0 * c.b);
        if (star > 1e15) throw ResourceError("mode occupation peak beyond representable range");
        w.peak = star <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(star));
    }
    const auto ns = static_cast<double>(w.peak);
    w.log_peak = -beta * (c.a * ns + c.b * ns * ns);
    auto rel = [&](std::int64_t n) {
        const double dn = static_cast<double>(n) - ns;
        return std::exp(-beta * dn * (c.a + c.b * (static_cast<double>(n) + ns)));
    };

    CompensatedSum sum;
    sum += 1.0;
    visit(w.peak, 1.0);

    double up_tail = 0.0;
    std::int64_t n = w.peak;
    while (true) {
        // ratio w(n+1)/w(n) is non-increasing in n
        const double r = std::exp(-beta * (c.a + c.b * (2.0 * static_cast<double>(n) + 1.0)));
        const double wn = rel(n);
        if (r < 1.0) {
            const double bound = wn * r / (1.0 - r);
            if (bound <= tail_rel * sum.value()) {
                up_tail = bound;
                break;
            }
        }
        ++n;
        if (n - w.peak > kMaxTerms) throw ResourceError("mode sum needs too many terms");
        const double wnext = rel(n);
        sum += wnext;
        visit(n, wnext);
    }
    w.hi = n;

    double down_tail = 0.0;
    n = w.peak;
    while (n > 0) {
        const double r = std::exp(beta * (c.a + c.b * (2.0 * static_cast<double>(n) - 1.0)));
        const double wn = rel(n);
        if (r < 1.0) {
            const double bound = wn * r / (1.0 - r);
            if (bound <= tail_rel * sum.value()) {
                down_tail = bound;
                break;
            }
        }
        --n;
        const double wnext = rel(n);
        sum += wnext;
        visit(n, wnext);
    }
    w.lo = n;
    w.sum = sum.value();
    w.tail = (up_tail + down_tail) / w.sum;
    return w;
}

}  // namespace

ModePMF mode_pmf(const Mode& mode, const GrandSpec& spec) {
    check_mode_convergence(mode, spec);
    const auto c = mode_coeffs(mode, spec);
    std::vector<std::pair<std::int64_t, double>> terms;
    const auto w = walk_terms(c, spec.beta, spec.tail_rel,
                              [&](std::int64_t n, double x) { terms.emplace_back(n, x); });
    ModePMF pmf;
    pmf.first = w.lo;
    pmf.weights.assign(static_cast<std::size_t>(w.hi - w.lo + 1), 0.0);
    for (auto [n, x] : terms) pmf.weights[static_cast<std::size_t>(n - w.lo)] = x / w.sum;
    pmf.log_norm = w.log_peak + std::log(w.sum);
    pmf.tail_bound = w.tail;
    return pmf;
}

double mode_log_partition(const Mode& mode, const GrandSpec& spec) {
    return mode_stats(mode, spec).log_partition;
}

ModeStats mode_stats(const Mode& mode, const GrandSpec& spec) {
    check_mode_convergence(mode, spec);
    const auto c = mode_coeffs(mode, spec);
    CompensatedSum s1, s2;
    std::int64_t peak = 0;
    bool first = true;
    const auto w = walk_terms(c, spec.beta, spec.tail_rel, [&](std::int64_t n, double x) {
        if (first) {
            peak = n;
            first = false;
        }
        const double dn = static_cast<double>(n - peak);
        s1 += x * dn;
        s2 += x * dn * dn;
    });
    const double m1 = s1.value() / w.sum;
    ModeStats st;
    st.log_partition = w.log_peak + std::log(w.sum);
    st.mean = static_cast<double>(w.peak) + m1;
    st.variance = std::max(0.0, s2.value() / w.sum - m1 * m1);
    return st;
}

double mode_occupation(const Mode& mode, const GrandSpec& spec) { return mode_stats(mode, spec).mean; }

double occupation_bound_gap(const Mode& mode, const GrandSpec& spec) {
    const double shifted = mode.eps - spec.mu - mode.g / spec.volume;
    if (!(shifted > 0.0))
        throw DomainError("occupation_bound_gap: mode not in D~+ (eps - mu - g/V <= 0)");
    return 1.0 / std::expm1(spec.beta * shifted) - mode_occupation(mode, spec);
}

double mode_weyl_factor(const Mode& mode, const GrandSpec& spec, double hk_abs_sq) {
    if (!(hk_abs_sq >= 0.0)) throw DomainError("mode_weyl_factor: |h_k|^2 must be >= 0");
    const auto pmf = mode_pmf(mode, spec);
    if (hk_abs_sq == 0.0) return 1.0;
    const double x = hk_abs_sq / (2.0 * spec.volume);
    CompensatedSum acc;
    double prev = 1.0, cur = 1.0 - x;  // L_0, L_1
    for (std::int64_t n = 0; n <= pmf.last(); ++n) {
        double ln;
        if (n == 0) {
            ln = 1.0;
        } else if (n == 1) {
            ln = cur;
        } else {
            const double k = static_cast<double>(n - 1);
            const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
            prev = cur;
            cur = next;
            ln = cur;
        }
        if (n >= pmf.first) acc += pmf.weights[static_cast<std::size_t>(n - pmf.first)] * ln;
    }
    return std::exp(-x / 2.0) * acc.value();
}

double mode_weyl_factor_free(const Mode& mode, const GrandSpec& spec, double hk_abs_sq) {
    spec.validate();
    const double gap = mode.eps - spec.mu;
    if (!(gap > 0.0)) throw DivergenceError("mode_weyl_factor_free: mu >= eps");
    if (!(hk_abs_sq >= 0.0)) throw DomainError("mode_weyl_factor_free: |h_k|^2 must be >= 0");
    const double coth = 1.0 / std::tanh(spec.beta * gap / 2.0);
    return std::exp(-hk_abs_sq / (4.0 * spec.volume) * coth);
}

}  // namespace bec
