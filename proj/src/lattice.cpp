#include "bec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "bec/errors.hpp"
#include "bec/numeric.hpp"

namespace bec {

using nlohmann::json;

double ModelParams::volume() const { return std::pow(L, d); }

double ModelParams::energy_unit() const {
    const double q = 2.0 * std::numbers::pi / L;
    return kinetic * q * q;
}

void ModelParams::validate() const {
    if (d < 1 || d > 8) throw DomainError("model.d must be in [1, 8]");
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("model.L must be > 0");
    if (!(kinetic > 0.0) || !std::isfinite(kinetic)) throw DomainError("model.kinetic must be > 0");
    if (!std::isfinite(eps0)) throw DomainError("model.eps0 must be finite");
    if (!(g0 > 0.0) || !std::isfinite(g0)) throw DomainError("model.g0 must be > 0");
    if (gk_profile.kind == GProfile::Kind::Constant &&
        (!(gk_profile.g > 0.0) || !std::isfinite(gk_profile.g)))
        throw DomainError("model.gk_profile.g must be > 0 for a constant profile");
}

ModelParams ModelParams::with_L(double new_L) const {
    ModelParams p = *this;
    p.L = new_L;
    return p;
}

void to_json(json& j, const GProfile& p) {
    if (p.is_zero())
        j = json{{"type", "zero"}};
    else
        j = json{{"type", "constant"}, {"g", p.g}};
}

void from_json(const json& j, GProfile& p) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw DomainError("model.gk_profile: expected object with string field 'type'");
    const auto type = j.at("type").get<std::string>();
    if (type == "zero") {
        p = GProfile::zero();
    } else if (type == "constant") {
        if (!j.contains("g") || !j.at("g").is_number())
            throw DomainError("model.gk_profile.g: missing or not a number");
        p = GProfile::constant(j.at("g").get<double>());
    } else {
        throw DomainError("model.gk_profile.type: unknown profile '" + type + "'");
    }
}

void to_json(json& j, const ModelParams& p) {
    j = json{{"d", p.d},           {"L", p.L},   {"kinetic", p.kinetic},
             {"eps0", p.eps0},     {"g0", p.g0}, {"gk_profile", p.gk_profile}};
}

void from_json(const json& j, ModelParams& p) {
    if (!j.is_object()) throw DomainError("model: expected an object");
    static const char* required[] = {"d", "L", "eps0", "g0", "gk_profile"};
    for (const char* key : required)
        if (!j.contains(key)) throw DomainError(std::string("model.") + key + ": missing");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "d" && k != "L" && k != "kinetic" && k != "eps0" && k != "g0" && k != "gk_profile")
            throw DomainError("model." + k + ": unknown field");
    }
    auto number = [&j](const char* key) {
        if (!j.at(key).is_number()) throw DomainError(std::string("model.") + key + ": not a number");
        return j.at(key).get<double>();
    };
    if (!j.at("d").is_number_integer()) throw DomainError("model.d: not an integer");
    p.d = j.at("d").get<int>();
    p.L = number("L");
    p.kinetic = j.contains("kinetic") ? number("kinetic") : 1.0;
    p.eps0 = number("eps0");
    p.g0 = number("g0");
    p.gk_profile = j.at("gk_profile").get<GProfile>();
    p.validate();
}

bool Mode::is_zero() const {
    return std::all_of(s.begin(), s.end(), [](int v) { return v == 0; });
}

Mode ModeShell::representative() const { return Mode{{}, k_norm_sq, eps, g}; }

std::int64_t max_index_sq(const ModelParams& params, double eps_cutoff) {
    const double unit = params.energy_unit();
    const double ratio = eps_cutoff / unit;
    if (ratio >= 4e18) throw ResourceError("mode cutoff too large");
    auto n = static_cast<std::int64_t>(std::floor(ratio));
    while (unit * static_cast<double>(n + 1) <= eps_cutoff) ++n;
    while (n > 0 && unit * static_cast<double>(n) > eps_cutoff) --n;
    return n;
}

std::vector<std::int64_t> lattice_shell_counts(int d, std::int64_t max_sq) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(max_sq) + 1, 0);
    counts[0] = 1;
    for (int dim = 0; dim < d; ++dim) {
        std::vector<std::int64_t> next(counts.size(), 0);
        for (std::int64_t n = 0; n <= max_sq; ++n) {
            if (counts[n] == 0) continue;
            next[n] += counts[n];
            for (std::int64_t j = 1; n + j * j <= max_sq; ++j) next[n + j * j] += 2 * counts[n];
        }
        counts = std::move(next);
    }
    return counts;
}

std::vector<Mode> enumerate_modes(const ModelParams& params, double eps_cutoff) {
    params.validate();
    if (!(eps_cutoff > 0.0)) throw DomainError("enumerate_modes: eps_cutoff must be > 0");
    const std::int64_t max_sq = max_index_sq(params, eps_cutoff);
    const auto counts = lattice_shell_counts(params.d, max_sq);
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    if (total > kMaxModes)
        throw ResourceError("enumerate_modes: " + std::to_string(total) + " modes exceed the cap");

    const int d = params.d;
    const auto radius = static_cast<int>(std::floor(std::sqrt(static_cast<double>(max_sq))));
    std::vector<std::pair<std::int64_t, std::vector<int>>> points;
    points.reserve(static_cast<std::size_t>(total));
    std::vector<int> s(d, 0);
    std::function<void(int, std::int64_t)> rec = [&](int axis, std::int64_t partial) {
        if (axis == d) {
            points.emplace_back(partial, s);
            return;
        }
        for (int v = -radius; v <= radius; ++v) {
            const std::int64_t next = partial + static_cast<std::int64_t>(v) * v;
            if (next > max_sq) continue;
            s[axis] = v;
            rec(axis + 1, next);
        }
        s[axis] = 0;
    };
    rec(0, 0);
    std::sort(points.begin(), points.end());

    const double unit = params.energy_unit();
    const double q_sq = std::pow(2.0 * std::numbers::pi / params.L, 2);
    const double g = params.gk_profile.value();
    std::vector<Mode> modes;
    modes.reserve(points.size());
    for (auto& [sq, idx] : points) {
        Mode m;
        m.s = std::move(idx);
        m.k_norm_sq = q_sq * static_cast<double>(sq);
        if (sq == 0) {
            m.eps = params.eps0;
            m.g = params.g0;
        } else {
            m.eps = unit * static_cast<double>(sq);
            m.g = g;
        }
        modes.push_back(std::move(m));
    }
    return modes;
}

std::vector<ModeShell> enumerate_shells(const ModelParams& params, double eps_cutoff) {
    params.validate();
    const std::int64_t max_sq = eps_cutoff > 0.0 ? max_index_sq(params, eps_cutoff) : 0;
    const auto counts = lattice_shell_counts(params.d, max_sq);
    const double unit = params.energy_unit();
    const double q_sq = std::pow(2.0 * std::numbers::pi / params.L, 2);
    const double g = params.gk_profile.value();
    std::vector<ModeShell> shells;
    for (std::int64_t n = 0; n <= max_sq; ++n) {
        if (counts[n] == 0) continue;
        ModeShell sh;
        sh.s_sq = n;
        sh.multiplicity = counts[n];
        sh.k_norm_sq = q_sq * static_cast<double>(n);
        sh.eps = n == 0 ? params.eps0 : unit * static_cast<double>(n);
        sh.g = n == 0 ? params.g0 : g;
        shells.push_back(sh);
    }
    return shells;
}

// ---------------------------------------------------------------------------
// Test functions

namespace {

double gaussian_overlap(int d, double w1, double w2) {
    // (2pi)^{-d} int exp(-(w1^2 + w2^2) k^2 / 2) d^dk
    return std::pow(2.0 * std::numbers::pi * (w1 * w1 + w2 * w2), -0.5 * d);
}

std::vector<GaussianTerm> merge_terms(std::vector<GaussianTerm> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const GaussianTerm& a, const GaussianTerm& b) { return a.width < b.width; });
    std::vector<GaussianTerm> out;
    for (const auto& t : terms) {
        if (!out.empty() && out.back().width == t.width)
            out.back().amplitude += t.amplitude;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](const GaussianTerm& t) { return t.amplitude == std::complex<double>(0.0); });
    return out;
}

}  // namespace

TestFunction::TestFunction(int d, std::vector<GaussianTerm> terms) : d_(d) {
    if (d < 1) throw DomainError("TestFunction: dimension must be >= 1");
    for (const auto& t : terms)
        if (!(t.width > 0.0) || !std::isfinite(t.width))
            throw DomainError("TestFunction: Gaussian width must be > 0");
    terms_ = merge_terms(std::move(terms));
    double n = 0.0;
    for (const auto& a : terms_)
        for (const auto& b : terms_)
            n += std::real(std::conj(a.amplitude) * b.amplitude) * gaussian_overlap(d_, a.width, b.width);
    norm_sq_ = std::max(0.0, n);
}

TestFunction TestFunction::gaussian(int d, std::complex<double> amplitude, double width) {
    return TestFunction(d, {GaussianTerm{amplitude, width}});
}

std::complex<double> TestFunction::profile(double k_norm_sq) const {
    std::complex<double> v = 0.0;
    for (const auto& t : terms_) v += t.amplitude * std::exp(-0.5 * t.width * t.width * k_norm_sq);
    return v;
}

double TestFunction::abs_sq(double k_norm_sq) const { return std::norm(profile(k_norm_sq)); }

double TestFunction::min_width() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) w = std::min(w, t.width);
    return w;
}

bool TestFunction::is_zero() const { return terms_.empty(); }

double TestFunction::norm_sq_quadrature() const {
    if (is_zero()) return 0.0;
    const double w = min_width();
    const double k_max = std::sqrt(80.0) / w;
    auto f = [this](double k) { return std::pow(k, d_ - 1) * abs_sq(k * k); };
    std::vector<double> breaks;
    for (int i = 0; i <= 16; ++i) breaks.push_back(k_max * i / 16.0);
    const auto r = integrate_pieces(f, breaks, 1e-14);
    return unit_sphere_area(d_) * r.value / std::pow(2.0 * std::numbers::pi, d_);
}

std::complex<double> TestFunction::inner(const TestFunction& other) const {
    if (other.d_ != d_) throw DomainError("TestFunction::inner: dimension mismatch");
    std::complex<double> v = 0.0;
    for (const auto& a : terms_)
        for (const auto& b : other.terms_)
            v += std::conj(a.amplitude) * b.amplitude * gaussian_overlap(d_, a.width, b.width);
    return v;
}

TestFunction TestFunction::operator+(const TestFunction& other) const {
    if (other.d_ != d_) throw DomainError("TestFunction: dimension mismatch");
    auto terms = terms_;
    terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
    return TestFunction(d_, std::move(terms));
}

TestFunction TestFunction::operator-(const TestFunction& other) const {
    return *this + other.scaled(-1.0);
}

TestFunction TestFunction::scaled(std::complex<double> c) const {
    auto terms = terms_;
    for (auto& t : terms) t.amplitude *= c;
    return TestFunction(d_, std::move(terms));
}

void to_json(json& j, const TestFunction& tf) {
    json terms = json::array();
    for (const auto& t : tf.terms())
        terms.push_back({{"re", t.amplitude.real()}, {"im", t.amplitude.imag()}, {"width", t.width}});
    j = json{{"terms", terms}, {"norm_sq", tf.norm_sq()}};
}

TestFunction test_function_from_json(const json& j, int d) {
    if (!j.is_object()) throw DomainError("tf: expected an object");
    auto reject = [](const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
                throw DomainError(where + "." + it.key() + ": unknown field");
    };
    if (j.contains("terms")) {
        reject(j, "tf", {"terms", "norm_sq"});  // norm_sq: derived, written by to_json, ignored
        if (!j.at("terms").is_array()) throw DomainError("tf.terms: expected an array");
        std::vector<GaussianTerm> terms;
        for (const auto& t : j.at("terms")) {
            if (!t.is_object() || !t.contains("width"))
                throw DomainError("tf.terms[].width: missing");
            reject(t, "tf.terms[]", {"re", "im", "width"});
            const double re = t.value("re", 0.0);
            const double im = t.value("im", 0.0);
            terms.push_back({{re, im}, t.at("width").get<double>()});
        }
        return TestFunction(d, std::move(terms));
    }
    reject(j, "tf", {"amplitude", "width", "phase"});
    if (!j.contains("amplitude") || !j.at("amplitude").is_number())
        throw DomainError("tf.amplitude: missing or not a number");
    if (!j.contains("width") || !j.at("width").is_number())
        throw DomainError("tf.width: missing or not a number");
    const double phase = j.value("phase", 0.0);
    return TestFunction::gaussian(d, std::polar(j.at("amplitude").get<double>(), phase),
                                  j.at("width").get<double>());
}

std::complex<double> tf_coeff(const TestFunction& tf, const Mode& mode) {
    return tf.profile(mode.k_norm_sq);
}

double unit_sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

// ---------------------------------------------------------------------------
// Truncation certificates

namespace {

// Upper bound on sum_{|s| >= R} F(|s|) for F radially decreasing on
// [R - sqrt(d), inf): each lattice point is dominated by its unit cube.
double lattice_tail_integral(int d, double R, const std::function<double(double)>& F,
                             double r_max) {
    const double c = 0.5 * std::sqrt(static_cast<double>(d));
    const double r0 = R - 2.0 * c;
    if (r0 < 0.0) return std::numeric_limits<double>::infinity();
    if (r_max <= r0) return 0.0;
    auto integrand = [&](double r) { return std::pow(r + c, d - 1) * F(r); };
    std::vector<double> breaks;
    for (int i = 0; i <= 32; ++i) breaks.push_back(r0 + (r_max - r0) * i / 32.0);
    const auto q = integrate_pieces(integrand, breaks, 1e-8);
    return unit_sphere_area(d) * (q.value + q.error);
}

}  // namespace

double occupation_tail_bound(const ModelParams& params, double beta, double mu_eff,
                             std::int64_t max_sq) {
    const double unit = params.energy_unit();
    const double R = std::sqrt(static_cast<double>(max_sq + 1));
    const double c = 0.5 * std::sqrt(static_cast<double>(params.d));
    const double r0 = R - 2.0 * c;
    if (r0 <= 0.0 || unit * r0 * r0 <= mu_eff) return std::numeric_limits<double>::infinity();
    auto F = [&](double r) { return 1.0 / std::expm1(beta * (unit * r * r - mu_eff)); };
    // beyond beta*(unit r^2 - mu) = 800 the integrand is below e^-800
    const double r_max = std::sqrt(std::max(0.0, mu_eff + 800.0 / beta) / unit);
    return lattice_tail_integral(params.d, R, F, r_max);
}

double density_cutoff(const ModelParams& params, double beta, double mu_eff, double density_tol) {
    const double unit = params.energy_unit();
    const double target = density_tol * params.volume();
    auto ok = [&](std::int64_t n) { return occupation_tail_bound(params, beta, mu_eff, n) < target; };
    auto n = static_cast<std::int64_t>(std::ceil((std::max(mu_eff, 0.0) + 1.0 / beta) / unit)) + 4 * params.d;
    while (!ok(n)) {
        n = n + n / 4 + 1;
        if (static_cast<double>(n) > 1e12) throw ResourceError("density_cutoff: cutoff diverges");
    }
    // shrink to the smallest certified index radius
    std::int64_t lo = n / 2, hi = n;
    while (lo + 1 < hi) {
        const std::int64_t mid = (lo + hi) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return unit * static_cast<double>(hi);
}

double tf_tail_bound(const ModelParams& params, const TestFunction& tf, std::int64_t max_sq) {
    if (tf.is_zero()) return 0.0;
    double amp = 0.0;
    for (const auto& t : tf.terms()) amp += std::abs(t.amplitude);
    const double w = tf.min_width();
    const double q_sq = std::pow(2.0 * std::numbers::pi / params.L, 2);
    auto F = [&](double r) { return amp * amp * std::exp(-w * w * q_sq * r * r); };
    const double r_max = std::sqrt(800.0 / (w * w * q_sq));
    const double R = std::sqrt(static_cast<double>(max_sq + 1));
    return lattice_tail_integral(params.d, R, F, r_max) / params.volume();
}

double tf_cutoff(const ModelParams& params, const TestFunction& tf, double tol) {
    if (tf.is_zero()) return params.energy_unit();
    const double unit = params.energy_unit();
    const double target = tol * std::max(1.0, tf.norm_sq());
    auto ok = [&](std::int64_t n) { return tf_tail_bound(params, tf, n) < target; };
    std::int64_t n = 4 * params.d;
    while (!ok(n)) {
        n = n + n / 4 + 1;
        if (static_cast<double>(n) > 1e12) throw ResourceError("tf_cutoff: cutoff diverges");
    }
    std::int64_t lo = n / 2, hi = n;
    while (lo + 1 < hi) {
        const std::int64_t mid = (lo + hi) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return unit * static_cast<double>(hi);
}

}  // namespace bec
