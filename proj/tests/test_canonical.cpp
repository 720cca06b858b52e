#include <doctest.h>

#include <boost/math/special_functions/laguerre.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bec/canonical.hpp"
#include "bec/errors.hpp"
#include "bec/parallel.hpp"
#include "bec/tdlimit.hpp"

using namespace bec;

namespace {

using Weights = std::vector<std::vector<double>>;

// odometer over all occupation vectors with n_k < size_k; keeps those summing to N
double oracle(const Weights& w, int N) {
    std::vector<int> n(w.size(), 0);
    double total = 0.0;
    while (true) {
        int sum = 0;
        double prod = 1.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            sum += n[k];
            prod *= w[k][n[k]];
        }
        if (sum == N) total += prod;
        std::size_t k = 0;
        while (k < w.size() && ++n[k] == static_cast<int>(w[k].size())) n[k++] = 0;
        if (k == w.size()) break;
    }
    return total;
}

double dp_value(const Weights& w, int N, ProductOrder order = ProductOrder::Tree) {
    std::vector<ModePoly> polys;
    for (const auto& wk : w) polys.push_back(poly_from_weights(wk));
    return coefficient(poly_product(polys, std::vector<std::int64_t>(w.size(), 1), N, order), N).value();
}

ModelParams model(int d, double L) {
    ModelParams p;
    p.d = d;
    p.L = L;
    p.eps0 = -1.0;
    p.g0 = 1.0;
    p.gk_profile = GProfile::constant(1.0);
    return p;
}

}  // namespace

TEST_CASE("hand-computed coefficients") {
    CHECK(canonical_partition(model(1, 5.0), 1.0, 0, 2.0).log_Z == 0.0);
    const double a = 0.7, b = 1.9;
    const Weights w{{1, a, a * a, a * a * a}, {1, b, b * b, b * b * b}};
    CHECK(dp_value(w, 2) == doctest::Approx(a * a + a * b + b * b).epsilon(1e-15));
    CHECK(enumerate_coefficient(w, 2) == doctest::Approx(a * a + a * b + b * b).epsilon(1e-15));
}

TEST_CASE("DP equals exhaustive enumeration on random instances") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(0.0, 3.0);
    std::uniform_real_distribution<double> X(0.0, 2.0);
    std::uniform_int_distribution<int> M(1, 4), Nd(0, 6);
    for (int inst = 0; inst < 50; ++inst) {
        const int modes = M(rng), N = Nd(rng);
        Weights w(modes), weyl(modes);
        for (int k = 0; k < modes; ++k) {
            const double x = X(rng);
            for (int n = 0; n <= N; ++n) {
                w[k].push_back(U(rng));
                weyl[k].push_back(w[k].back() * std::exp(-x / 2) * boost::math::laguerre(n, x));
            }
        }
        const double z = oracle(w, N);
        CHECK(std::abs(dp_value(w, N) / z - 1) < 1e-12);
        CHECK(std::abs(dp_value(w, N, ProductOrder::Sequential) / z - 1) < 1e-12);
        CHECK(std::abs(enumerate_coefficient(w, N) / z - 1) < 1e-12);
        // signed numerator: relative to the absolute-value sum, which bounds cancellation
        Weights abs_weyl = weyl;
        for (auto& v : abs_weyl)
            for (double& c : v) c = std::abs(c);
        const double scale = oracle(abs_weyl, N);
        CHECK(std::abs(dp_value(weyl, N) - oracle(weyl, N)) <= 1e-12 * scale);
    }
}

TEST_CASE("gauge invariance with c = 2") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    const int N = 5;
    Weights w(3), weyl(3), w2(3), weyl2(3);
    for (int k = 0; k < 3; ++k)
        for (int n = 0; n <= N; ++n) {
            w[k].push_back(U(rng));
            weyl[k].push_back(w[k].back() * std::exp(-0.3) * boost::math::laguerre(n, 0.6));
            w2[k].push_back(w[k].back() * std::pow(2.0, n));
            weyl2[k].push_back(weyl[k].back() * std::pow(2.0, n));
        }
    CHECK(dp_value(w2, N) / dp_value(w, N) == doctest::Approx(std::pow(2.0, N)).epsilon(1e-13));
    CHECK(dp_value(weyl2, N) / dp_value(w2, N) ==
          doctest::Approx(dp_value(weyl, N) / dp_value(w, N)).epsilon(1e-13));
}

TEST_CASE("mode_poly weights and the one-particle Weyl element") {
    Mode m{{1}, 0.5, 0.4, 0.8};
    const double beta = 1.3, V = 6.0;
    const auto p = mode_poly(m, beta, V, 8);
    for (int n = 0; n <= 8; ++n) {
        const double w = std::exp(-beta * (m.eps * n + m.g / (2 * V) * n * (n - 1.0)));
        CHECK(coefficient(p, n).value() == doctest::Approx(w).epsilon(1e-14));
    }
    const double x = 0.35;
    const auto q = mode_poly(m, beta, V, 1, x);
    const double ratio = coefficient(q, 1).value() / coefficient(mode_poly(m, beta, V, 1), 1).value();
    CHECK(ratio == doctest::Approx(std::exp(-x / 2) * (1 - x)).epsilon(1e-14));

    // tail cut: degree stops once the weight is e^-40 below its peak
    Mode hot{{3}, 9.0, 5.0, 1.0};
    CHECK(mode_poly(hot, 1.0, 10.0, 1000).degree() < 10);
}

TEST_CASE("canonical_genfun matches enumeration on a tiny model") {
    auto p = model(1, 3.0);
    const double beta = 0.7, V = p.volume();
    auto tf = TestFunction::gaussian(1, 0.9, 1.2);
    const double cut = std::max(3.0 * p.energy_unit(), tf_cutoff(p, tf, 1e-12));
    const auto modes = enumerate_modes(p, cut);
    const int N = 4;
    Weights w, weyl;
    for (const auto& m : modes) {
        const double x = tf.abs_sq(m.k_norm_sq) / (2 * V);
        std::vector<double> a, b;
        for (int n = 0; n <= N; ++n) {
            a.push_back(std::exp(-beta * (m.eps * n + m.g / (2 * V) * n * (n - 1.0))));
            b.push_back(a.back() * std::exp(-x / 2) * boost::math::laguerre(n, x));
        }
        w.push_back(a);
        weyl.push_back(b);
    }
    REQUIRE(modes.size() <= 9);
    const auto g = canonical_genfun(p, beta, N, tf, cut);
    CHECK(g.modes == static_cast<std::int64_t>(modes.size()));
    CHECK(g.log_Z == doctest::Approx(std::log(enumerate_coefficient(w, N))).epsilon(1e-13));
    CHECK(g.value == doctest::Approx(enumerate_coefficient(weyl, N) / enumerate_coefficient(w, N)).epsilon(1e-12));
    CHECK(canonical_genfun(p, beta, N, TestFunction::zero(1), cut).value == 1.0);
}

TEST_CASE("product order and thread count do not change results") {
    auto p = model(1, 20.0);
    auto tf = TestFunction::gaussian(1, 1.0, 1.0);
    const double cut = canonical_default_cutoff(p, 1.0, 20);
    const auto seq = canonical_genfun(p, 1.0, 20, tf, cut, ProductOrder::Sequential);
    const auto tree = canonical_genfun(p, 1.0, 20, tf, cut, ProductOrder::Tree);
    CHECK(std::abs(tree.log_Z / seq.log_Z - 1) < 1e-12);
    CHECK(std::abs(tree.value / seq.value - 1) < 1e-12);
    set_thread_count(3);
    const auto par = canonical_genfun(p, 1.0, 20, tf, cut);
    set_thread_count(1);
    CHECK(par.log_Z == tree.log_Z);
    CHECK(par.value == tree.value);

    auto q = model(3, 3.0);
    const double cut3 = canonical_default_cutoff(q, 1.0, 12);
    const auto a = canonical_partition(q, 1.0, 12, cut3, ProductOrder::Sequential);
    const auto b = canonical_partition(q, 1.0, 12, cut3, ProductOrder::Tree);
    CHECK(std::abs(a.log_Z / b.log_Z - 1) < 1e-12);
}

TEST_CASE("free energy is convex in rho below the critical density") {
    for (int d : {1, 3}) {
        auto p = model(d, d == 1 ? 20.0 : 4.0);
        const double V = p.volume();
        const int n_max = d == 1 ? 40 : static_cast<int>(0.9 * tdlimit::rho_c_I(1.0, p) * V);
        const double cut = canonical_default_cutoff(p, 1.0, n_max);
        std::vector<double> f;
        for (int N = 0; N <= n_max; ++N) {
            const auto c = canonical_partition(p, 1.0, N, cut);
            CHECK(std::isfinite(c.log_Z));
            f.push_back(c.free_energy);
        }
        for (int N = 1; N < n_max; ++N) CHECK(f[N + 1] + f[N - 1] - 2 * f[N] >= -1e-8);
    }
}

TEST_CASE("resource cap") {
    auto p = model(3, 20.0);
    CHECK_THROWS_AS(canonical_partition(p, 1.0, 5000, 40.0), ResourceError);
    CHECK_THROWS_AS(canonical_partition(p, 1.0, -1, 1.0), DomainError);
}

TEST_CASE("equivalence gap") {
    auto p = model(1, 10.0);
    auto tf = TestFunction::gaussian(1, 1.0, 1.0);
    CHECK(equivalence_gap(p, 1.0, 1.0, TestFunction::zero(1), 20.0).gap == 0.0);

    double prev = 1.0;
    for (double L : {10.0, 20.0, 40.0}) {
        const auto g = equivalence_gap(p, 1.0, 1.0, tf, L);
        CHECK(g.N == static_cast<int>(L));
        CHECK(g.gap < prev);
        prev = g.gap;
    }
    CHECK(prev < 5e-3);

    // supercritical, tiny box: reported only
    auto q = model(3, 3.0);
    const auto s = equivalence_gap(q, 1.0, tdlimit::rho_c_I(1.0, q) + 0.5, TestFunction::gaussian(3, 1.0, 1.0), 3.0);
    CHECK(std::isfinite(s.gap));
    CHECK(std::abs(s.E_can) <= 1.0);
}

TEST_CASE("conjectured supercritical canonical form is reported") {
    auto q = model(3, 4.0);
    auto tf = TestFunction::gaussian(3, 1.0, 1.0);
    const double rho = tdlimit::rho_c_I(1.0, q) + 0.5;
    const auto s = equivalence_gap(q, 1.0, rho, tf, 4.0);
    REQUIRE(std::isfinite(s.E_hypothesis));
    const double h0 = std::abs(tf.value_at_zero());
    const double excess = rho - tdlimit::rho_c_I(1.0, q);
    CHECK(s.E_hypothesis == doctest::Approx(tdlimit::genfun_limit_mu(1.0, 0.0, q, tf) *
                                             std::cyl_bessel_j(0.0, std::sqrt(2 * excess) * h0))
                                .epsilon(1e-12));
    const auto sub = equivalence_gap(model(1, 10.0), 1.0, 1.0, TestFunction::gaussian(1, 1.0, 1.0), 10.0);
    CHECK(std::isnan(sub.E_hypothesis));
}
