#include "bec/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bec/errors.hpp"
#include "bec/numeric.hpp"

namespace bec::specfun {

namespace {

void check_laguerre_args(int n, double x) {
    if (n < 0) throw DomainError("laguerre: negative order " + std::to_string(n));
    if (!std::isfinite(x) || x < 0.0)
        throw DomainError("laguerre: argument must be finite and >= 0");
}

}  // namespace

double laguerre(int n, double x) {
    check_laguerre_args(n, x);
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

LaguerreSeq laguerre_sequence(int N, double x) {
    check_laguerre_args(N, x);
    LaguerreSeq seq;
    seq.argument = x;
    seq.values.resize(static_cast<std::size_t>(N) + 1);
    seq.values[0] = 1.0;
    if (N >= 1) seq.values[1] = 1.0 - x;
    for (int k = 1; k < N; ++k)
        seq.values[k + 1] = ((2.0 * k + 1.0 - x) * seq.values[k] - k * seq.values[k - 1]) / (k + 1.0);
    return seq;
}

double laguerre_genfun(double z, double s) {
    if (!(s > 0.0 && s < 1.0))
        throw DomainError("laguerre generating function: s must lie in (0,1)");
    return std::exp(-z * s / (1.0 - s)) / (1.0 - s);
}

double laguerre_genfun_residual(double z, double s, int N) {
    const double closed = laguerre_genfun(z, s);
    const auto seq = laguerre_sequence(N, z);
    CompensatedSum partial;
    double power = 1.0;
    for (double l : seq.values) {
        partial += l * power;
        power *= s;
    }
    return std::abs(partial.value() - closed);
}

namespace detail {

double bessel_j0_series(double x) {
    const long double q = -0.25L * static_cast<long double>(x) * x;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int l = 1; l < 200; ++l) {
        term *= q / (static_cast<long double>(l) * l);
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum) && l > 2) break;
    }
    return static_cast<double>(sum);
}

double bessel_j0_miller(double x) {
    // Backward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, normalized with
    // J_0 + 2 sum_k J_{2k} = 1.
    int start = static_cast<int>(1.2 * x + 40.0);
    start += start % 2;
    double next = 0.0;
    double cur = 1e-280;
    double norm = 0.0;
    for (int n = start; n > 0; --n) {
        if (n % 2 == 0) norm += 2.0 * cur;
        const double prev = (2.0 * n / x) * cur - next;
        next = cur;
        cur = prev;
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    return cur / norm;
}

double bessel_j0_hankel(double x) {
    // P and Q asymptotic series with a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k x^k)
    double p = 1.0;
    double q = 0.0;
    double a = 1.0;
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        a *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (a > last) break;  // asymptotic series starts diverging
        last = a;
        switch (k % 4) {
            case 1: q -= a; break;
            case 2: p -= a; break;
            case 3: q += a; break;
            case 0: p += a; break;
        }
        if (a < 1e-18) break;
    }
    const double c = std::cos(x);
    const double s = std::sin(x);
    const double cos_chi = (c + s) / std::numbers::sqrt2;
    const double sin_chi = (s - c) / std::numbers::sqrt2;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cos_chi - q * sin_chi);
}

double bessel_j0_large(double x) {
    return x <= 50.0 ? bessel_j0_miller(x) : bessel_j0_hankel(x);
}

}  // namespace detail

double bessel_j0(double x) {
    x = std::abs(x);
    if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
    return x < detail::kJ0Switch ? detail::bessel_j0_series(x) : detail::bessel_j0_large(x);
}

double laguerre_limit_gap(double z, long n) {
    if (n < 1) throw DomainError("laguerre_limit_gap: n must be >= 1");
    if (n > 2'000'000'000L) throw DomainError("laguerre_limit_gap: n too large");
    const double ln = laguerre(static_cast<int>(n), z / static_cast<double>(n));
    return std::abs(ln - bessel_j0(2.0 * std::sqrt(z)));
}

double laplace_j0_lhs(double lambda, double z, double quad_tol) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("laplace_j0_lhs: lambda must be > 0");
    if (!(quad_tol > 0.0)) throw DomainError("laplace_j0_lhs: quad_tol must be > 0");
    const double az = std::abs(z);
    const double t_max = lambda * std::log(1.0 / std::min(quad_tol, 0.5)) + 50.0 * lambda;
    auto integrand = [lambda, az](double t) {
        return std::exp(-t / lambda) / lambda * bessel_j0(std::sqrt(2.0 * t) * az);
    };
    // seed panels at a fraction of the decay length and of the J0 period
    const double osc = az > 0.0 ? std::pow(std::numbers::pi / az, 2) / 2.0 : t_max;
    const double step = std::min(lambda, osc);
    const int pieces = std::min(4000, std::max(16, static_cast<int>(std::ceil(t_max / step))));
    std::vector<double> breaks(pieces + 1);
    for (int i = 0; i <= pieces; ++i) breaks[i] = t_max * i / pieces;
    const auto r = integrate_pieces(integrand, breaks, 0.0, 0.1 * quad_tol, 20000);
    if (r.error > quad_tol)
        throw NumericError("laplace_j0_lhs: quadrature did not reach tolerance", r.error);
    return r.value;
}

}  // namespace bec::specfun
