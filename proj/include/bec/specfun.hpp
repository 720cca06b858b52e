#pragma once

#include <vector>

namespace bec::specfun {

/// Values L_0(x) ... L_N(x) of the Laguerre polynomials at one argument.
struct LaguerreSeq {
    double argument = 0.0;
    std::vector<double> values;

    int order() const { return static_cast<int>(values.size()) - 1; }
};

/// L_n(x) by the upward three-term recurrence
/// (n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}.
/// Throws DomainError for n < 0 or x < 0 (or non-finite x).
double laguerre(int n, double x);

/// All of L_0(x) ... L_N(x) in one recurrence pass.
LaguerreSeq laguerre_sequence(int N, double x);

/// |sum_{n<=N} L_n(z) s^n - (1-s)^{-1} exp(-z s/(1-s))| for 0 < s < 1.
double laguerre_genfun_residual(double z, double s, int N);

/// Closed form of the Laguerre generating function, (1-s)^{-1} exp(-z s/(1-s)).
double laguerre_genfun(double z, double s);

/// Bessel function of the first kind, order zero. Absolute error below 1e-12
/// on [0, 50]. Even in x.
double bessel_j0(double x);

/// |L_n(z/n) - J_0(2 sqrt z)|.
double laguerre_limit_gap(double z, long n);

/// int_0^inf (dt/lambda) e^{-t/lambda} J_0(sqrt(2t)|z|), which equals
/// exp(-lambda z^2/2). The integral is truncated at
/// t = lambda ln(1/tol) + 50 lambda. Throws NumericError when the achieved
/// quadrature error exceeds quad_tol.
double laplace_j0_lhs(double lambda, double z, double quad_tol);

namespace detail {

/// Power series sum_l (-x^2/4)^l / (l!)^2, summed in long double.
double bessel_j0_series(double x);

/// Large-argument branch used for x >= 12: Miller backward recurrence up to
/// x = 50, Hankel asymptotic expansion beyond.
double bessel_j0_large(double x);

double bessel_j0_miller(double x);
double bessel_j0_hankel(double x);

/// Branch switch point between the series and the large-argument method.
inline constexpr double kJ0Switch = 12.0;

}  // namespace detail
}  // namespace bec::specfun
