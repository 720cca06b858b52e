#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace bec {

// Neumaier-compensated accumulator. Reductions over modes go through this so
// that results do not depend on summation order beyond ~1e-15 relative.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double init) : sum_(init) {}

    CompensatedSum& operator+=(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }

    CompensatedSum& operator+=(const CompensatedSum& other) noexcept {
        *this += other.sum_;
        *this += other.comp_;
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

// Globally adaptive 31-point Gauss-Kronrod on a finite interval. Stops when
// the summed error estimate is below max(abs_tol, rel_tol*|value|) or after
// max_intervals subdivisions; the returned error is the absolute estimate.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-13, double abs_tol = 0.0,
                     int max_intervals = 4000);

// Same, seeded with the given breakpoints (sorted ascending).
QuadResult integrate_pieces(const std::function<double(double)>& f,
                            const std::vector<double>& breaks, double rel_tol = 1e-13,
                            double abs_tol = 0.0, int max_intervals = 4000);

}  // namespace bec
