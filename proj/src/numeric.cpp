#include "bec/numeric.hpp"

#include <algorithm>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace bec {
namespace {

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0;
    const double v = GK::integrate(f, a, b, 0, 0.0, &err);
    // with max_depth = 0 boost leaves the estimate in [-1,1] units
    return {a, b, v, err * 0.5 * (b - a)};
}

}  // namespace

QuadResult integrate_pieces(const std::function<double(double)>& f,
                            const std::vector<double>& breaks, double rel_tol,
                            double abs_tol, int max_intervals) {
    std::priority_queue<Panel> heap;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (breaks[i + 1] > breaks[i]) heap.push(eval_panel(f, breaks[i], breaks[i + 1]));

    auto totals = [&heap] {
        auto copy = heap;
        CompensatedSum v;
        double e = 0.0;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().error;
            copy.pop();
        }
        return QuadResult{v.value(), e};
    };

    QuadResult r = totals();
    int count = static_cast<int>(heap.size());
    while (!heap.empty() && r.error > std::max(abs_tol, rel_tol * std::abs(r.value)) &&
           count < max_intervals) {
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            heap.push(worst);
            break;
        }
        const Panel left = eval_panel(f, worst.a, mid);
        const Panel right = eval_panel(f, mid, worst.b);
        heap.push(left);
        heap.push(right);
        ++count;
        r.value += (left.value + right.value) - worst.value;
        r.error += (left.error + right.error) - worst.error;
    }
    return totals();
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol, double abs_tol, int max_intervals) {
    if (a == b) return {};
    return integrate_pieces(f, {a, b}, rel_tol, abs_tol, max_intervals);
}

}  // namespace bec
