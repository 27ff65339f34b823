#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature.

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace hofail {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    int max_subdivisions = 2000;

    void validate() const
    {
        if (!(abs_tol > 0.0))
            throw std::invalid_argument("QuadratureSpec: abs_tol must be > 0");
        if (max_subdivisions < 8)
            throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 8");
    }
};

/// Thrown when the error target is not met; carries the best estimate so far.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(double estimate, double error)
        : std::runtime_error("quadrature did not converge (estimate " + std::to_string(estimate)
                             + ", error " + std::to_string(error) + ")"),
          estimate_(estimate), error_(error)
    {}
    double best_estimate() const { return estimate_; }
    double error_estimate() const { return error_; }

private:
    double estimate_;
    double error_;
};

struct QuadratureResult {
    double value;
    double error;
    int subdivisions;
};

namespace detail {

struct GkSegment {
    double a, b, value, error;
    bool operator<(const GkSegment& o) const { return error < o.error; }
};

template <class F>
GkSegment gauss_kronrod15(const F& f, double a, double b)
{
    static constexpr double xk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr double wk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = wk[7] * fc;
    double gauss = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * xk[i];
        const double pair = f(c - dx) + f(c + dx);
        kronrod += wk[i] * pair;
        if (i % 2 == 1)
            gauss += wg[i / 2] * pair;
    }
    kronrod *= h;
    gauss *= h;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// ∫_a^b f with estimated absolute error ≤ spec.abs_tol. f must be finite at
/// interior points; endpoints are never evaluated.
template <class F>
QuadratureResult integrate_with_error(const F& f, double a, double b, const QuadratureSpec& spec = {})
{
    spec.validate();
    if (!(a <= b))
        throw std::invalid_argument("integrate: require a <= b");
    if (a == b)
        return {0.0, 0.0, 0};

    std::priority_queue<detail::GkSegment> heap;
    heap.push(detail::gauss_kronrod15(f, a, b));
    double total = heap.top().value;
    double err = heap.top().error;
    int splits = 0;
    while (err > spec.abs_tol) {
        if (splits >= spec.max_subdivisions)
            throw QuadratureError(total, err);
        const detail::GkSegment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split further in floating point; accept it.
            err -= worst.error;
            heap.push({worst.a, worst.b, worst.value, 0.0});
            continue;
        }
        const auto left = detail::gauss_kronrod15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++splits;
        if (splits % 64 == 0) {
            // Re-sum to stop drift from the running updates.
            auto copy = heap;
            total = 0.0;
            err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                err += copy.top().error;
                copy.pop();
            }
        }
    }
    return {total, err, splits};
}

template <class F>
double integrate(const F& f, double a, double b, const QuadratureSpec& spec = {})
{
    return integrate_with_error(f, a, b, spec).value;
}

/// Integrates over [a, b] split at the given interior points (points outside
/// (a, b) are ignored). Use for integrands with known kinks.
template <class F>
double integrate_piecewise(const F& f, double a, double b, std::vector<double> breaks,
                           const QuadratureSpec& spec = {})
{
    if (!(a <= b))
        throw std::invalid_argument("integrate_piecewise: require a <= b");
    std::erase_if(breaks, [&](double x) { return !(x > a && x < b); });
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    breaks.insert(breaks.begin(), a);
    breaks.push_back(b);
    QuadratureSpec piece = spec;
    piece.abs_tol = spec.abs_tol / static_cast<double>(breaks.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        total += integrate(f, breaks[i], breaks[i + 1], piece);
    return total;
}

}  // namespace hofail
