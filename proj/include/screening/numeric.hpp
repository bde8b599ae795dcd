#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace screening {

/// Raised when a floating point computation cannot be completed reliably
/// (e.g. the simplex leaves residuals above tolerance).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double probability = 1e-12;
inline constexpr double payment_equal = 1e-9;
inline constexpr double utility_tie = 1e-12;
inline constexpr double lp_feasibility = 1e-9;
} // namespace tol

inline double dot(std::span<const double> a, std::span<const double> b)
{
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sum(std::span<const double> a)
{
    double s = 0.0;
    for (double x : a) s += x;
    return s;
}

/// |a - b| <= rel * max(|a|, |b|), with an absolute floor of rel.
inline bool nearly_equal(double a, double b, double rel)
{
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

struct GoldenResult {
    double x;
    double value;
    int evaluations;
};

/// Golden-section search for a maximum of f on [lo, hi], stopping once the
/// bracket is narrower than width.  Returns the best point evaluated, which
/// includes both bracket endpoints.
inline GoldenResult golden_section_max(const std::function<double(double)>& f, double lo,
                                       double hi, double width)
{
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    GoldenResult best{lo, f(lo), 1};
    auto consider = [&best](double x, double v) {
        ++best.evaluations;
        if (v > best.value) best = {x, v, best.evaluations};
    };
    consider(hi, f(hi));
    if (!(hi > lo)) return best;

    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    consider(c, fc);
    consider(d, fd);
    while (b - a > width) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    return best;
}

} // namespace screening
