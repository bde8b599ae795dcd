#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls the simplex or the solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "screening/environment.hpp"

namespace testing_support {

using screening::Environment;
using screening::validate_environment;

inline Environment three_point()
{
    return validate_environment({0.5, {0.0, 1.0, 2.0}, {0.6, 0.2, 0.2}, {0.2, 0.2, 0.6}});
}

inline Environment five_point_non_mlrp()
{
    return validate_environment(
        {0.5, {0.0, 0.5, 1.0, 1.5, 2.0}, {0.125, 0.375, 0.25, 0.125, 0.125}, {0.125, 0.125, 0.25, 0.375, 0.125}});
}

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting; nullopt if singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-13) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

struct VertexOptimum {
    double value;
    std::vector<double> x;
};

/// min c.x s.t. A_eq x = b_eq, A_ub x <= b_ub, x >= 0 by enumerating every
/// basis of the slack-augmented system.  Exponential; for tiny problems only.
/// Returns nullopt when no basic feasible solution exists.
inline std::optional<VertexOptimum> vertex_enumeration(const std::vector<double>& c,
                                                       const std::vector<std::vector<double>>& a_eq,
                                                       const std::vector<double>& b_eq,
                                                       const std::vector<std::vector<double>>& a_ub,
                                                       const std::vector<double>& b_ub)
{
    const std::size_t n = c.size();
    const std::size_t m = a_eq.size() + a_ub.size();
    const std::size_t cols = n + a_ub.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(cols, 0.0));
    std::vector<double> b(m);
    for (std::size_t r = 0; r < a_eq.size(); ++r) {
        std::copy(a_eq[r].begin(), a_eq[r].end(), a[r].begin());
        b[r] = b_eq[r];
    }
    for (std::size_t r = 0; r < a_ub.size(); ++r) {
        std::copy(a_ub[r].begin(), a_ub[r].end(), a[a_eq.size() + r].begin());
        a[a_eq.size() + r][n + r] = 1.0;
        b[a_eq.size() + r] = b_ub[r];
    }

    std::optional<VertexOptimum> best;
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    if (m > cols) return std::nullopt;
    while (true) {
        std::vector<std::vector<double>> basis(m, std::vector<double>(m));
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t j = 0; j < m; ++j) basis[r][j] = a[r][idx[j]];
        if (auto xb = solve_square(basis, b)) {
            bool feasible = true;
            for (double v : *xb) feasible &= v >= -1e-10;
            if (feasible) {
                std::vector<double> x(n, 0.0);
                double value = 0.0;
                for (std::size_t j = 0; j < m; ++j)
                    if (idx[j] < n) {
                        x[idx[j]] = std::max(0.0, (*xb)[j]);
                        value += c[idx[j]] * x[idx[j]];
                    }
                if (!best || value < best->value) best = VertexOptimum{value, x};
            }
        }
        std::size_t i = m;
        while (i > 0 && idx[i - 1] == cols - m + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
}

/// Expected payment of the truthful line, written out state by state and
/// signal by signal instead of through the closed-form slope.
inline double truthful_payment_bruteforce(const Environment& env, const std::vector<double>& rl,
                                          const std::vector<double>& rh, double gamma)
{
    double total = 0.0;
    for (int state = 0; state < 2; ++state) {
        const double prior = state == 1 ? env.prior_high() : 1.0 - env.prior_high();
        const auto f = state == 1 ? env.pmf_high() : env.pmf_low();
        for (int signal = 0; signal < 2; ++signal) {
            const double ps = signal == state ? gamma : 1.0 - gamma;
            for (std::size_t i = 0; i < env.size(); ++i)
                total += prior * ps * f[i] * (signal == 1 ? rh[i] : rl[i]);
        }
    }
    return total;
}

} // namespace testing_support
