#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "screening/numeric.hpp"

namespace screening::lp {

/// Dense row-major matrix with a fixed column count.
struct Rows {
    std::size_t cols = 0;
    std::vector<std::vector<double>> data;

    void add(std::vector<double> row)
    {
        if (row.size() != cols) throw std::invalid_argument("LP row has the wrong number of columns");
        data.push_back(std::move(row));
    }
    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
};

/// minimize c.x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
struct Problem {
    std::vector<double> objective;
    Rows equalities;
    std::vector<double> eq_rhs;
    Rows inequalities;
    std::vector<double> ub_rhs;

    explicit Problem(std::vector<double> c) : objective(std::move(c))
    {
        equalities.cols = objective.size();
        inequalities.cols = objective.size();
    }
    void equal(std::vector<double> row, double rhs)
    {
        equalities.add(std::move(row));
        eq_rhs.push_back(rhs);
    }
    void at_most(std::vector<double> row, double rhs)
    {
        inequalities.add(std::move(row));
        ub_rhs.push_back(rhs);
    }
    void at_least(std::vector<double> row, double rhs)
    {
        for (double& a : row) a = -a;
        at_most(std::move(row), -rhs);
    }
};

enum class Status { optimal, infeasible, unbounded };

struct Result {
    Status status = Status::infeasible;
    std::vector<double> x;      // structural variables
    std::vector<double> slack;  // one per inequality row
    double objective = 0.0;
    int iterations = 0;
    /// Basic columns at termination.  Columns [0, n) are structural, then one
    /// slack per inequality, then artificials.
    std::vector<std::size_t> basis;
    double residual = 0.0;
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), a_(rows, std::vector<double>(cols + 1, 0.0)), basis_(rows)
    {}

    double& at(std::size_t r, std::size_t c) { return a_[r][c]; }
    double& rhs(std::size_t r) { return a_[r][n_]; }
    std::vector<std::size_t>& basis() { return basis_; }
    [[nodiscard]] std::size_t rows() const { return m_; }

    void pivot(std::size_t pr, std::size_t pc)
    {
        auto& prow = a_[pr];
        const double pv = prow[pc];
        for (double& x : prow) x /= pv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == pr) continue;
            const double f = a_[r][pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= n_; ++c) a_[r][c] -= f * prow[c];
            a_[r][pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    /// Bland's rule over the allowed columns: lowest-index entering column with
    /// negative reduced cost, lowest-index basic variable among ratio ties.
    /// Returns false when the basis is optimal or the entering column is
    /// unbounded (the flag tells which).
    bool step(const std::vector<double>& cost, const std::vector<bool>& allowed, bool& unbounded,
              double eps, double pivot_eps)
    {
        std::size_t enter = n_;
        for (std::size_t c = 0; c < n_ && enter == n_; ++c) {
            if (!allowed[c]) continue;
            double rc = cost[c];
            for (std::size_t r = 0; r < m_; ++r) rc -= cost[basis_[r]] * a_[r][c];
            if (rc < -eps) enter = c;
        }
        if (enter == n_) return false;

        std::size_t leave = m_;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m_; ++r) {
            const double coef = a_[r][enter];
            if (coef <= pivot_eps) continue;
            const double ratio = a_[r][n_] / coef;
            const bool tie = leave < m_ && std::abs(ratio - best) <= 1e-12 * std::max(std::abs(ratio), std::abs(best));
            if ((ratio < best && !tie) || (tie && basis_[r] < basis_[leave])) {
                best = std::min(best, ratio);
                leave = r;
            }
        }
        if (leave == m_) {
            unbounded = true;
            return false;
        }
        pivot(leave, enter);
        return true;
    }

    [[nodiscard]] double value_of(std::size_t col) const
    {
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] == col) return a_[r][n_];
        return 0.0;
    }

    void drop_row(std::size_t r)
    {
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --m_;
    }

private:
    std::size_t m_, n_;
    std::vector<std::vector<double>> a_;
    std::vector<std::size_t> basis_;
};

} // namespace detail

/// Two-phase dense simplex with Bland's anti-cycling rule.  Returns an optimal
/// basic feasible solution, or reports infeasibility or unboundedness.
/// Throws NumericalError if the final point violates the constraints by more
/// than the feasibility tolerance.
inline Result solve(const Problem& prob)
{
    const std::size_t n = prob.objective.size();
    if (prob.equalities.cols != n || prob.inequalities.cols != n)
        throw std::invalid_argument("LP constraint width does not match objective");
    if (prob.eq_rhs.size() != prob.equalities.size() || prob.ub_rhs.size() != prob.inequalities.size())
        throw std::invalid_argument("LP right-hand side length does not match row count");
    for (double c : prob.objective)
        if (!std::isfinite(c)) throw std::invalid_argument("LP objective is not finite");

    const std::size_t me = prob.equalities.size();
    const std::size_t mu = prob.inequalities.size();
    const std::size_t m = me + mu;
    const std::size_t slack0 = n;
    const std::size_t art0 = n + mu;
    const std::size_t cols = n + mu + m;

    double scale = 1.0;
    for (const auto* rows : {&prob.equalities.data, &prob.inequalities.data})
        for (const auto& row : *rows)
            for (double a : row) {
                if (!std::isfinite(a)) throw std::invalid_argument("LP coefficient is not finite");
                scale = std::max(scale, std::abs(a));
            }
    const double eps = 1e-12 * scale;
    // Smaller pivots are rounding residue; pivoting on them wrecks the tableau.
    const double pivot_eps = 1e-9 * scale;

    // Solve with the right-hand side scaled to unit max norm so tolerances
    // stay meaningful when every requirement is tiny.
    double rhs_scale = 0.0;
    for (const auto* b : {&prob.eq_rhs, &prob.ub_rhs})
        for (double v : *b) {
            if (!std::isfinite(v)) throw std::invalid_argument("LP right-hand side is not finite");
            rhs_scale = std::max(rhs_scale, std::abs(v));
        }
    if (rhs_scale == 0.0) rhs_scale = 1.0;

    detail::Tableau t(m, cols);
    for (std::size_t r = 0; r < m; ++r) {
        const bool eq = r < me;
        const auto& row = eq ? prob.equalities.data[r] : prob.inequalities.data[r - me];
        const double b = (eq ? prob.eq_rhs[r] : prob.ub_rhs[r - me]) / rhs_scale;
        const double sign = b < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n; ++c) t.at(r, c) = sign * row[c];
        if (!eq) t.at(r, slack0 + (r - me)) = sign;
        t.at(r, art0 + r) = 1.0;
        t.rhs(r) = sign * b;
        t.basis()[r] = art0 + r;
    }

    Result res;
    std::vector<bool> allowed(cols, true);
    bool unbounded = false;

    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t r = 0; r < m; ++r) phase1[art0 + r] = 1.0;
    while (t.step(phase1, allowed, unbounded, eps, pivot_eps)) ++res.iterations;
    double infeas = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r)
        if (t.basis()[r] >= art0) infeas += t.rhs(r);
    if (infeas > tol::lp_feasibility * std::max(1.0, scale)) {
        res.status = Status::infeasible;
        return res;
    }

    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are redundant.
    for (std::size_t r = 0; r < t.rows();) {
        if (t.basis()[r] < art0) {
            ++r;
            continue;
        }
        std::size_t c = art0;
        double big = pivot_eps;
        for (std::size_t j = 0; j < art0; ++j)
            if (std::abs(t.at(r, j)) > big) {
                big = std::abs(t.at(r, j));
                c = j;
            }
        if (c < art0) {
            t.pivot(r, c);
            ++r;
        } else {
            t.drop_row(r);
        }
    }
    for (std::size_t c = art0; c < cols; ++c) allowed[c] = false;

    // Phase 2.
    std::vector<double> phase2(cols, 0.0);
    std::copy(prob.objective.begin(), prob.objective.end(), phase2.begin());
    unbounded = false;
    while (t.step(phase2, allowed, unbounded, eps, pivot_eps)) ++res.iterations;
    if (unbounded) {
        res.status = Status::unbounded;
        return res;
    }

    res.status = Status::optimal;
    res.x.assign(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) res.x[c] = std::max(0.0, t.value_of(c)) * rhs_scale;
    res.slack.assign(mu, 0.0);
    for (std::size_t i = 0; i < mu; ++i) res.slack[i] = std::max(0.0, t.value_of(slack0 + i)) * rhs_scale;
    res.basis = t.basis();
    res.objective = dot(prob.objective, res.x);

    double resid = 0.0;
    for (std::size_t r = 0; r < me; ++r)
        resid = std::max(resid, std::abs(dot(prob.equalities.data[r], res.x) - prob.eq_rhs[r]));
    for (std::size_t r = 0; r < mu; ++r)
        resid = std::max(resid, dot(prob.inequalities.data[r], res.x) - prob.ub_rhs[r]);
    res.residual = resid;
    if (resid > tol::lp_feasibility * std::max(1.0, scale) * rhs_scale) {
        std::ostringstream os;
        os << "simplex residual " << resid << " exceeds tolerance; final basis:";
        for (std::size_t b : res.basis) os << ' ' << b;
        throw NumericalError(os.str());
    }
    return res;
}

} // namespace screening::lp
