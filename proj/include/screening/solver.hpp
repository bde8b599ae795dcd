#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "screening/agent.hpp"
#include "screening/contract.hpp"
#include "screening/environment.hpp"
#include "screening/numeric.hpp"
#include "screening/simplex.hpp"

namespace screening {

enum class Family { general, threshold, linear, zero };

inline std::string_view to_string(Family f)
{
    switch (f) {
    case Family::general: return "general";
    case Family::threshold: return "threshold";
    case Family::linear: return "linear";
    case Family::zero: return "zero";
    }
    return "?";
}

/// What it takes to implement a target accuracy: the slope the truthful
/// payment line must have, and the agent's cost at the target.
struct ImplementationProblem {
    double target_accuracy;
    double required_slope;
    double effort_cost;

    static ImplementationProblem at(const CostSpec& cost, double gamma)
    {
        if (!(gamma > 0.5 && gamma <= 1.0)) {
            std::ostringstream os;
            os << "target accuracy " << gamma << " outside (1/2, 1]";
            throw std::domain_error(os.str());
        }
        const ImplementationProblem ip{gamma, cost.derivative(gamma), cost(gamma)};
        if (!(ip.required_slope > 0.0))
            throw std::domain_error("target accuracy needs a positive marginal cost");
        return ip;
    }
};

struct Diagnostics {
    bool ic_low_binding = false;   // truthful effort vs always reporting low
    bool ic_high_binding = false;  // truthful effort vs always reporting high
    int lp_iterations = 0;
    std::size_t positive_cells = 0;
    /// Linear share alpha, threshold bonus, or largest payment.
    double parameter = 0.0;
};

struct SolveResult {
    Contract contract;
    double induced_accuracy = 0.5;
    double gross_value = 0.0;
    double payment = 0.0;
    double net_payoff = 0.0;
    Family family = Family::zero;
    Diagnostics diagnostics;
};

namespace detail {

inline std::size_t count_positive(const Contract& r)
{
    std::size_t k = 0;
    for (Report rep : {Report::low, Report::high})
        for (double x : r.pay(rep)) k += x > 0.0;
    return k;
}

inline SolveResult finish(const Environment& env, Contract contract, double gamma, Family family)
{
    SolveResult s;
    s.induced_accuracy = gamma;
    s.gross_value = principal_value(env, gamma);
    s.payment = expected_payment(contract, env, gamma);
    s.net_payoff = s.gross_value - s.payment;
    s.family = family;
    s.diagnostics.positive_cells = count_positive(contract);
    s.diagnostics.parameter = contract.max_payment();
    s.contract = std::move(contract);
    return s;
}

inline void fill_binding(SolveResult& s, const Environment& env, const CostSpec& cost)
{
    const auto sh = shirk_values(s.contract, env);
    const double u = truthful_payment_line(s.contract, env, s.induced_accuracy) - cost(s.induced_accuracy);
    const double scale = std::max(1.0, s.payment);
    s.diagnostics.ic_low_binding = std::abs(u - sh.always_low) <= 1e-9 * scale;
    s.diagnostics.ic_high_binding = std::abs(u - sh.always_high) <= 1e-9 * scale;
}

// Column 2i is the (low report, v_i) cell and column 2i+1 the (high report,
// v_i) cell, so Bland's lowest-index rule prefers low returns, then the low
// report.
inline std::size_t cell(Report r, std::size_t i) { return 2 * i + (r == Report::high ? 1 : 0); }

struct CellCoefficients {
    std::vector<double> truthful;  // T-hat(gamma; r) per cell
    std::vector<double> slope;     // d(r) per cell
    std::vector<double> shirk_low; // R_l per cell
    std::vector<double> shirk_high;
};

inline CellCoefficients cell_coefficients(const Environment& env, double gamma)
{
    const std::size_t n = env.size();
    const double p = env.prior_high();
    const auto fl = env.pmf_low();
    const auto fh = env.pmf_high();
    CellCoefficients c;
    c.truthful.assign(2 * n, 0.0);
    c.slope.assign(2 * n, 0.0);
    c.shirk_low.assign(2 * n, 0.0);
    c.shirk_high.assign(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = cell(Report::low, i), hi = cell(Report::high, i);
        const double mass = (1.0 - p) * fl[i] + p * fh[i];
        c.truthful[lo] = (1.0 - p) * gamma * fl[i] + p * (1.0 - gamma) * fh[i];
        c.truthful[hi] = (1.0 - p) * (1.0 - gamma) * fl[i] + p * gamma * fh[i];
        c.slope[lo] = (1.0 - p) * fl[i] - p * fh[i];
        c.slope[hi] = p * fh[i] - (1.0 - p) * fl[i];
        c.shirk_low[lo] = mass;
        c.shirk_high[hi] = mass;
    }
    return c;
}

inline Contract contract_from_cells(const std::vector<double>& x, std::size_t n)
{
    double top = 0.0;
    for (double v : x) top = std::max(top, v);
    auto clean = [top](double v) { return v > 1e-12 * top ? v : 0.0; };
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = clean(x[cell(Report::low, i)]);
        hi[i] = clean(x[cell(Report::high, i)]);
    }
    return {std::move(lo), std::move(hi)};
}

} // namespace detail

/// Cheapest contract implementing gamma with truthful reporting:
///
///   min  T-hat(gamma; r)
///   s.t. d(r) = c'(gamma)                          (local effort choice)
///        T-hat(gamma; r) - c(gamma) >= R_l(r)       (no gain from always low)
///        T-hat(gamma; r) - c(gamma) >= R_h(r)       (no gain from always high)
///        r >= 0
///
/// Solved as a 3-row LP, so the returned vertex has at most three basic
/// variables and, under strictly convex cost, at most two positive payments.
///
/// The rows are passed in an equivalent form.  With the slope pinned at d*,
/// T-hat(gamma) = (R_l + R_h)/2 + (gamma - 1/2) d*, so the objective becomes
/// (R_l + R_h)/2 and both incentive rows become |R_h - R_l|/2 <= s with
/// s = (gamma - 1/2) d* - c(gamma).  The direct form subtracts nearly equal
/// coefficients when gamma is close to 1/2.
inline SolveResult min_payment_general(const Environment& env, const CostSpec& cost, double gamma)
{
    const auto ip = ImplementationProblem::at(cost, gamma);
    const std::size_t n = env.size();
    const auto cc = detail::cell_coefficients(env, gamma);
    const double surplus = (gamma - 0.5) * ip.required_slope - ip.effort_cost;

    std::vector<double> base(2 * n), half_gap(2 * n);
    for (std::size_t j = 0; j < 2 * n; ++j) {
        base[j] = 0.5 * (cc.shirk_low[j] + cc.shirk_high[j]);
        half_gap[j] = 0.5 * (cc.shirk_high[j] - cc.shirk_low[j]);
    }
    lp::Problem prob(base);
    prob.equal(cc.slope, ip.required_slope);
    std::vector<double> neg_gap(half_gap);
    for (double& a : neg_gap) a = -a;
    prob.at_most(neg_gap, surplus);   // T-hat - c >= R_l
    prob.at_most(half_gap, surplus);  // T-hat - c >= R_h

    const auto lp_res = lp::solve(prob);
    if (lp_res.status != lp::Status::optimal) {
        std::ostringstream os;
        os << "payment LP at accuracy " << gamma << " ended "
           << (lp_res.status == lp::Status::infeasible ? "infeasible" : "unbounded");
        throw NumericalError(os.str());
    }
    auto s = detail::finish(env, detail::contract_from_cells(lp_res.x, n), gamma, Family::general);
    s.diagnostics.lp_iterations = lp_res.iterations;
    detail::fill_binding(s, env, cost);
    return s;
}

/// Per-cell incentive per unit of expected payment in the symmetric reduced
/// program; nullopt where the cell carries no positive incentive.
inline std::vector<std::optional<double>> bang_for_buck(const Environment& env, double gamma)
{
    const auto fl = env.pmf_low();
    const auto fh = env.pmf_high();
    std::vector<std::optional<double>> ratio(env.size());
    for (std::size_t i = 0; i < env.size(); ++i)
        if (fl[i] > fh[i]) ratio[i] = (fl[i] - fh[i]) / (gamma * fl[i] + (1.0 - gamma) * fh[i]);
    return ratio;
}

/// Threshold construction for symmetric MLRP environments: a single bonus
/// on the lowest returns after a low report and, mirrored, on the highest
/// returns after a high report, covering every cell of maximal bang for buck.
inline SolveResult min_payment_symmetric(const Environment& env, const CostSpec& cost, double gamma)
{
    if (!is_symmetric(env)) throw std::invalid_argument("threshold path requires a symmetric environment");
    if (!satisfies_mlrp(env)) throw std::invalid_argument("threshold path requires MLRP");
    const auto ip = ImplementationProblem::at(cost, gamma);

    const auto ratio = bang_for_buck(env, gamma);
    double best = -1.0;
    for (const auto& r : ratio)
        if (r) best = std::max(best, *r);
    if (best <= 0.0) throw std::invalid_argument("no return carries evidence for the low state");

    const std::size_t n = env.size();
    const auto fl = env.pmf_low();
    const auto fh = env.pmf_high();
    std::size_t k = 0;
    double incentive = 0.0;
    while (k < n && ratio[k] && nearly_equal(*ratio[k], best, 1e-12)) {
        incentive += fl[k] - fh[k];
        ++k;
    }
    for (std::size_t i = k; i < n; ++i)
        if (ratio[i] && nearly_equal(*ratio[i], best, 1e-12))
            throw std::logic_error("maximal bang-for-buck cells are not an initial segment");

    const double bonus = ip.required_slope / incentive;
    std::vector<double> lo(n, 0.0), hi(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        lo[i] = bonus;
        hi[n - 1 - i] = bonus;
    }
    auto s = detail::finish(env, Contract(std::move(lo), std::move(hi)), gamma, Family::threshold);
    s.diagnostics.parameter = bonus;
    detail::fill_binding(s, env, cost);
    return s;
}

enum class Implementor { general, symmetric };

struct AccuracySearch {
    std::size_t grid_points = 1001;
    double refine_width = 1e-7;
};

/// Maximizes V(gamma) - min payment(gamma) over accuracy.  The grid starts at
/// gamma = 1/2, which stands for the zero contract, and ends at 1.  The best
/// grid bracket is refined by golden-section search.  The zero contract wins
/// ties.
inline SolveResult optimize_accuracy(const Environment& env, const CostSpec& cost, Implementor impl,
                                     AccuracySearch search = {})
{
    if (search.grid_points < 2) throw std::invalid_argument("accuracy grid needs at least 2 points");
    const double w0 = uninformed_value(env);
    auto implement = [&](double g) {
        return impl == Implementor::general ? min_payment_general(env, cost, g)
                                            : min_payment_symmetric(env, cost, g);
    };
    auto welfare = [&](double g) {
        if (g <= 0.5) return w0;
        return implement(g).net_payoff;
    };

    const std::size_t last = search.grid_points - 1;
    auto grid_at = [last](std::size_t i) { return i == last ? 1.0 : 0.5 + 0.5 * double(i) / double(last); };
    std::size_t best_i = 0;
    double best_w = w0;
    for (std::size_t i = 1; i <= last; ++i) {
        const double w = welfare(grid_at(i));
        if (w > best_w) {
            best_w = w;
            best_i = i;
        }
    }
    const double lo = grid_at(best_i == 0 ? 0 : best_i - 1);
    const double hi = grid_at(std::min(best_i + 1, last));
    const auto refined = golden_section_max(welfare, lo, hi, search.refine_width);
    double gamma = grid_at(best_i);
    if (refined.value > best_w) {
        gamma = refined.x;
        best_w = refined.value;
    }

    if (gamma <= 0.5 || !(best_w > w0)) {
        auto z = detail::finish(env, Contract::zero(env.size()), 0.5, Family::zero);
        z.gross_value = w0;
        z.net_payoff = w0;
        return z;
    }
    return implement(gamma);
}

// ---------------------------------------------------------------------------
// Linear share contracts

/// The agent receives alpha times the realized return of the chosen option:
/// alpha * v after a high report (invest), alpha * 1 after a low one (pass).
inline Contract linear_share_contract(const Environment& env, double alpha)
{
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("linear share must lie in [0, 1)");
    std::vector<double> lo(env.size(), alpha), hi(env.size());
    for (std::size_t i = 0; i < env.size(); ++i) hi[i] = alpha * env.support()[i];
    return {std::move(lo), std::move(hi)};
}

struct LinearOutcome {
    double alpha;
    bool informative;  // agent screens and the principal follows its report
    BestResponse response;
    double gross;
    double payment;
    double net;
};

/// Equilibrium of a linear share.  If the agent screens and reports
/// truthfully, and the posteriors justify investing exactly on high reports,
/// the principal follows the report.  Otherwise the report carries no weight,
/// the agent exerts no effort and the principal acts on the prior.
inline LinearOutcome evaluate_linear(const Environment& env, const CostSpec& cost, double alpha)
{
    LinearOutcome out{alpha, false, {}, 0.0, 0.0, 0.0};
    const Contract r = linear_share_contract(env, alpha);
    out.response = best_response(r, env, cost);
    const double g = out.response.accuracy;
    out.informative = out.response.strategy == Strategy::truthful && g > 0.5 &&
                      invests_after(env, g, Report::high) && !invests_after(env, g, Report::low);
    if (out.informative) {
        out.gross = principal_value(env, g);
        out.payment = out.response.expected_payment;
    } else {
        out.response = BestResponse{0.5, Strategy::always_report_low, 0.0, 0.0};
        out.gross = uninformed_value(env);
        out.payment = alpha * out.gross;
        out.response.expected_payment = out.payment;
        out.response.utility = out.payment;
    }
    out.net = out.gross - out.payment;
    return out;
}

struct LinearSearch {
    double alpha_max = 0.5;
    double step = 1e-4;
    double refine_width = 1e-9;
};

inline SolveResult optimal_linear(const Environment& env, const CostSpec& cost, LinearSearch search = {})
{
    auto net = [&](double a) { return evaluate_linear(env, cost, a).net; };
    const auto steps = static_cast<std::size_t>(std::llround(search.alpha_max / search.step));
    std::size_t best_i = 0;
    double best_v = net(0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
        const double v = net(double(i) * search.step);
        if (v > best_v) {
            best_v = v;
            best_i = i;
        }
    }
    const double lo = double(best_i == 0 ? 0 : best_i - 1) * search.step;
    const double hi = double(std::min(best_i + 1, steps)) * search.step;
    const auto refined = golden_section_max(net, lo, hi, search.refine_width);
    double alpha = double(best_i) * search.step;
    if (refined.value > best_v) alpha = refined.x;

    const auto o = evaluate_linear(env, cost, alpha);
    SolveResult s;
    s.contract = linear_share_contract(env, alpha);
    s.induced_accuracy = o.response.accuracy;
    s.gross_value = o.gross;
    s.payment = o.payment;
    s.net_payoff = o.net;
    s.family = alpha > 0.0 && o.informative ? Family::linear : Family::zero;
    s.diagnostics.positive_cells = detail::count_positive(s.contract);
    s.diagnostics.parameter = alpha;
    return s;
}

/// Net payoff of the best contract over that of the best linear share.
inline double gap_ratio(const Environment& env, const CostSpec& cost, AccuracySearch search = {})
{
    const double best = optimize_accuracy(env, cost, Implementor::general, search).net_payoff;
    return best / optimal_linear(env, cost).net_payoff;
}

/// Principal's net payoff from an arbitrary contract under the agent's exact
/// best response.  A screening agent's report is followed (inverted if
/// flipped); otherwise the principal acts on the prior.
inline double contract_net_payoff(const Contract& r, const Environment& env, const CostSpec& cost)
{
    const auto br = best_response(r, env, cost);
    const bool screens = br.strategy == Strategy::truthful || br.strategy == Strategy::flipped;
    return (screens ? principal_value(env, br.accuracy) : uninformed_value(env)) - br.expected_payment;
}

// ---------------------------------------------------------------------------
// Partially observable returns

/// Agent's expected payment at accuracy gamma under the lifted scheme: paid
/// the scaled contract in the forced-investment event, nothing otherwise.
inline double lifted_expected_payment(const LiftedContract& lifted, const Environment& env, double gamma)
{
    // The (1 - epsilon) branch pays nothing.
    return lifted.epsilon * expected_payment(lifted.scaled, env, gamma);
}

struct LiftedOutcome {
    BestResponse response;
    double gross;
    double payment;
    double net;
};

/// Principal's outcome under the lifted scheme.  With probability epsilon
/// the risky option is taken blindly (earning the prior mean); otherwise the
/// principal acts on the report.
inline LiftedOutcome lifted_net_payoff(const LiftedContract& lifted, const Environment& env,
                                       const CostSpec& cost)
{
    const Contract effective = lifted.scaled.scaled(lifted.epsilon);
    LiftedOutcome o;
    o.response = best_response(effective, env, cost);
    const double g = o.response.accuracy;
    const bool screens = o.response.strategy == Strategy::truthful || o.response.strategy == Strategy::flipped;
    const double informed = screens ? principal_value(env, g) : uninformed_value(env);
    o.gross = lifted.epsilon * env.prior_mean() + (1.0 - lifted.epsilon) * informed;
    o.payment = lifted_expected_payment(lifted, env, g);
    o.net = o.gross - o.payment;
    return o;
}

// ---------------------------------------------------------------------------
// Both incentive constraints binding, under linear cost

struct BindingProgram {
    Contract contract;
    double shirk_payment;  // optimal R_l = R_h
    double gap_low;        // f_l . (r_l - r_h)
    double gap_high;       // f_h . (r_h - r_l)
};

/// Reduced program for the case where both incentive constraints bind:
/// min R_l(r) s.t. (1-p) f_l.(r_l - r_h) = d/2 and p f_h.(r_h - r_l) = d/2.
inline BindingProgram solve_binding_program(const Environment& env, double required_slope)
{
    const std::size_t n = env.size();
    const double p = env.prior_high();
    const auto fl = env.pmf_low();
    const auto fh = env.pmf_high();
    std::vector<double> obj(2 * n, 0.0), row_l(2 * n, 0.0), row_h(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = detail::cell(Report::low, i), hi = detail::cell(Report::high, i);
        obj[lo] = (1.0 - p) * fl[i] + p * fh[i];
        row_l[lo] = (1.0 - p) * fl[i];
        row_l[hi] = -(1.0 - p) * fl[i];
        row_h[lo] = -p * fh[i];
        row_h[hi] = p * fh[i];
    }
    lp::Problem prob(obj);
    prob.equal(row_l, required_slope / 2.0);
    prob.equal(row_h, required_slope / 2.0);
    const auto res = lp::solve(prob);
    if (res.status != lp::Status::optimal) throw NumericalError("binding program has no optimum");
    Contract c = detail::contract_from_cells(res.x, n);
    BindingProgram b{c, res.objective, 0.0, 0.0};
    const auto e = Exposure::of(c, env);
    b.gap_low = e.low_state_low_report - e.low_state_high_report;
    b.gap_high = e.high_state_high_report - e.high_state_low_report;
    return b;
}

} // namespace screening
