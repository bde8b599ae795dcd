#pragma once

// Brute-force counterparts of the agent and solver.  Nothing here calls into
// agent.hpp or solver.hpp: payments and values are recomputed by summing over
// states, signals and returns, so agreement is an independent check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "screening/agent.hpp"
#include "screening/contract.hpp"
#include "screening/environment.hpp"
#include "screening/solver.hpp"

namespace screening::oracle {

struct GridSpec {
    double accuracy_step = 1e-3;
    std::vector<double> payment_levels = default_levels(1.0, 1.0 / 240.0);
    std::size_t max_support = 2;
    std::size_t budget = 10'000'000;

    static std::vector<double> default_levels(double top, double step)
    {
        std::vector<double> out;
        const auto k = static_cast<std::size_t>(std::llround(top / step));
        for (std::size_t i = 0; i <= k; ++i) out.push_back(double(i) * step);
        return out;
    }

    void validate() const
    {
        if (!(accuracy_step > 0.0 && accuracy_step <= 0.5))
            throw std::invalid_argument("oracle accuracy step must lie in (0, 1/2]");
        if (std::find(payment_levels.begin(), payment_levels.end(), 0.0) == payment_levels.end())
            throw std::invalid_argument("oracle payment levels must include 0");
        for (double x : payment_levels)
            if (!(x >= 0.0)) throw std::invalid_argument("oracle payment levels must be nonnegative");
    }

    /// Agreement bound against the exact solver, scaled from 0.01 at the
    /// default resolution (accuracy step 1e-3, payment step 1/240).
    [[nodiscard]] double tolerance() const
    {
        double level_step = 0.0;
        std::vector<double> sorted = payment_levels;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < sorted.size(); ++i) level_step = std::max(level_step, sorted[i] - sorted[i - 1]);
        const double rel = 0.5 * (accuracy_step / 1e-3 + level_step * 240.0);
        return rel <= 1.0 + 1e-9 ? 0.01 : 0.01 * rel;
    }

    [[nodiscard]] std::vector<double> accuracies() const
    {
        std::vector<double> g;
        const auto k = static_cast<std::size_t>(std::floor(0.5 / accuracy_step + 1e-9));
        for (std::size_t i = 0; i <= k; ++i) g.push_back(0.5 + double(i) * accuracy_step);
        if (g.back() < 1.0 - 1e-12) g.push_back(1.0);
        g.back() = std::min(g.back(), 1.0);
        return g;
    }
};

namespace detail {

// Pr[signal | state] for accuracy gamma; state/signal 0 = low, 1 = high.
inline double signal_given_state(int signal, int state, double gamma)
{
    return signal == state ? gamma : 1.0 - gamma;
}

// Which report each signal leads to under a strategy.
inline int report_for(Strategy s, int signal)
{
    switch (s) {
    case Strategy::truthful: return signal;
    case Strategy::flipped: return 1 - signal;
    case Strategy::always_report_low: return 0;
    case Strategy::always_report_high: return 1;
    }
    return signal;
}

struct Enumerated {
    double prior[2];
    std::vector<double> pmf[2];
    std::vector<double> support;
};

inline Enumerated enumerate(const Environment& env)
{
    Enumerated e;
    e.prior[0] = 1.0 - env.prior_high();
    e.prior[1] = env.prior_high();
    e.pmf[0].assign(env.pmf_low().begin(), env.pmf_low().end());
    e.pmf[1].assign(env.pmf_high().begin(), env.pmf_high().end());
    e.support.assign(env.support().begin(), env.support().end());
    return e;
}

// E[payment] for a strategy at accuracy gamma, summed over every
// (state, signal, return) triple.
inline double payment(const Enumerated& e, const std::vector<double> pay[2], Strategy s, double gamma)
{
    double total = 0.0;
    for (int state = 0; state < 2; ++state)
        for (int signal = 0; signal < 2; ++signal) {
            const double w = e.prior[state] * signal_given_state(signal, state, gamma);
            const auto& r = pay[report_for(s, signal)];
            for (std::size_t i = 0; i < e.support.size(); ++i) total += w * e.pmf[state][i] * r[i];
        }
    return total;
}

// Principal's gross return when acting optimally on each signal.
inline double informed_value(const Enumerated& e, double gamma)
{
    double v = 0.0;
    for (int signal = 0; signal < 2; ++signal) {
        double prob = 0.0, risky = 0.0;
        for (int state = 0; state < 2; ++state) {
            const double w = e.prior[state] * signal_given_state(signal, state, gamma);
            prob += w;
            for (std::size_t i = 0; i < e.support.size(); ++i) risky += w * e.pmf[state][i] * e.support[i];
        }
        v += std::max(prob, risky);
    }
    return v;
}

inline double prior_value(const Enumerated& e)
{
    double risky = 0.0;
    for (int state = 0; state < 2; ++state)
        for (std::size_t i = 0; i < e.support.size(); ++i) risky += e.prior[state] * e.pmf[state][i] * e.support[i];
    return std::max(1.0, risky);
}

constexpr std::array<Strategy, 4> kStrategies{Strategy::truthful, Strategy::flipped,
                                              Strategy::always_report_low, Strategy::always_report_high};

// Payments are linear in gamma, so each strategy line is a + b * gamma.
struct Line {
    double a, b;
};

inline std::array<Line, 4> lines(const Enumerated& e, const std::vector<double> pay[2])
{
    std::array<Line, 4> out{};
    for (std::size_t k = 0; k < 4; ++k) {
        const double at0 = payment(e, pay, kStrategies[k], 0.0);
        const double at1 = payment(e, pay, kStrategies[k], 1.0);
        out[k] = {at0, at1 - at0};
    }
    return out;
}

inline BestResponse scan(const std::array<Line, 4>& ln, const std::vector<double>& gammas,
                         const std::vector<double>& costs)
{
    BestResponse best{0.5, Strategy::always_report_low, 0.0, -1e300};
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        std::size_t arg = 0;
        double pay = ln[0].a + ln[0].b * gammas[g];
        for (std::size_t k = 1; k < 4; ++k) {
            const double v = ln[k].a + ln[k].b * gammas[g];
            if (v > pay) {
                pay = v;
                arg = k;
            }
        }
        const double u = pay - costs[g];
        if (u >= best.utility - 1e-12) best = {gammas[g], kStrategies[arg], pay, u};
    }
    return best;
}

} // namespace detail

/// Agent's best response by evaluating utility on every grid accuracy for all
/// four reporting strategies.  Ties go to the higher accuracy, then to the
/// truthful strategy.
inline BestResponse grid_best_response(const Contract& r, const Environment& env, const CostSpec& cost,
                                       const GridSpec& grid = {})
{
    grid.validate();
    require_matching(r, env);
    const auto e = detail::enumerate(env);
    const std::vector<double> pay[2] = {{r.pay_low_report().begin(), r.pay_low_report().end()},
                                        {r.pay_high_report().begin(), r.pay_high_report().end()}};
    const auto gammas = grid.accuracies();
    std::vector<double> costs;
    for (double g : gammas) costs.push_back(cost(g));
    return detail::scan(detail::lines(e, pay), gammas, costs);
}

struct OracleResult {
    SolveResult best;
    BestResponse response;
    double tolerance;
    std::size_t candidates;
};

namespace detail {

inline double binomial(std::size_t n, std::size_t k)
{
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) c = c * double(n - i) / double(i + 1);
    return c;
}

struct Candidate {
    std::vector<std::size_t> cells;  // cell 2i = (low, v_i), 2i+1 = (high, v_i)
    std::vector<double> levels;
    double net = -1e300;
    BestResponse response;
};

inline double net_of(const Enumerated& e, const BestResponse& br)
{
    const bool screens = br.strategy == Strategy::truthful || br.strategy == Strategy::flipped;
    const double gross = screens ? informed_value(e, br.accuracy) : prior_value(e);
    return gross - br.expected_payment;
}

} // namespace detail

/// Exhaustive search over contracts with at most grid.max_support positive
/// cells, each drawn from the positive payment levels.  The lexicographically
/// first support wins ties.  Throws if the candidate count exceeds the budget.
inline OracleResult grid_optimal_contract(const Environment& env, const CostSpec& cost, const GridSpec& grid = {})
{
    grid.validate();
    std::vector<double> levels;
    for (double x : grid.payment_levels)
        if (x > 0.0) levels.push_back(x);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    const std::size_t n = env.size();
    const std::size_t cells = 2 * n;
    double count = 0.0;
    for (std::size_t s = 0; s <= std::min(grid.max_support, cells); ++s)
        count += detail::binomial(cells, s) * std::pow(double(levels.size()), double(s));
    if (count > double(grid.budget))
        throw std::invalid_argument("oracle enumeration exceeds the candidate budget");

    const auto e = detail::enumerate(env);
    const auto gammas = grid.accuracies();
    std::vector<double> costs;
    for (double g : gammas) costs.push_back(cost(g));

    // Supports in lexicographic order.
    std::vector<std::vector<std::size_t>> supports{{}};
    const std::size_t max_support = levels.empty() ? 0 : std::min(grid.max_support, cells);
    for (std::size_t s = 1; s <= max_support; ++s) {
        std::vector<std::size_t> idx(s);
        for (std::size_t i = 0; i < s; ++i) idx[i] = i;
        while (true) {
            supports.push_back(idx);
            std::size_t i = s;
            while (i > 0 && idx[i - 1] == cells - s + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    std::sort(supports.begin(), supports.end());

    auto search_support = [&](const std::vector<std::size_t>& sup) {
        detail::Candidate best;
        std::vector<double> pay[2] = {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        std::vector<std::size_t> pick(sup.size(), 0);
        while (true) {
            for (std::size_t j = 0; j < sup.size(); ++j) pay[sup[j] % 2][sup[j] / 2] = levels[pick[j]];
            const auto br = detail::scan(detail::lines(e, pay), gammas, costs);
            const double net = detail::net_of(e, br);
            if (net > best.net) {
                best.net = net;
                best.response = br;
                best.cells = sup;
                best.levels.clear();
                for (std::size_t j = 0; j < sup.size(); ++j) best.levels.push_back(levels[pick[j]]);
            }
            std::size_t j = sup.size();
            while (j > 0 && pick[j - 1] + 1 == levels.size()) pick[--j] = 0;
            if (j == 0) break;
            ++pick[j - 1];
        }
        return best;
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), supports.size()));
    std::vector<detail::Candidate> per_support(supports.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t s = w; s < supports.size(); s += workers) per_support[s] = search_support(supports[s]);
            });
    }
    detail::Candidate best;
    for (const auto& c : per_support)
        if (c.net > best.net) best = c;

    std::vector<double> lo(n, 0.0), hi(n, 0.0);
    for (std::size_t j = 0; j < best.cells.size(); ++j)
        (best.cells[j] % 2 == 0 ? lo : hi)[best.cells[j] / 2] = best.levels[j];

    OracleResult out;
    out.best.contract = Contract(std::move(lo), std::move(hi));
    out.best.induced_accuracy = best.response.accuracy;
    out.best.payment = best.response.expected_payment;
    out.best.net_payoff = best.net;
    out.best.gross_value = best.net + best.response.expected_payment;
    out.best.family = best.cells.empty() ? Family::zero : Family::general;
    out.best.diagnostics.positive_cells = best.cells.size();
    out.best.diagnostics.parameter = out.best.contract.max_payment();
    out.response = best.response;
    out.tolerance = grid.tolerance();
    out.candidates = static_cast<std::size_t>(count);
    return out;
}

} // namespace screening::oracle
