#pragma once

#include <algorithm>
#include <array>
#include <string_view>
#include <utility>

#include "screening/contract.hpp"
#include "screening/environment.hpp"

namespace screening {

enum class Strategy { truthful, flipped, always_report_low, always_report_high };

inline std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::truthful: return "truthful";
    case Strategy::flipped: return "flipped";
    case Strategy::always_report_low: return "always_report_low";
    case Strategy::always_report_high: return "always_report_high";
    }
    return "?";
}

struct BestResponse {
    double accuracy = 0.5;
    Strategy strategy = Strategy::truthful;
    double expected_payment = 0.0;
    double utility = 0.0;
};

/// Expected payment when the agent reports its signal truthfully:
/// (1-p)(g fl.rl + (1-g) fl.rh) + p(g fh.rh + (1-g) fh.rl).
inline double truthful_payment_line(const Contract& r, const Environment& env, double gamma)
{
    require_accuracy(gamma);
    const auto e = Exposure::of(r, env);
    const double p = env.prior_high();
    return (1.0 - p) * (gamma * e.low_state_low_report + (1.0 - gamma) * e.low_state_high_report) +
           p * (gamma * e.high_state_high_report + (1.0 - gamma) * e.high_state_low_report);
}

/// Expected payment when the agent always reports the opposite of its signal.
inline double flipped_payment_line(const Contract& r, const Environment& env, double gamma)
{
    return truthful_payment_line(r.swapped(), env, gamma);
}

struct ShirkValues {
    double always_low;
    double always_high;
    [[nodiscard]] double best() const { return std::max(always_low, always_high); }
};

/// Expected payments of the two constant reports, which need no effort.
inline ShirkValues shirk_values(const Contract& r, const Environment& env)
{
    const auto e = Exposure::of(r, env);
    const double p = env.prior_high();
    return {(1.0 - p) * e.low_state_low_report + p * e.high_state_low_report,
            (1.0 - p) * e.low_state_high_report + p * e.high_state_high_report};
}

inline double effort_slope(const Contract& r, const Environment& env)
{
    return Exposure::of(r, env).slope(env.prior_high());
}

/// T(gamma; r): the best of the four reporting strategies at accuracy gamma.
inline double expected_payment(const Contract& r, const Environment& env, double gamma)
{
    const auto s = shirk_values(r, env);
    return std::max({truthful_payment_line(r, env, gamma), flipped_payment_line(r, env, gamma),
                     s.always_low, s.always_high});
}

/// The agent's utility-maximizing accuracy and reporting strategy.
///
/// After orienting the contract, U is the constant max{R_l, R_h} minus cost
/// below the accuracy where the truthful line overtakes the shirk values, and
/// the concave T-hat minus cost above it.  So the only candidates are zero
/// effort with the better constant report, and the first-order point of the
/// truthful piece clamped to that piece.  Ties go to higher accuracy, then to
/// truthful reporting.
inline BestResponse best_response(const Contract& r, const Environment& env, const CostSpec& cost)
{
    const Contract oriented = canonical_orient(r, env);
    const bool swapped = !(oriented == r);
    const auto shirk = shirk_values(r, env);
    const double shirk_pay = shirk.best();

    BestResponse best;
    best.accuracy = 0.5;
    best.expected_payment = shirk_pay;
    best.utility = shirk_pay;
    const double base = truthful_payment_line(oriented, env, 0.5);
    if (nearly_equal(base, shirk_pay, tol::utility_tie))
        best.strategy = swapped ? Strategy::flipped : Strategy::truthful;
    else
        best.strategy = shirk.always_low >= shirk.always_high ? Strategy::always_report_low
                                                              : Strategy::always_report_high;

    const double d = effort_slope(oriented, env);
    if (!(d > 0.0)) return best;

    // Truthful line reaches the shirk payment at `entry`.
    const double entry = std::max(0.5, 0.5 + (shirk_pay - base) / d);
    if (entry > 1.0) return best;

    double foc;
    const double top = cost.derivative(1.0);
    if (cost.is_linear()) {
        foc = (d > top || nearly_equal(d, top, tol::utility_tie)) ? 1.0 : 0.5;
    } else if (auto g = cost.inverse_derivative(d)) {
        foc = *g;
    } else {
        foc = 1.0;
    }
    const double gamma = std::clamp(foc, entry, 1.0);
    const double pay = base + (gamma - 0.5) * d;
    const double utility = pay - cost(gamma);

    const double scale = std::max({1.0, std::abs(utility), std::abs(best.utility)});
    if (utility >= best.utility - tol::utility_tie * scale) {
        best.accuracy = gamma;
        best.expected_payment = std::max(pay, shirk_pay);
        best.utility = utility;
        best.strategy = swapped ? Strategy::flipped : Strategy::truthful;
    }
    return best;
}

} // namespace screening
