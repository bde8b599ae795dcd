#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "screening/environment.hpp"
#include "screening/numeric.hpp"

namespace screening {

/// Payment schedule S(report, v): one nonnegative payment per support point
/// for each report.
class Contract {
public:
    Contract() = default;

    Contract(std::vector<double> pay_low_report, std::vector<double> pay_high_report)
        : low_(std::move(pay_low_report)), high_(std::move(pay_high_report))
    {
        if (low_.size() != high_.size())
            throw std::invalid_argument("contract vectors differ in length");
        for (double x : low_) check_payment(x);
        for (double x : high_) check_payment(x);
    }

    static Contract zero(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }

    [[nodiscard]] std::size_t size() const noexcept { return low_.size(); }
    [[nodiscard]] std::span<const double> pay(Report r) const noexcept
    {
        return r == Report::low ? std::span<const double>(low_) : std::span<const double>(high_);
    }
    [[nodiscard]] std::span<const double> pay_low_report() const noexcept { return low_; }
    [[nodiscard]] std::span<const double> pay_high_report() const noexcept { return high_; }
    [[nodiscard]] double at(Report r, std::size_t i) const { return pay(r)[i]; }

    [[nodiscard]] Contract swapped() const { return {high_, low_}; }

    [[nodiscard]] Contract scaled(double factor) const
    {
        auto l = low_, h = high_;
        for (double& x : l) x *= factor;
        for (double& x : h) x *= factor;
        return {std::move(l), std::move(h)};
    }

    [[nodiscard]] double max_payment() const
    {
        double m = 0.0;
        for (double x : low_) m = std::max(m, x);
        for (double x : high_) m = std::max(m, x);
        return m;
    }

    friend bool operator==(const Contract&, const Contract&) = default;

private:
    static void check_payment(double x)
    {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("payments must be finite and nonnegative");
    }

    std::vector<double> low_;
    std::vector<double> high_;
};

inline void require_matching(const Contract& r, const Environment& env)
{
    if (r.size() != env.size()) {
        std::ostringstream os;
        os << "contract has " << r.size() << " cells per report, environment support has "
           << env.size();
        throw std::invalid_argument(os.str());
    }
}

/// The four state-conditional expected payments f_state . r_report.
struct Exposure {
    double low_state_low_report;
    double low_state_high_report;
    double high_state_low_report;
    double high_state_high_report;

    static Exposure of(const Contract& r, const Environment& env)
    {
        require_matching(r, env);
        return {dot(env.pmf_low(), r.pay_low_report()), dot(env.pmf_low(), r.pay_high_report()),
                dot(env.pmf_high(), r.pay_low_report()), dot(env.pmf_high(), r.pay_high_report())};
    }

    /// Slope d(r) of the truthful expected payment in accuracy.
    [[nodiscard]] double slope(double p) const
    {
        return (1.0 - p) * (low_state_low_report - low_state_high_report) +
               p * (high_state_high_report - high_state_low_report);
    }
};

struct ThresholdForm {
    double bonus;
    double low_threshold;   // pay on a low report when v <= low_threshold
    double high_threshold;  // pay on a high report when v >= high_threshold
};

struct ContractClass {
    std::size_t positive_cells = 0;
    std::size_t distinct_positive_values = 0;
    bool is_three_tier = true;
    bool is_symmetric = true;
    std::optional<ThresholdForm> threshold_form;
};

namespace detail {

// Number of leading entries equal to a common positive value, if all later
// entries are zero.  Returns 0 when the pattern does not hold.
inline std::size_t constant_prefix(std::span<const double> x, double level)
{
    std::size_t k = 0;
    while (k < x.size() && x[k] > 0.0 && nearly_equal(x[k], level, tol::payment_equal)) ++k;
    for (std::size_t i = k; i < x.size(); ++i)
        if (x[i] != 0.0) return 0;
    return k;
}

} // namespace detail

/// Structural classification against the three-tier and threshold shapes.
/// A threshold form needs bonus cells on both reports.
inline ContractClass classify(const Contract& r, const Environment& env)
{
    require_matching(r, env);
    ContractClass c;
    std::vector<double> levels;
    for (Report rep : {Report::low, Report::high}) {
        for (double x : r.pay(rep)) {
            if (x <= 0.0) continue;
            ++c.positive_cells;
            const bool seen = std::any_of(levels.begin(), levels.end(), [x](double y) {
                return nearly_equal(x, y, tol::payment_equal);
            });
            if (!seen) levels.push_back(x);
        }
    }
    c.distinct_positive_values = levels.size();
    c.is_three_tier = levels.size() <= 2;

    const std::size_t n = r.size();
    const auto lo = r.pay_low_report();
    const auto hi = r.pay_high_report();
    for (std::size_t i = 0; i < n; ++i) {
        if (!nearly_equal(lo[i], hi[n - 1 - i], tol::payment_equal)) {
            c.is_symmetric = false;
            break;
        }
    }

    if (levels.size() == 1) {
        const double bonus = levels.front();
        std::vector<double> hi_rev(hi.rbegin(), hi.rend());
        const std::size_t k_low = detail::constant_prefix(lo, bonus);
        const std::size_t k_high = detail::constant_prefix(hi_rev, bonus);
        if (k_low > 0 && k_high > 0) {
            const auto v = env.support();
            c.threshold_form = ThresholdForm{bonus, v[k_low - 1], v[n - k_high]};
        }
    }
    return c;
}

/// Orients the contract so that f_l.r_l >= f_l.r_h and f_h.r_h >= f_h.r_l.
/// When neither labelling satisfies both, the one with the larger effort slope
/// wins, ties going to the input.
inline Contract canonical_orient(const Contract& r, const Environment& env)
{
    const auto e = Exposure::of(r, env);
    auto oriented = [](const Exposure& x) {
        return x.low_state_low_report >= x.low_state_high_report &&
               x.high_state_high_report >= x.high_state_low_report;
    };
    if (oriented(e)) return r;
    const Exposure flipped{e.low_state_high_report, e.low_state_low_report,
                           e.high_state_high_report, e.high_state_low_report};
    if (oriented(flipped)) return r.swapped();
    return e.slope(env.prior_high()) < 0.0 ? r.swapped() : r;
}

/// Mirror-averages a contract: r_l[i] = r_h[n-1-i] = (r_l[i] + r_h[n-1-i]) / 2.
inline Contract symmetrize(const Contract& r, const Environment& env)
{
    require_matching(r, env);
    if (!is_symmetric(env)) throw std::invalid_argument("symmetrize requires a symmetric environment");
    const std::size_t n = r.size();
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double avg = 0.5 * (r.at(Report::low, i) + r.at(Report::high, n - 1 - i));
        lo[i] = avg;
        hi[n - 1 - i] = avg;
    }
    return {std::move(lo), std::move(hi)};
}

/// Payment scheme for partially observable returns: with probability epsilon
/// the principal invests regardless of the report, and only in that event is
/// the agent paid, at 1/epsilon times the base contract.
struct LiftedContract {
    double epsilon;
    Contract base;
    Contract scaled;
};

inline LiftedContract partial_obs_lift(const Contract& r, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("lift probability must lie in (0, 1]");
    std::vector<double> lo(r.pay_low_report().begin(), r.pay_low_report().end());
    std::vector<double> hi(r.pay_high_report().begin(), r.pay_high_report().end());
    for (double& x : lo) x /= epsilon;
    for (double& x : hi) x /= epsilon;
    return {epsilon, r, Contract(std::move(lo), std::move(hi))};
}

} // namespace screening
