#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "screening/numeric.hpp"

namespace screening {

/// The agent's binary recommendation: pass (low) or invest (high).
enum class Report { low, high };

/// Unvalidated description of an investment environment.  The safe option
/// always returns 1; returns of the risky option are multiples of it.
struct EnvironmentSpec {
    double prior_high = 0.5;
    std::vector<double> support;
    std::vector<double> pmf_low;
    std::vector<double> pmf_high;
};

/// A validated environment.  Only obtainable through validate_environment(),
/// so every instance satisfies the model's standing assumptions.
class Environment {
public:
    [[nodiscard]] double prior_high() const noexcept { return p_; }
    [[nodiscard]] std::size_t size() const noexcept { return v_.size(); }
    [[nodiscard]] std::span<const double> support() const noexcept { return v_; }
    [[nodiscard]] std::span<const double> pmf_low() const noexcept { return fl_; }
    [[nodiscard]] std::span<const double> pmf_high() const noexcept { return fh_; }
    [[nodiscard]] double mean_low() const noexcept { return mu_l_; }
    [[nodiscard]] double mean_high() const noexcept { return mu_h_; }
    [[nodiscard]] double prior_mean() const noexcept { return p_ * mu_h_ + (1.0 - p_) * mu_l_; }

    [[nodiscard]] EnvironmentSpec spec() const { return {p_, v_, fl_, fh_}; }

private:
    friend Environment validate_environment(const EnvironmentSpec&);
    Environment() = default;

    double p_ = 0.5;
    std::vector<double> v_, fl_, fh_;
    double mu_l_ = 0.0, mu_h_ = 0.0;
};

namespace detail {

inline std::vector<double> checked_pmf(const std::vector<double>& f, const char* name)
{
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i]) || f[i] < 0.0) {
            std::ostringstream os;
            os << name << "[" << i << "] = " << f[i] << " is not a nonnegative probability";
            throw std::invalid_argument(os.str());
        }
    }
    const double total = sum(f);
    if (std::abs(total - 1.0) > tol::probability) {
        std::ostringstream os;
        os.precision(17);
        os << name << " is not normalized (sums to " << total << ")";
        throw std::invalid_argument(os.str());
    }
    std::vector<double> out = f;
    for (double& x : out) x /= total;
    return out;
}

} // namespace detail

/// Checks every environment invariant and returns the validated environment.
/// Throws std::invalid_argument naming the first violated invariant.
inline Environment validate_environment(const EnvironmentSpec& s)
{
    if (!(s.prior_high > 0.0 && s.prior_high < 1.0)) {
        std::ostringstream os;
        os << "prior_high = " << s.prior_high << " must lie strictly inside (0, 1)";
        throw std::invalid_argument(os.str());
    }
    const std::size_t n = s.support.size();
    if (n == 0) throw std::invalid_argument("support is empty");
    if (s.pmf_low.size() != n || s.pmf_high.size() != n)
        throw std::invalid_argument("pmf_low and pmf_high must have the same length as support");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.support[i]) || s.support[i] < 0.0)
            throw std::invalid_argument("support entries must be finite and nonnegative");
        if (i > 0 && !(s.support[i] > s.support[i - 1]))
            throw std::invalid_argument("support must be strictly increasing");
    }

    Environment env;
    env.p_ = s.prior_high;
    env.v_ = s.support;
    env.fl_ = detail::checked_pmf(s.pmf_low, "pmf_low");
    env.fh_ = detail::checked_pmf(s.pmf_high, "pmf_high");
    for (std::size_t i = 0; i < n; ++i) {
        if (env.fl_[i] == 0.0 && env.fh_[i] == 0.0) {
            std::ostringstream os;
            os << "support point " << s.support[i] << " has zero mass in both states";
            throw std::invalid_argument(os.str());
        }
    }
    env.mu_l_ = dot(env.fl_, env.v_);
    env.mu_h_ = dot(env.fh_, env.v_);
    if (!(env.mu_l_ < 1.0 && 1.0 < env.mu_h_)) {
        std::ostringstream os;
        os << "mean condition violated: need mean_low < 1 < mean_high, got " << env.mu_l_
           << " and " << env.mu_h_;
        throw std::invalid_argument(os.str());
    }
    return env;
}

inline void require_accuracy(double gamma)
{
    if (!(gamma >= 0.5 && gamma <= 1.0)) {
        std::ostringstream os;
        os << "accuracy " << gamma << " outside [1/2, 1]";
        throw std::domain_error(os.str());
    }
}

inline double signal_probability(const Environment& env, double gamma, Report report)
{
    require_accuracy(gamma);
    const double p = env.prior_high();
    const double high = p * gamma + (1.0 - p) * (1.0 - gamma);
    return report == Report::high ? high : 1.0 - high;
}

namespace detail {

// Pr[sigma] * E[v | sigma], kept unnormalized so V never divides by zero.
inline double joint_return(const Environment& env, double gamma, Report report)
{
    const double p = env.prior_high();
    const double acc_h = report == Report::high ? gamma : 1.0 - gamma;
    return p * acc_h * env.mean_high() + (1.0 - p) * (1.0 - acc_h) * env.mean_low();
}

} // namespace detail

inline double posterior_mean(const Environment& env, double gamma, Report report)
{
    const double pr = signal_probability(env, gamma, report);
    if (pr <= 0.0) throw std::domain_error("posterior undefined for a zero-probability report");
    return detail::joint_return(env, gamma, report) / pr;
}

/// Whether the principal takes the risky option after a report.  A posterior
/// mean of exactly 1 goes to the safe option.
inline bool invests_after(const Environment& env, double gamma, Report report)
{
    const double pr = signal_probability(env, gamma, report);
    return detail::joint_return(env, gamma, report) > pr;
}

/// Expected gross return V(gamma) of a principal who acts optimally on a
/// truthful report of the given accuracy.
inline double principal_value(const Environment& env, double gamma)
{
    require_accuracy(gamma);
    double v = 0.0;
    for (Report r : {Report::low, Report::high}) {
        const double pr = signal_probability(env, gamma, r);
        v += std::max(pr, detail::joint_return(env, gamma, r));
    }
    return v;
}

/// Value of acting on the prior alone: max{1, prior mean}.
inline double uninformed_value(const Environment& env) { return std::max(1.0, env.prior_mean()); }

/// Returns the center v-hat when the environment is symmetric.
inline std::optional<double> symmetry_center(const Environment& env)
{
    if (std::abs(env.prior_high() - 0.5) > tol::probability) return std::nullopt;
    const auto v = env.support();
    const auto fl = env.pmf_low();
    const auto fh = env.pmf_high();
    const std::size_t n = env.size();
    const double center = 0.5 * (v.front() + v.back());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = n - 1 - i;
        if (!nearly_equal(0.5 * (v[i] + v[j]), center, tol::probability)) return std::nullopt;
        if (std::abs(fl[i] - fh[j]) > tol::probability) return std::nullopt;
    }
    return center;
}

inline bool is_symmetric(const Environment& env) { return symmetry_center(env).has_value(); }

/// Weak monotonicity of f_h / f_l along the support, comparing neighbours by
/// cross-multiplication so that f_l = 0 reads as an infinite ratio.
inline bool satisfies_mlrp(std::span<const double> fl, std::span<const double> fh)
{
    if (fl.size() != fh.size()) throw std::invalid_argument("pmfs differ in length");
    for (std::size_t i = 0; i + 1 < fl.size(); ++i) {
        if (fh[i] * fl[i + 1] > fh[i + 1] * fl[i] + 1e-15)
            return false;
    }
    return true;
}

inline bool satisfies_mlrp(const Environment& env) { return satisfies_mlrp(env.pmf_low(), env.pmf_high()); }

// ---------------------------------------------------------------------------

enum class CostFamily { quadratic, power };

/// Effort cost c(gamma) = k (gamma - 1/2)^m.
class CostSpec {
public:
    static CostSpec quadratic(double k) { return CostSpec(CostFamily::quadratic, k, 2.0); }
    static CostSpec power(double k, double m) { return CostSpec(CostFamily::power, k, m); }

    [[nodiscard]] CostFamily family() const noexcept { return family_; }
    [[nodiscard]] double coefficient() const noexcept { return k_; }
    [[nodiscard]] double exponent() const noexcept { return m_; }
    [[nodiscard]] bool is_linear() const noexcept { return m_ == 1.0; }

    [[nodiscard]] double operator()(double gamma) const
    {
        require_accuracy(gamma);
        return k_ * std::pow(gamma - 0.5, m_);
    }

    [[nodiscard]] double derivative(double gamma) const
    {
        require_accuracy(gamma);
        if (m_ == 1.0) return k_;
        return k_ * m_ * std::pow(gamma - 0.5, m_ - 1.0);
    }

    /// gamma in [1/2, 1] with c'(gamma) = slope, or nullopt when slope is
    /// outside [0, c'(1)].  For linear cost every gamma matches c'(gamma) = k,
    /// and the highest one is returned.
    [[nodiscard]] std::optional<double> inverse_derivative(double slope) const
    {
        const double top = derivative(1.0);
        if (!(slope >= 0.0) || slope > top) return std::nullopt;
        if (k_ == 0.0) return 1.0;
        if (m_ == 1.0) return slope == k_ ? std::optional<double>(1.0) : std::nullopt;
        const double g = 0.5 + std::pow(slope / (k_ * m_), 1.0 / (m_ - 1.0));
        return std::clamp(g, 0.5, 1.0);
    }

private:
    CostSpec(CostFamily f, double k, double m) : family_(f), k_(k), m_(m)
    {
        if (!(k >= 0.0) || !std::isfinite(k))
            throw std::invalid_argument("cost coefficient must be finite and >= 0");
        if (!(m >= 1.0) || !std::isfinite(m))
            throw std::invalid_argument("cost exponent must be finite and >= 1");
    }

    CostFamily family_;
    double k_;
    double m_;
};

} // namespace screening
