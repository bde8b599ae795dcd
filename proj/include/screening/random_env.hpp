#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "screening/environment.hpp"

namespace screening {

/// Seeded source of environments for property sweeps.  Draws come straight
/// from the 64-bit Mersenne twister bits, so a seed replays identically
/// across standard libraries.
class EnvironmentSampler {
public:
    explicit EnvironmentSampler(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return double(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t lo, std::size_t hi) { return lo + std::size_t(rng_() % (hi - lo + 1)); }

    /// Any valid environment with support size in [min_n, max_n].  pmfs are
    /// rejection-sampled until mean_low < 1 < mean_high.
    Environment general(std::size_t min_n = 2, std::size_t max_n = 6)
    {
        const std::size_t n = index(min_n, max_n);
        for (int attempt = 0; attempt < 100000; ++attempt) {
            EnvironmentSpec s;
            s.prior_high = uniform(0.05, 0.95);
            s.support = sorted_support(n, 0.0, 3.0);
            s.pmf_low = simplex_point(n);
            s.pmf_high = simplex_point(n);
            if (dot(s.pmf_low, s.support) < 1.0 && dot(s.pmf_high, s.support) > 1.0) return validate_environment(s);
        }
        throw std::runtime_error("environment sampler failed to meet the mean condition");
    }

    /// Symmetric environment about v-hat = 1 with strictly increasing
    /// likelihood ratio f_h / f_l.
    Environment symmetric_mlrp(std::size_t min_n = 2, std::size_t max_n = 6)
    {
        const std::size_t n = index(min_n, max_n);
        for (int attempt = 0; attempt < 100000; ++attempt) {
            // Offsets t antisymmetric and increasing, v = 1 + t >= 0.
            std::vector<double> half(n / 2);
            for (double& x : half) x = uniform(0.02, 1.0);
            std::sort(half.begin(), half.end());
            half.erase(std::unique(half.begin(), half.end()), half.end());
            if (half.size() != n / 2) continue;
            std::vector<double> t(n, 0.0);
            for (std::size_t i = 0; i < n / 2; ++i) {
                t[n - 1 - i] = half[n / 2 - 1 - i];
                t[i] = -half[n / 2 - 1 - i];
            }
            // Log likelihood-ratio scores, also antisymmetric and increasing.
            std::vector<double> mag(n / 2);
            for (double& x : mag) x = uniform(0.05, 1.5);
            std::sort(mag.begin(), mag.end(), std::greater<>());
            std::vector<double> score(n, 0.0);
            for (std::size_t i = 0; i < n / 2; ++i) {
                score[i] = -mag[i];
                score[n - 1 - i] = mag[i];
            }
            std::vector<double> weight(n);
            for (std::size_t i = 0; i < (n + 1) / 2; ++i) weight[i] = weight[n - 1 - i] = uniform(0.1, 1.0);

            EnvironmentSpec s;
            s.prior_high = 0.5;
            s.support.resize(n);
            s.pmf_low.resize(n);
            s.pmf_high.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                s.support[i] = 1.0 + t[i];
                s.pmf_low[i] = weight[i] * std::exp(-score[i]);
            }
            const double total = sum(s.pmf_low);
            for (double& x : s.pmf_low) x /= total;
            for (std::size_t i = 0; i < n; ++i) s.pmf_high[i] = s.pmf_low[n - 1 - i];
            // Center cell of odd supports sits exactly at 1.
            if (dot(s.pmf_low, s.support) < 1.0 - 1e-9) {
                try {
                    return validate_environment(s);
                } catch (const std::invalid_argument&) {
                    continue;
                }
            }
        }
        throw std::runtime_error("symmetric sampler failed to meet the mean condition");
    }

    /// Power cost with random coefficient and an exponent in [1.5, 3].
    CostSpec cost()
    {
        const double k = uniform(0.01, 0.5);
        return uniform() < 0.5 ? CostSpec::quadratic(k) : CostSpec::power(k, uniform(1.5, 3.0));
    }

private:
    std::vector<double> sorted_support(std::size_t n, double lo, double hi)
    {
        while (true) {
            std::vector<double> v(n);
            for (double& x : v) x = uniform(lo, hi);
            std::sort(v.begin(), v.end());
            if (std::adjacent_find(v.begin(), v.end()) == v.end()) return v;
        }
    }

    std::vector<double> simplex_point(std::size_t n)
    {
        std::vector<double> f(n);
        for (double& x : f) x = -std::log(uniform(1e-12, 1.0));
        const double total = sum(f);
        for (double& x : f) x /= total;
        // Renormalize once more so the sum is within rounding of 1.
        const double again = sum(f);
        for (double& x : f) x /= again;
        return f;
    }

    std::mt19937_64 rng_;
};

} // namespace screening
