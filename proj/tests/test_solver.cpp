#include <gtest/gtest.h>

#include <cmath>

#include "screening/random_env.hpp"
#include "screening/solver.hpp"
#include "support.hpp"

using namespace screening;
using testing_support::five_point_non_mlrp;
using testing_support::three_point;
using testing_support::vertex_enumeration;

namespace {

const CostSpec kFifteenth = CostSpec::quadratic(1.0 / 15.0);

// Net payoff of the best threshold contract on the three-point preset with
// quadratic cost k, from the closed form of W(g) = 1 + 0.4x - 2kx - 2kx^2.
double threshold_curve(double k)
{
    if (k <= 0.1) return 1.2 - 1.5 * k;
    if (k <= 0.2) return 0.8 + 0.5 * k + 0.02 / k;
    return 1.0;
}

// Same for the best linear share, whose net is (1 - alpha) V.
double linear_curve(double k)
{
    if (k <= 2.0 / 35) return 1.2 - 3 * k;
    if (k <= 2.0 / 25) return 0.5 + 0.02 / k + 3.125 * k;
    return 1.0;
}

std::vector<std::pair<Report, double>> positive_cells(const Contract& c, const Environment& env)
{
    std::vector<std::pair<Report, double>> out;
    for (Report r : {Report::low, Report::high})
        for (std::size_t i = 0; i < env.size(); ++i)
            if (c.at(r, i) > 0.0) out.emplace_back(r, env.support()[i]);
    return out;
}

/// Payment LP in its direct form solved by vertex enumeration.
double reference_min_payment(const Environment& env, const CostSpec& cost, double g)
{
    const auto cc = screening::detail::cell_coefficients(env, g);
    const std::size_t m = cc.truthful.size();
    std::vector<double> icl(m), ich(m);
    for (std::size_t j = 0; j < m; ++j) {
        icl[j] = -(cc.truthful[j] - cc.shirk_low[j]);
        ich[j] = -(cc.truthful[j] - cc.shirk_high[j]);
    }
    const auto ref = vertex_enumeration(cc.truthful, {cc.slope}, {cost.derivative(g)}, {icl, ich}, {-cost(g), -cost(g)});
    if (!ref) throw std::runtime_error("reference LP infeasible");
    return ref->value;
}

} // namespace

TEST(ImplementationProblem, Bounds)
{
    EXPECT_THROW(ImplementationProblem::at(kFifteenth, 0.5), std::domain_error);
    EXPECT_THROW(ImplementationProblem::at(kFifteenth, 1.01), std::domain_error);
    const auto ip = ImplementationProblem::at(kFifteenth, 0.75);
    EXPECT_NEAR(ip.required_slope, 1.0 / 30, 1e-16);
    EXPECT_GE((ip.target_accuracy - 0.5) * ip.required_slope, ip.effort_cost);
}

TEST(MinPayment, FullAccuracyOnThreePointPreset)
{
    const auto env = three_point();
    const auto s = min_payment_general(env, kFifteenth, 1.0);
    EXPECT_NEAR(s.payment, 0.1, 1e-12);
    EXPECT_NEAR(s.net_payoff, 1.1, 1e-12);
    EXPECT_EQ(s.diagnostics.positive_cells, 2u);
}

TEST(MinPayment, SymmetricFastPathExamples)
{
    const auto env = three_point();
    const auto full = min_payment_symmetric(env, kFifteenth, 1.0);
    EXPECT_NEAR(full.diagnostics.parameter, 1.0 / 6, 1e-15);
    const auto cls = classify(full.contract, env);
    ASSERT_TRUE(cls.threshold_form);
    EXPECT_EQ(cls.threshold_form->low_threshold, 0.0);
    EXPECT_EQ(cls.threshold_form->high_threshold, 2.0);
    EXPECT_NEAR(full.payment, 0.1, 1e-15);

    const auto mid = min_payment_symmetric(env, kFifteenth, 0.75);
    EXPECT_NEAR(mid.diagnostics.parameter, 1.0 / 12, 1e-15);
    EXPECT_EQ(mid.diagnostics.positive_cells, 2u);

    EXPECT_THROW(min_payment_symmetric(five_point_non_mlrp(), kFifteenth, 0.75), std::invalid_argument);
    const auto skew = validate_environment({0.6, {0.0, 1.0, 2.0}, {0.6, 0.2, 0.2}, {0.2, 0.2, 0.6}});
    EXPECT_THROW(min_payment_symmetric(skew, kFifteenth, 0.75), std::invalid_argument);
}

TEST(MinPayment, FivePointPresetSupport)
{
    const auto env = five_point_non_mlrp();
    const std::vector<std::pair<Report, double>> expected{{Report::low, 0.5}, {Report::high, 1.5}};
    for (double g : {0.55, 0.6, 0.75, 0.9, 0.99}) {
        const auto s = min_payment_general(env, kFifteenth, g);
        EXPECT_EQ(positive_cells(s.contract, env), expected) << "gamma " << g;
        // Closed form on this preset: T = c'(g) (g + 1/2).
        EXPECT_NEAR(s.payment, kFifteenth.derivative(g) * (g + 0.5), 1e-12) << "gamma " << g;
        const auto cls = classify(s.contract, env);
        EXPECT_TRUE(cls.is_three_tier);
        EXPECT_FALSE(cls.threshold_form);
    }
}

TEST(MinPayment, VanishesNearHalf)
{
    const auto env = three_point();
    double prev = 1.0;
    for (double x : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const auto s = min_payment_general(env, kFifteenth, 0.5 + x);
        EXPECT_LT(s.payment, prev);
        prev = s.payment;
    }
    EXPECT_LT(prev, 1e-8);
}

TEST(OptimizeAccuracy, TableRowThreshold)
{
    const auto env = three_point();
    const auto s = optimize_accuracy(env, kFifteenth, Implementor::symmetric);
    EXPECT_EQ(s.family, Family::threshold);
    EXPECT_DOUBLE_EQ(s.induced_accuracy, 1.0);
    EXPECT_NEAR(s.diagnostics.parameter, 1.0 / 6, 1e-12);
    EXPECT_NEAR(s.gross_value, 1.2, 1e-12);
    EXPECT_NEAR(s.payment, 0.1, 1e-12);
    EXPECT_NEAR(s.net_payoff, 1.1, 1e-12);
    const auto g = optimize_accuracy(env, kFifteenth, Implementor::general);
    EXPECT_NEAR(g.net_payoff, 1.1, 1e-12);
}

TEST(OptimizeAccuracy, InteriorAndFlatSegments)
{
    const auto env = three_point();
    const auto mid = optimize_accuracy(env, CostSpec::quadratic(0.15), Implementor::symmetric);
    EXPECT_NEAR(mid.net_payoff, 0.8 + 0.5 * 0.15 + 0.02 / 0.15, 1e-9);
    EXPECT_GT(mid.induced_accuracy, 0.5);
    EXPECT_LT(mid.induced_accuracy, 1.0);
    const auto flat = optimize_accuracy(env, CostSpec::quadratic(0.25), Implementor::symmetric);
    EXPECT_EQ(flat.family, Family::zero);
    EXPECT_EQ(flat.net_payoff, 1.0);
    EXPECT_EQ(flat.payment, 0.0);
}

TEST(OptimizeAccuracy, ThresholdCurve)
{
    const auto env = three_point();
    for (int i = 1; i <= 24; ++i) {
        const double k = 0.01 * i;
        for (auto impl : {Implementor::symmetric, Implementor::general}) {
            const auto s = optimize_accuracy(env, CostSpec::quadratic(k), impl);
            EXPECT_NEAR(s.net_payoff, threshold_curve(k), 1e-6) << "k " << k;
            EXPECT_NEAR(s.net_payoff, s.gross_value - s.payment, 1e-10);
        }
    }
}

TEST(OptimizeAccuracy, FivePointInteriorOptima)
{
    // W = 1 + (1/8 - 2k) x - 2k x^2, maximized at x = (1/8 - 2k) / (4k).
    const auto env = five_point_non_mlrp();
    const std::vector<std::pair<Report, double>> expected{{Report::low, 0.5}, {Report::high, 1.5}};
    for (double denom : {18.0, 20.0, 22.0, 24.0, 28.0}) {
        const double k = 1.0 / denom;
        const auto s = optimize_accuracy(env, CostSpec::quadratic(k), Implementor::general);
        const double x = (0.125 - 2 * k) / (4 * k);
        EXPECT_EQ(s.family, Family::general);
        EXPECT_NEAR(s.induced_accuracy, 0.5 + x, 1e-6) << "k 1/" << denom;
        EXPECT_NEAR(s.net_payoff, 1 + (0.125 - 2 * k) * x - 2 * k * x * x, 1e-10);
        EXPECT_EQ(positive_cells(s.contract, env), expected);
    }
    // Above k = 1/16 screening never pays on this preset.
    const auto z = optimize_accuracy(env, kFifteenth, Implementor::general);
    EXPECT_EQ(z.family, Family::zero);
    EXPECT_EQ(z.net_payoff, 1.0);
}

TEST(Linear, TableRow)
{
    const auto env = three_point();
    const auto s = optimal_linear(env, kFifteenth);
    EXPECT_EQ(s.family, Family::linear);
    EXPECT_NEAR(s.diagnostics.parameter, 1.0 / 12, 1e-6);
    EXPECT_NEAR(s.induced_accuracy, 0.75, 1e-6);
    EXPECT_NEAR(s.gross_value, 1.1, 1e-6);
    EXPECT_NEAR(s.payment, 0.0916667, 1e-6);
    EXPECT_NEAR(s.net_payoff, 1.0083333, 1e-6);
}

TEST(Linear, CurveAndEndpoints)
{
    const auto env = three_point();
    EXPECT_NEAR(optimal_linear(env, CostSpec::quadratic(0.04)).net_payoff, 1.08, 1e-6);
    const auto flat = optimal_linear(env, CostSpec::quadratic(0.1));
    EXPECT_EQ(flat.family, Family::zero);
    EXPECT_EQ(flat.diagnostics.parameter, 0.0);
    EXPECT_EQ(flat.net_payoff, 1.0);
    for (int i = 1; i <= 24; ++i) {
        const double k = 0.01 * i;
        EXPECT_NEAR(optimal_linear(env, CostSpec::quadratic(k)).net_payoff, linear_curve(k), 1e-6) << "k " << k;
    }
}

TEST(Linear, ContractShape)
{
    const auto env = three_point();
    const auto r = linear_share_contract(env, 0.1);
    EXPECT_EQ(r, Contract({0.1, 0.1, 0.1}, {0.0, 0.1, 0.2}));
    EXPECT_THROW(linear_share_contract(env, 1.0), std::invalid_argument);
    EXPECT_THROW(linear_share_contract(env, -0.1), std::invalid_argument);
    const auto o = evaluate_linear(env, kFifteenth, 1.0 / 12);
    EXPECT_TRUE(o.informative);
    EXPECT_NEAR(o.net, 1.1 * 11.0 / 12, 1e-12);
}

TEST(GapRatio, Examples)
{
    const auto env = three_point();
    EXPECT_NEAR(gap_ratio(env, kFifteenth), 1.1 / (1.1 * 11.0 / 12), 1e-6);
    EXPECT_DOUBLE_EQ(gap_ratio(env, CostSpec::quadratic(0.25)), 1.0);
}

TEST(Lift, PaymentEqualityAndNetBound)
{
    const auto env = three_point();
    const auto base = optimize_accuracy(env, kFifteenth, Implementor::symmetric);
    for (double eps : {0.1, 0.01}) {
        const auto lifted = partial_obs_lift(base.contract, eps);
        for (int i = 0; i <= 10; ++i) {
            const double g = 0.5 + 0.05 * i;
            EXPECT_NEAR(lifted_expected_payment(lifted, env, g), expected_payment(base.contract, env, g), 1e-10);
        }
        const auto o = lifted_net_payoff(lifted, env, kFifteenth);
        EXPECT_DOUBLE_EQ(o.response.accuracy, 1.0);
        EXPECT_GE(o.net, 1.1 - eps - 1e-9);
        EXPECT_NEAR(o.net, 1.1 - 0.2 * eps, 1e-12);
    }
}

TEST(BindingCase, LinearCostMatchesReducedProgram)
{
    EnvironmentSampler s(41);
    for (int t = 0; t < 200; ++t) {
        const auto env = s.general(2, 6);
        const auto cost = CostSpec::power(s.uniform(0.01, 0.5), 1.0);
        const double g = s.uniform(0.55, 1.0);
        const double d = cost.derivative(g);
        ASSERT_NEAR((g - 0.5) * d, cost(g), 1e-15);
        const auto bind = solve_binding_program(env, d);
        EXPECT_NEAR((1 - env.prior_high()) * bind.gap_low, d / 2, 1e-10);
        EXPECT_NEAR(env.prior_high() * bind.gap_high, d / 2, 1e-10);
        const auto gen = min_payment_general(env, cost, g);
        EXPECT_NEAR(gen.payment, bind.shirk_payment + (g - 0.5) * d, 1e-10);
    }
}

// ---------------------------------------------------------------------------
// Properties over seeded random environments

TEST(SolverProperties, SparsityImplementabilityAndIncentives)
{
    EnvironmentSampler s(42);
    for (int t = 0; t < 500; ++t) {
        const auto env = s.general(2, 6);
        const auto cost = s.cost();
        const double g = s.uniform(0.501, 1.0);
        const auto sol = min_payment_general(env, cost, g);
        ASSERT_LE(sol.diagnostics.positive_cells, 2u) << "trial " << t;
        const auto br = best_response(sol.contract, env, cost);
        EXPECT_NEAR(br.accuracy, g, 1e-6) << "trial " << t;
        EXPECT_EQ(br.strategy, Strategy::truthful) << "trial " << t;
        const auto sh = shirk_values(sol.contract, env);
        EXPECT_GE(truthful_payment_line(sol.contract, env, g) - cost(g), sh.best() - 1e-9);
        EXPECT_NEAR(effort_slope(sol.contract, env), cost.derivative(g), 1e-10);
        EXPECT_NEAR(sol.net_payoff, sol.gross_value - sol.payment, 1e-10);
    }
}

TEST(SolverProperties, MatchesVertexEnumeration)
{
    EnvironmentSampler s(43);
    for (int t = 0; t < 200; ++t) {
        const auto env = s.general(2, 4);
        const auto cost = s.cost();
        const double g = s.uniform(0.501, 1.0);
        EXPECT_NEAR(min_payment_general(env, cost, g).payment, reference_min_payment(env, cost, g), 1e-9)
            << "trial " << t;
    }
}

TEST(SolverProperties, SymmetricFastPathEquivalence)
{
    EnvironmentSampler s(44);
    for (int t = 0; t < 200; ++t) {
        const auto env = s.symmetric_mlrp(2, 6);
        const auto cost = s.cost();
        const double g = s.uniform(0.501, 1.0);
        const auto sym = min_payment_symmetric(env, cost, g);
        const auto gen = min_payment_general(env, cost, g);
        EXPECT_NEAR(sym.payment, gen.payment, 1e-8) << "trial " << t;
        EXPECT_TRUE(classify(sym.contract, env).threshold_form) << "trial " << t;
    }
}

TEST(SolverProperties, MoreAccuracyNeverCheaper)
{
    EnvironmentSampler s(45);
    for (int t = 0; t < 100; ++t) {
        const auto env = s.general(2, 6);
        const auto cost = s.cost();
        double prev = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double g = 0.5 + 0.01 * i;
            const double pay = min_payment_general(env, cost, g).payment;
            ASSERT_GE(pay, prev - 1e-12) << "trial " << t << " gamma " << g;
            prev = pay;
        }
    }
}

TEST(SolverProperties, GapRatioBounds)
{
    EnvironmentSampler s(46);
    for (int t = 0; t < 100; ++t) {
        const auto env = s.general(2, 6);
        const auto cost = s.cost();
        const double r = gap_ratio(env, cost, AccuracySearch{201});
        EXPECT_GE(r, 1.0) << "trial " << t;
        EXPECT_LE(r, 2.0 + 1e-9) << "trial " << t;
    }
}
