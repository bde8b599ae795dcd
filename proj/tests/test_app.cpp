#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <sstream>

#include "screening/app/commands.hpp"
#include "screening/random_env.hpp"

using namespace screening;
using namespace screening::app;

namespace {

std::string error_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::vector<std::vector<std::string>> read_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) rows.push_back(split_csv_line(line));
    return rows;
}

} // namespace

TEST(Config, PresetWithFractionCost)
{
    const auto c = parse_config(R"({"schema_version": 1, "environment": {"preset": "paper-sec4"},
        "cost": {"family": "quadratic", "coefficient": "1/15"}, "families": ["linear", "threshold"]})");
    EXPECT_EQ(c.preset, "paper-sec4");
    EXPECT_DOUBLE_EQ(c.cost.coefficient(), 1.0 / 15);
    EXPECT_EQ(c.families, (std::vector<Family>{Family::linear, Family::threshold}));
    EXPECT_NEAR(c.validated_environment().mean_low(), 0.6, 1e-15);
}

TEST(Config, InlineEnvironmentAndSections)
{
    const auto c = parse_config(R"({
        "schema_version": 1,
        "environment": {"prior_high": 0.5, "support": [0, "1/2", 1, "3/2", 2],
                        "pmf_low": ["1/8", "3/8", "1/4", "1/8", "1/8"],
                        "pmf_high": ["1/8", "1/8", "1/4", "3/8", "1/8"]},
        "cost": {"family": "power", "coefficient": 0.1, "exponent": 3},
        "target_accuracy": 0.75,
        "grid": 201,
        "sweep": {"k_min": 0.02, "k_max": 0.1, "k_step": 0.02},
        "verify": {"seed": 5, "gap_count": 10, "sparsity_count": 3, "symmetric_count": 4,
                   "epsilons": [0.5], "oracle": {"accuracy_step": 0.01, "payment_step": 0.05, "max_support": 1}}
    })");
    EXPECT_FALSE(satisfies_mlrp(c.validated_environment()));
    EXPECT_EQ(c.cost.exponent(), 3.0);
    EXPECT_EQ(*c.target_accuracy, 0.75);
    EXPECT_EQ(c.grid, 201u);
    EXPECT_EQ(c.sweep.values().size(), 5u);
    EXPECT_EQ(c.verify.seed, 5u);
    EXPECT_EQ(c.verify.oracle.max_support, 1u);
    EXPECT_EQ(c.verify.oracle.payment_levels.size(), 21u);
}

TEST(Config, ErrorsNameTheField)
{
    EXPECT_NE(error_of(R"({"schema_version": 1, "environment": {"preset": "paper-sec4"}, "colour": 1})")
                  .find("unknown key 'colour'"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 2, "environment": {"preset": "paper-sec4"}})").find("schema_version"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "environment": {"preset": "nope"}})").find("unknown preset"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "environment": {"preset": "paper-sec4"},
                           "cost": {"coefficient": "1/x"}})")
                  .find("$.cost.coefficient"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "environment": {"prior_high": 0.5, "support": [0, 2],
                           "pmf_low": [0.5, 0.5], "pmf_high": [0.5, 0.5]}})")
                  .find("mean condition"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "environment": {"preset": "paper-sec4"}, "families": ["cubic"]})")
                  .find("$.families[0]"),
              std::string::npos);
    EXPECT_NE(error_of("{\"schema_version\": 1,\n \"environment\": }").find("line 2"), std::string::npos);
    EXPECT_NE(error_of(R"({"environment": {"preset": "paper-sec4"}})").find("schema_version"), std::string::npos);
}

TEST(Config, SweepRangeValidation)
{
    SweepRange r{0.1, 0.05, 0.01};
    EXPECT_THROW(r.values(), ConfigError);
    SweepRange z{0.1, 0.2, 0.0};
    EXPECT_THROW(z.values(), ConfigError);
    SweepRange one{1.0 / 15, 1.0 / 15, 0.01};
    EXPECT_EQ(one.values(), std::vector<double>{1.0 / 15});
    SweepRange fig{0.01, 0.24, 0.01};
    EXPECT_EQ(fig.values().size(), 24u);
}

TEST(Csv, NumbersRoundTripExactly)
{
    EnvironmentSampler s(61);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::ldexp(s.uniform(-1.0, 1.0), static_cast<int>(s.index(0, 80)) - 40);
        ASSERT_EQ(parse_number(format_number(x)), x);
    }
    for (double x : {0.0, 1.0 / 3, 1.1, 1e-300, std::numeric_limits<double>::max()})
        EXPECT_EQ(parse_number(format_number(x)), x);
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_THROW(parse_number("1.0x"), std::invalid_argument);
}

TEST(Solve, TableRows)
{
    auto cfg = preset_config("paper-sec4");
    const auto rows = cmd_solve(cfg);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].requested, Family::linear);
    EXPECT_NEAR(rows[0].result.diagnostics.parameter, 1.0 / 12, 1e-6);
    EXPECT_NEAR(rows[0].result.induced_accuracy, 0.75, 1e-6);
    EXPECT_NEAR(rows[0].result.net_payoff, 1.0083333, 1e-6);
    EXPECT_EQ(rows[1].requested, Family::threshold);
    EXPECT_NEAR(rows[1].result.diagnostics.parameter, 1.0 / 6, 1e-12);
    EXPECT_NEAR(rows[1].result.net_payoff, 1.1, 1e-12);

    std::ostringstream csv;
    write_solve_csv(csv, rows);
    const auto parsed = read_csv(csv.str());
    ASSERT_EQ(parsed.size(), 3u);
    EXPECT_EQ(parsed[0], solve_header());
    EXPECT_EQ(parsed[2][0], "threshold");
    EXPECT_EQ(parse_number(parsed[2][5]), rows[1].result.net_payoff);
    EXPECT_EQ(parse_number(parsed[1][1]), rows[0].result.diagnostics.parameter);
}

TEST(Solve, FlatSegmentAndTargets)
{
    auto cfg = with_coefficient(preset_config("paper-sec4"), 0.25);
    for (const auto& row : cmd_solve(cfg)) {
        EXPECT_EQ(row.result.family, Family::zero);
        EXPECT_EQ(row.result.net_payoff, 1.0);
    }

    auto b2 = preset_config("paper-b2");
    b2.families = {Family::general};
    b2.target_accuracy = 0.75;
    const auto rows = cmd_solve(b2);
    const auto env = b2.validated_environment();
    EXPECT_EQ(describe_cells(rows[0].result.contract, env).substr(0, 13), "(sigma_l,0.5)");
    EXPECT_NE(describe_cells(rows[0].result.contract, env).find("(sigma_h,1.5)"), std::string::npos);

    b2.families = {Family::threshold};
    EXPECT_THROW(cmd_solve(b2), ConfigError);
    b2.families = {Family::linear};
    EXPECT_THROW(cmd_solve(b2), ConfigError);
}

TEST(Sweep, DeterministicAcrossThreadCounts)
{
    auto cfg = preset_config("paper-sec4");
    cfg.sweep = {0.02, 0.24, 0.02};
    const auto one = cmd_sweep(cfg, 1);
    const auto many = cmd_sweep(cfg, 4);
    std::ostringstream a, b;
    write_sweep_csv(a, one);
    write_sweep_csv(b, many);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(one.size(), 24u);
    EXPECT_EQ(one[0].row.requested, Family::linear);
    EXPECT_EQ(one[1].row.requested, Family::threshold);
    EXPECT_NEAR(one[1].row.result.net_payoff, 1.2 - 1.5 * 0.02, 1e-6);

    const auto rows = read_csv(a.str());
    EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "family", "result", "alpha_or_bonus", "gamma_star", "V", "T", "net"}));
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_EQ(parse_number(rows[i][7]), one[i - 1].row.result.net_payoff);
}

TEST(Sweep, ThresholdNeedsSymmetricMlrp)
{
    auto cfg = preset_config("paper-b2");
    EXPECT_THROW(cmd_sweep(cfg), ConfigError);
}

TEST(Verify, SmallRunPassesAndIsReplayable)
{
    auto cfg = preset_config("paper-sec4");
    cfg.grid = 201;
    cfg.verify.gap_count = 20;
    cfg.verify.sparsity_count = 20;
    cfg.verify.symmetric_count = 20;
    cfg.verify.oracle.accuracy_step = 1e-2;
    cfg.verify.oracle.payment_levels = oracle::GridSpec::default_levels(0.5, 1.0 / 48);
    const auto a = cmd_verify(cfg, 1);
    const auto b = cmd_verify(cfg, 3);
    EXPECT_TRUE(a.all_passed());
    std::ostringstream x, y;
    write_verify_csv(x, a);
    write_verify_csv(y, b);
    EXPECT_EQ(x.str(), y.str());

    // A single instance replays from its logged seed.
    const auto& rec = a.records[5];
    ASSERT_EQ(rec.check, "sparsity");
    const auto again = check_sparsity(rec.seed, 4);
    EXPECT_EQ(again.detail, rec.detail);

    std::ostringstream summary;
    print_verify_summary(summary, a);
    EXPECT_NE(summary.str().find("PASS gap_ratio: 20/20"), std::string::npos);
}

TEST(Verify, StructureReportOnFivePointPreset)
{
    const auto cfg = preset_config("paper-b2");
    const auto rec = report_structure(cfg.validated_environment(), CostSpec::quadratic(1.0 / 24), "paper-b2", 1001);
    EXPECT_NE(rec.detail.find("mlrp=false"), std::string::npos);
    EXPECT_NE(rec.detail.find("threshold_form=absent"), std::string::npos);
    EXPECT_NE(rec.detail.find("(sigma_l,0.5)"), std::string::npos);
}

TEST(ParallelMap, PropagatesFirstError)
{
    std::function<int(std::size_t)> fn = [](std::size_t i) -> int {
        if (i == 3 || i == 7) throw std::runtime_error("boom " + std::to_string(i));
        return static_cast<int>(i);
    };
    try {
        parallel_map<int>(10, fn, 4);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "boom 3");
    }
}
