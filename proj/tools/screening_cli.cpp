// Command-line front end: solve, sweep and verify.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "screening/app/commands.hpp"

namespace {

using namespace screening;
using namespace screening::app;

struct Options {
    std::string config_path;
    std::string preset;
    std::string families;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;
    std::optional<std::string> k;
    std::optional<std::string> gamma;
    std::optional<std::size_t> count;
    std::optional<std::string> k_min, k_max, k_step;
    std::vector<std::string> epsilons;
    std::size_t threads = 0;
    bool full = false;
};

ExperimentConfig build_config(const Options& o)
{
    if (!o.config_path.empty() && !o.preset.empty()) throw ConfigError("--config and --preset are mutually exclusive");
    ExperimentConfig c = !o.config_path.empty() ? load_config(o.config_path)
                         : !o.preset.empty()    ? preset_config(o.preset)
                                                : throw ConfigError("one of --config or --preset is required");
    if (!o.families.empty()) c.families = parse_family_list(o.families, "--family");
    if (o.grid) c.grid = *o.grid;
    if (o.k) c = with_coefficient(std::move(c), parse_scalar(*o.k, "--k"));
    if (o.gamma) c.target_accuracy = parse_scalar(*o.gamma, "--gamma");
    if (o.seed) c.verify.seed = *o.seed;
    if (o.count) c.verify.gap_count = *o.count;
    if (o.k_min) c.sweep.k_min = parse_scalar(*o.k_min, "--k-min");
    if (o.k_max) c.sweep.k_max = parse_scalar(*o.k_max, "--k-max");
    if (o.k_step) c.sweep.k_step = parse_scalar(*o.k_step, "--k-step");
    if (!o.epsilons.empty()) {
        c.verify.epsilons.clear();
        for (const auto& e : o.epsilons) c.verify.epsilons.push_back(parse_scalar(e, "--epsilon"));
    }
    if (o.full) {
        // Three-cell supports; a coarser payment grid keeps the count near 1e7.
        c.verify.oracle.max_support = 3;
        c.verify.oracle.payment_levels = oracle::GridSpec::default_levels(1.0, 1.0 / 48);
        c.verify.oracle.budget = 20'000'000;
    }
    if (c.grid < 2) throw ConfigError("--grid needs at least 2 points");
    return c;
}

template <class Writer>
void emit_csv(const std::string& path, Writer&& write)
{
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    write(f);
}

void add_common(CLI::App* cmd, Options& o)
{
    cmd->add_option("--config", o.config_path, "JSON experiment config");
    cmd->add_option("--preset", o.preset, "built-in environment: paper-sec4 or paper-b2");
    cmd->add_option("--family", o.families, "comma-separated families: general, threshold, linear");
    cmd->add_option("--out", o.out, "CSV output path");
    cmd->add_option("--grid", o.grid, "accuracy grid points for the outer search");
    cmd->add_option("--k", o.k, "cost coefficient (number or a/b)");
    cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Payment contracts for a screening agent: solve, sweep, verify"};
    app.require_subcommand(1);
    Options o;

    auto* solve = app.add_subcommand("solve", "optimal contract per family");
    add_common(solve, o);
    solve->add_option("--gamma", o.gamma, "implement this accuracy instead of optimizing it");

    auto* sweep = app.add_subcommand("sweep", "net payoff as a function of the cost coefficient");
    add_common(sweep, o);
    sweep->add_option("--k-min", o.k_min);
    sweep->add_option("--k-max", o.k_max);
    sweep->add_option("--k-step", o.k_step);

    auto* verify = app.add_subcommand("verify", "property sweeps and oracle comparison");
    add_common(verify, o);
    verify->add_option("--seed", o.seed, "base seed for random environments");
    verify->add_option("--count", o.count, "random environments for the gap-ratio sweep");
    verify->add_option("--epsilon", o.epsilons, "forced-investment probabilities for the lift check");
    verify->add_flag("--full", o.full, "oracle enumerates three-cell supports (payment step 1/48)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : config_error;
    }

    try {
        const ExperimentConfig cfg = build_config(o);
        if (solve->parsed()) {
            const auto rows = cmd_solve(cfg);
            print_solve_table(std::cout, rows, cfg.validated_environment());
            emit_csv(o.out, [&](std::ostream& f) { write_solve_csv(f, rows); });
            return ok;
        }
        if (sweep->parsed()) {
            const auto rows = cmd_sweep(cfg, o.threads);
            print_sweep_table(std::cout, rows);
            emit_csv(o.out, [&](std::ostream& f) { write_sweep_csv(f, rows); });
            return ok;
        }
        const auto rep = cmd_verify(cfg, o.threads);
        print_verify_summary(std::cout, rep);
        emit_csv(o.out, [&](std::ostream& f) { write_verify_csv(f, rep); });
        return rep.all_passed() ? ok : verification_failure;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return config_error;
    }
}
