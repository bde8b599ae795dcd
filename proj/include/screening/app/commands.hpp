#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "screening/app/config.hpp"
#include "screening/app/csv.hpp"
#include "screening/contract.hpp"
#include "screening/oracle.hpp"
#include "screening/random_env.hpp"
#include "screening/solver.hpp"

namespace screening::app {

enum ExitCode : int { ok = 0, config_error = 2, verification_failure = 3, numerical_failure = 4 };

/// Runs fn(i) for i in [0, count) on a fixed pool.  Results land by index,
/// so output order never depends on scheduling.  The first exception thrown
/// (lowest index) is rethrown after all workers join.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn, std::size_t threads = 0)
{
    std::vector<T> out(count);
    std::vector<std::exception_ptr> errors(count);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(count, 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < count; i += threads) {
                    try {
                        out[i] = fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// solve

struct SolveRow {
    Family requested;
    SolveResult result;
};

inline SolveResult solve_family(const Environment& env, const CostSpec& cost, Family family,
                                std::optional<double> target, std::size_t grid)
{
    const AccuracySearch search{grid};
    switch (family) {
    case Family::general:
        return target ? min_payment_general(env, cost, *target) : optimize_accuracy(env, cost, Implementor::general, search);
    case Family::threshold:
        if (!is_symmetric(env) || !satisfies_mlrp(env))
            throw ConfigError("family 'threshold' needs a symmetric environment satisfying MLRP");
        return target ? min_payment_symmetric(env, cost, *target)
                      : optimize_accuracy(env, cost, Implementor::symmetric, search);
    case Family::linear:
        if (target) throw ConfigError("target_accuracy applies to the general and threshold families only");
        return optimal_linear(env, cost);
    case Family::zero: break;
    }
    throw ConfigError("family 'zero' cannot be requested");
}

inline std::vector<SolveRow> cmd_solve(const ExperimentConfig& cfg)
{
    const Environment env = cfg.validated_environment();
    std::vector<SolveRow> rows;
    for (Family f : cfg.families) rows.push_back({f, solve_family(env, cfg.cost, f, cfg.target_accuracy, cfg.grid)});
    return rows;
}

inline const std::vector<std::string>& solve_header()
{
    static const std::vector<std::string> h{"family", "alpha_or_bonus", "gamma_star", "V", "T", "net"};
    return h;
}

inline std::vector<std::string> solve_cells(const SolveRow& row)
{
    const auto& r = row.result;
    return {std::string(to_string(row.requested)), format_number(r.diagnostics.parameter),
            format_number(r.induced_accuracy), format_number(r.gross_value), format_number(r.payment),
            format_number(r.net_payoff)};
}

inline void write_solve_csv(std::ostream& out, const std::vector<SolveRow>& rows)
{
    CsvWriter w(out, solve_header());
    for (const auto& r : rows) w.row(solve_cells(r));
}

inline std::string describe_cells(const Contract& c, const Environment& env)
{
    std::ostringstream os;
    bool any = false;
    for (Report rep : {Report::low, Report::high})
        for (std::size_t i = 0; i < env.size(); ++i) {
            const double x = c.at(rep, i);
            if (x <= 0.0) continue;
            os << (any ? " " : "") << '(' << (rep == Report::low ? "sigma_l" : "sigma_h") << ','
               << format_number(env.support()[i]) << ")=" << format_number(x);
            any = true;
        }
    return any ? os.str() : "none";
}

inline void print_solve_table(std::ostream& out, const std::vector<SolveRow>& rows, const Environment& env)
{
    out << std::left << std::setw(10) << "family" << std::setw(8) << "result" << std::right << std::setw(16)
        << "alpha_or_bonus" << std::setw(11) << "gamma*" << std::setw(11) << "V" << std::setw(11) << "T"
        << std::setw(11) << "net" << '\n';
    out << std::fixed << std::setprecision(6);
    for (const auto& row : rows) {
        const auto& r = row.result;
        out << std::left << std::setw(10) << to_string(row.requested) << std::setw(8) << to_string(r.family)
            << std::right << std::setw(16) << r.diagnostics.parameter << std::setw(11) << r.induced_accuracy
            << std::setw(11) << r.gross_value << std::setw(11) << r.payment << std::setw(11) << r.net_payoff
            << '\n';
        out << "  cells: " << describe_cells(r.contract, env) << '\n';
    }
    out << std::defaultfloat;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
    double k;
    SolveRow row;
};

inline ExperimentConfig with_coefficient(ExperimentConfig cfg, double k)
{
    cfg.cost = cfg.cost.family() == CostFamily::quadratic ? CostSpec::quadratic(k)
                                                          : CostSpec::power(k, cfg.cost.exponent());
    return cfg;
}

inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg, std::size_t threads = 0)
{
    const Environment env = cfg.validated_environment();
    const auto ks = cfg.sweep.values();
    const std::size_t nf = cfg.families.size();
    for (Family f : cfg.families)
        if (f == Family::threshold && (!is_symmetric(env) || !satisfies_mlrp(env)))
            throw ConfigError("family 'threshold' needs a symmetric environment satisfying MLRP");
    std::function<SweepRow(std::size_t)> job = [&](std::size_t i) {
        const double k = ks[i / nf];
        const Family f = cfg.families[i % nf];
        const auto c = with_coefficient(cfg, k);
        return SweepRow{k, {f, solve_family(env, c.cost, f, cfg.target_accuracy, cfg.grid)}};
    };
    return parallel_map<SweepRow>(ks.size() * nf, job, threads);
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    CsvWriter w(out, {"k", "family", "result", "alpha_or_bonus", "gamma_star", "V", "T", "net"});
    for (const auto& s : rows) {
        const auto& r = s.row.result;
        w.row({format_number(s.k), std::string(to_string(s.row.requested)), std::string(to_string(r.family)),
               format_number(r.diagnostics.parameter), format_number(r.induced_accuracy),
               format_number(r.gross_value), format_number(r.payment), format_number(r.net_payoff)});
    }
}

inline void print_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << std::setw(8) << "k" << "  " << std::left << std::setw(10) << "family" << std::setw(10) << "result"
        << std::right << std::setw(11) << "gamma*" << std::setw(11) << "net" << '\n';
    for (const auto& s : rows)
        out << std::fixed << std::setprecision(4) << std::setw(8) << s.k << "  " << std::left << std::setw(10)
            << to_string(s.row.requested) << std::setw(10) << to_string(s.row.result.family) << std::right
            << std::setprecision(6) << std::setw(11) << s.row.result.induced_accuracy << std::setw(11)
            << s.row.result.net_payoff << '\n';
    out << std::defaultfloat;
}

// ---------------------------------------------------------------------------
// verify

struct CheckRecord {
    std::string check;
    std::string instance;
    std::uint64_t seed = 0;
    bool passed = false;
    double observed = 0.0;
    double limit = 0.0;
    std::string detail;
};

inline CheckRecord new_record(std::string check, std::string instance, std::uint64_t seed)
{
    CheckRecord r;
    r.check = std::move(check);
    r.instance = std::move(instance);
    r.seed = seed;
    return r;
}

/// Per-instance seed, so any single failing row can be replayed alone.
inline std::uint64_t instance_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1) + (tag << 56);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace detail {

inline std::string env_summary(const Environment& env)
{
    std::ostringstream os;
    os << std::setprecision(17) << "p=" << env.prior_high() << " v=[";
    for (std::size_t i = 0; i < env.size(); ++i) os << (i ? " " : "") << env.support()[i];
    os << "] fl=[";
    for (std::size_t i = 0; i < env.size(); ++i) os << (i ? " " : "") << env.pmf_low()[i];
    os << "] fh=[";
    for (std::size_t i = 0; i < env.size(); ++i) os << (i ? " " : "") << env.pmf_high()[i];
    os << ']';
    return os.str();
}

inline std::string cost_summary(const CostSpec& c)
{
    std::ostringstream os;
    os << std::setprecision(17) << "k=" << c.coefficient() << " m=" << c.exponent();
    return os.str();
}

/// Random target accuracy strictly inside (1/2, 1].
inline double random_target(EnvironmentSampler& s) { return s.uniform(0.5 + 1e-3, 1.0); }

} // namespace detail

inline CheckRecord check_sparsity(std::uint64_t seed, std::size_t index)
{
    EnvironmentSampler s(seed);
    const auto env = s.general(2, 6);
    const auto cost = s.cost();
    const double g = detail::random_target(s);
    CheckRecord rec = new_record("sparsity", "random#" + std::to_string(index), seed);
    const auto sol = min_payment_general(env, cost, g);
    const auto br = best_response(sol.contract, env, cost);
    const double miss = std::abs(br.accuracy - g);
    const bool truthful = br.strategy == Strategy::truthful;
    rec.observed = std::max(double(sol.diagnostics.positive_cells), 0.0);
    rec.limit = 2.0;
    rec.passed = sol.diagnostics.positive_cells <= 2 && miss <= 1e-6 && truthful;
    std::ostringstream os;
    os << std::setprecision(17) << "gamma*=" << g << " response=" << br.accuracy << " strategy=" << to_string(br.strategy)
       << ' ' << detail::cost_summary(cost) << ' ' << detail::env_summary(env);
    rec.detail = os.str();
    return rec;
}

inline CheckRecord check_threshold_equivalence(std::uint64_t seed, std::size_t index)
{
    EnvironmentSampler s(seed);
    const auto env = s.symmetric_mlrp(2, 6);
    const auto cost = s.cost();
    const double g = detail::random_target(s);
    CheckRecord rec = new_record("threshold_equivalence", "symmetric#" + std::to_string(index), seed);
    const auto sym = min_payment_symmetric(env, cost, g);
    const auto gen = min_payment_general(env, cost, g);
    const bool threshold = classify(sym.contract, env).threshold_form.has_value();
    rec.observed = std::abs(sym.payment - gen.payment);
    rec.limit = 1e-8;
    rec.passed = rec.observed <= rec.limit && threshold;
    std::ostringstream os;
    os << std::setprecision(17) << "gamma*=" << g << " symmetric=" << sym.payment << " general=" << gen.payment
       << " threshold_form=" << (threshold ? "yes" : "no") << ' ' << detail::cost_summary(cost) << ' '
       << detail::env_summary(env);
    rec.detail = os.str();
    return rec;
}

inline CheckRecord check_gap_ratio(std::uint64_t seed, std::size_t index, std::size_t grid)
{
    EnvironmentSampler s(seed);
    const auto env = s.general(2, 6);
    const auto cost = s.cost();
    CheckRecord rec = new_record("gap_ratio", "random#" + std::to_string(index), seed);
    rec.observed = gap_ratio(env, cost, AccuracySearch{grid});
    rec.limit = 2.0 + 1e-9;
    rec.passed = rec.observed >= 1.0 && rec.observed <= rec.limit;
    rec.detail = detail::cost_summary(cost) + ' ' + detail::env_summary(env);
    return rec;
}

/// Best contract used as the base of the lift: the threshold optimum when it
/// applies, otherwise the general optimum.
inline SolveResult lift_base(const Environment& env, const CostSpec& cost, std::size_t grid)
{
    const bool threshold = is_symmetric(env) && satisfies_mlrp(env);
    return optimize_accuracy(env, cost, threshold ? Implementor::symmetric : Implementor::general, AccuracySearch{grid});
}

inline std::vector<CheckRecord> check_lift(const Environment& env, const CostSpec& cost, double epsilon,
                                           const std::string& label, std::size_t grid)
{
    const auto base = lift_base(env, cost, grid);
    const auto lifted = partial_obs_lift(base.contract, epsilon);
    std::vector<CheckRecord> out;

    CheckRecord pay = new_record("lift_payment", label + " eps=" + format_number(epsilon), 0);
    pay.limit = 1e-10;
    for (int i = 0; i <= 10; ++i) {
        const double g = 0.5 + 0.05 * i;
        const double diff = std::abs(lifted_expected_payment(lifted, env, g) - expected_payment(base.contract, env, g));
        pay.observed = std::max(pay.observed, diff);
    }
    pay.passed = pay.observed <= pay.limit;
    pay.detail = "max |lifted - base| payment over 11 accuracies";
    out.push_back(pay);

    const auto o = lifted_net_payoff(lifted, env, cost);
    CheckRecord net = new_record("lift_net", label + " eps=" + format_number(epsilon), 0);
    net.observed = o.net;
    net.limit = base.net_payoff - epsilon - 1e-9;
    net.passed = net.observed >= net.limit;
    std::ostringstream os;
    os << std::setprecision(17) << "base net=" << base.net_payoff << " lifted gamma=" << o.response.accuracy;
    net.detail = os.str();
    out.push_back(net);
    return out;
}

inline std::vector<CheckRecord> check_oracle(const Environment& env, const CostSpec& cost, const oracle::GridSpec& spec,
                                             const std::string& label, std::size_t grid)
{
    const auto solver = optimize_accuracy(env, cost, Implementor::general, AccuracySearch{grid});
    const auto orc = oracle::grid_optimal_contract(env, cost, spec);
    std::vector<CheckRecord> out;
    CheckRecord agree = new_record("oracle_agreement", label, 0);
    agree.observed = std::abs(solver.net_payoff - orc.best.net_payoff);
    agree.limit = orc.tolerance;
    agree.passed = agree.observed <= agree.limit;
    std::ostringstream os;
    os << std::setprecision(17) << "solver net=" << solver.net_payoff << " oracle net=" << orc.best.net_payoff
       << " oracle gamma=" << orc.best.induced_accuracy << " candidates=" << orc.candidates
       << " tolerance=" << orc.tolerance;
    agree.detail = os.str();
    out.push_back(agree);

    // The grid agent can round its accuracy in the principal's favour, so the
    // bound is taken on the oracle's contract under the exact response.
    CheckRecord bound = new_record("oracle_not_above_solver", label, 0);
    const double rescored = contract_net_payoff(orc.best.contract, env, cost);
    bound.observed = rescored - solver.net_payoff;
    bound.limit = 1e-9;
    bound.passed = bound.observed <= bound.limit;
    std::ostringstream bs;
    bs << std::setprecision(17) << "oracle contract under exact response net=" << rescored << " minus solver net";
    bound.detail = bs.str();
    out.push_back(bound);
    return out;
}

/// Structural report on the configured environment; always passes.
inline CheckRecord report_structure(const Environment& env, const CostSpec& cost, const std::string& label,
                                    std::size_t grid)
{
    const auto sol = optimize_accuracy(env, cost, Implementor::general, AccuracySearch{grid});
    const auto cls = classify(sol.contract, env);
    CheckRecord rec = new_record("structure", label, 0);
    rec.passed = true;
    rec.observed = double(cls.positive_cells);
    std::ostringstream os;
    os << "mlrp=" << (satisfies_mlrp(env) ? "true" : "false") << " symmetric=" << (is_symmetric(env) ? "true" : "false")
       << " optimum=" << to_string(sol.family) << " threshold_form=" << (cls.threshold_form ? "present" : "absent")
       << " cells=" << describe_cells(sol.contract, env);
    rec.detail = os.str();
    return rec;
}

struct VerifyReport {
    std::vector<CheckRecord> records;
    [[nodiscard]] bool all_passed() const
    {
        return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.passed; });
    }
};

inline VerifyReport cmd_verify(const ExperimentConfig& cfg, std::size_t threads = 0)
{
    const Environment env = cfg.validated_environment();
    const auto& v = cfg.verify;
    const std::string label = cfg.preset.empty() ? "config" : cfg.preset;
    VerifyReport rep;
    auto append = [&rep](std::vector<CheckRecord> recs) {
        rep.records.insert(rep.records.end(), recs.begin(), recs.end());
    };

    rep.records.push_back(report_structure(env, cfg.cost, label, cfg.grid));
    append(parallel_map<CheckRecord>(
        v.sparsity_count, [&](std::size_t i) { return check_sparsity(instance_seed(v.seed, 1, i), i); }, threads));
    append(parallel_map<CheckRecord>(
        v.symmetric_count,
        [&](std::size_t i) { return check_threshold_equivalence(instance_seed(v.seed, 2, i), i); }, threads));
    append(parallel_map<CheckRecord>(
        v.gap_count, [&](std::size_t i) { return check_gap_ratio(instance_seed(v.seed, 3, i), i, cfg.grid); },
        threads));
    for (double eps : v.epsilons) append(check_lift(env, cfg.cost, eps, label, cfg.grid));
    append(check_oracle(env, cfg.cost, v.oracle, label, cfg.grid));
    return rep;
}

inline void write_verify_csv(std::ostream& out, const VerifyReport& rep)
{
    CsvWriter w(out, {"check", "instance", "seed", "passed", "observed", "limit"});
    for (const auto& r : rep.records)
        w.row({r.check, r.instance, std::to_string(r.seed), r.passed ? "1" : "0", format_number(r.observed),
               format_number(r.limit)});
}

/// One summary line per check, plus the inputs of every failing instance.
inline void print_verify_summary(std::ostream& out, const VerifyReport& rep)
{
    std::vector<std::string> order;
    for (const auto& r : rep.records)
        if (std::find(order.begin(), order.end(), r.check) == order.end()) order.push_back(r.check);
    for (const auto& name : order) {
        std::size_t total = 0, failed = 0;
        std::string info;
        for (const auto& r : rep.records) {
            if (r.check != name) continue;
            ++total;
            failed += !r.passed;
            if (total == 1) info = r.detail;
        }
        out << (failed ? "FAIL " : "PASS ") << name << ": " << (total - failed) << '/' << total;
        if (total == 1) out << "  " << info;
        out << '\n';
        for (const auto& r : rep.records)
            if (r.check == name && !r.passed)
                out << "  failed " << r.instance << " seed=" << r.seed << " observed=" << format_number(r.observed)
                    << " limit=" << format_number(r.limit) << "  " << r.detail << '\n';
    }
}

} // namespace screening::app
