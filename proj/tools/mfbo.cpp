#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mfbo/benchmarks/dataset.hpp>
#include <mfbo/driver/config.hpp>
#include <mfbo/driver/loop.hpp>
#include <mfbo/driver/metrics.hpp>
#include <mfbo/driver/state.hpp>
#include <mfbo/errors.hpp>

namespace {

    struct CommonArgs {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::string state_path;
        std::string out_path;
        std::string data_path;
    };

    void add_common(CLI::App* cmd, CommonArgs& args, bool needs_state)
    {
        cmd->add_option("--config", args.config_path, "configuration file")->required();
        cmd->add_option("--seed", args.seed, "override the config seed");
        auto* state = cmd->add_option("--state", args.state_path, "state file");
        if (needs_state)
            state->required();
        cmd->add_option("--out", args.out_path, "output file");
    }

    mfbo::driver::RunConfig load(const CommonArgs& args)
    {
        auto cfg = mfbo::driver::load_config(args.config_path);
        if (args.seed)
            cfg.seed = *args.seed;
        return cfg;
    }

    void write_history(const std::string& path, const mfbo::driver::OptimizationState& state,
                       Eigen::Index dim)
    {
        std::ofstream os(path);
        if (!os)
            throw mfbo::IoFailureError("cannot open output file: " + path);
        mfbo::driver::write_history_csv(os, state.history, dim);
    }

    int cmd_run(const CommonArgs& args)
    {
        const auto cfg = load(args);
        if (cfg.external())
            throw mfbo::ConfigError("run works on named benchmarks; use suggest/report "
                                    "for external objectives");
        const auto fn = mfbo::benchmarks::by_name(cfg.benchmark);

        mfbo::driver::OptimizationState state;
        if (!args.state_path.empty() && std::filesystem::exists(args.state_path)) {
            state = mfbo::driver::load_state(args.state_path);
            std::cerr << "resuming from " << args.state_path << " after round "
                      << state.round << "\n";
        } else {
            state = mfbo::driver::init_state(cfg, &fn);
            if (!args.state_path.empty())
                mfbo::driver::save_state(state, args.state_path);
        }

        mfbo::driver::resume_run(state, cfg, fn,
                                 [&](const mfbo::driver::OptimizationState& s) {
                                     if (!args.state_path.empty())
                                         mfbo::driver::save_state(s, args.state_path);
                                 });
        if (!args.state_path.empty())
            mfbo::driver::save_state(state, args.state_path);
        if (!args.out_path.empty())
            write_history(args.out_path, state, cfg.domain.dim());

        std::cout << "rounds completed: " << state.round << "\n"
                  << "total cost: " << mfbo::driver::fmt_double(state.cumulative_cost)
                  << "\n";
        if (state.has_best) {
            std::cout << "best value: " << mfbo::driver::fmt_double(state.best_value)
                      << " at";
            for (Eigen::Index i = 0; i < state.best_x.size(); ++i)
                std::cout << ' ' << mfbo::driver::fmt_double(state.best_x(i));
            std::cout << "\n";
        }
        return 0;
    }

    int cmd_suggest(const CommonArgs& args)
    {
        const auto cfg = load(args);
        mfbo::driver::OptimizationState state;
        if (std::filesystem::exists(args.state_path)) {
            if (!args.data_path.empty())
                throw mfbo::ConfigError("--data is only valid when creating a new state");
            state = mfbo::driver::load_state(args.state_path);
        } else if (cfg.external()) {
            state = mfbo::driver::init_state(cfg, nullptr);
            if (!args.data_path.empty()) {
                std::ifstream is(args.data_path);
                if (!is)
                    throw mfbo::IoFailureError("cannot open data file: " + args.data_path);
                mfbo::driver::seed_observations(
                    state,
                    mfbo::driver::read_observations_csv(is,
                                                        cfg.domain.dim()),
                    cfg);
            }
        } else {
            const auto fn = mfbo::benchmarks::by_name(cfg.benchmark);
            state = mfbo::driver::init_state(cfg, &fn);
        }

        const auto batch = mfbo::driver::ask(state, cfg);
        mfbo::driver::save_state(state, args.state_path);
        if (!args.out_path.empty()) {
            std::ofstream os(args.out_path);
            if (!os)
                throw mfbo::IoFailureError("cannot open output file: " + args.out_path);
            mfbo::driver::write_batch_csv(os, batch.pairs, cfg.domain.dim());
        } else {
            mfbo::driver::write_batch_csv(std::cout, batch.pairs, cfg.domain.dim());
        }
        return 0;
    }

    int cmd_report(const CommonArgs& args)
    {
        const auto cfg = load(args);
        if (args.data_path.empty())
            throw mfbo::ConfigError("report requires --data with the observed results");
        auto state = mfbo::driver::load_state(args.state_path);
        std::ifstream is(args.data_path);
        if (!is)
            throw mfbo::IoFailureError("cannot open data file: " + args.data_path);
        const auto results
            = mfbo::driver::read_observations_csv(is, cfg.domain.dim());

        std::function<double(const mfbo::numerics::Vector&)> reporter;
        if (!cfg.external()) {
            const auto fn = mfbo::benchmarks::by_name(cfg.benchmark);
            reporter = [fn, top = cfg.fidelity_count](const mfbo::numerics::Vector& x) {
                return fn(x, top);
            };
        }
        mfbo::driver::tell(state, results, cfg, reporter);
        mfbo::driver::save_state(state, args.state_path);
        if (!args.out_path.empty())
            write_history(args.out_path, state, cfg.domain.dim());
        std::cout << "round " << state.round << " recorded; total cost "
                  << mfbo::driver::fmt_double(state.cumulative_cost) << "\n";
        return 0;
    }

    int cmd_fit_surrogate(const CommonArgs& args)
    {
        const auto cfg = load(args);
        if (cfg.external())
            throw mfbo::ConfigError("fit-surrogate needs a named benchmark");
        if (cfg.train_sizes.empty())
            throw mfbo::ConfigError("fit-surrogate needs train_sizes in the config");
        const auto fn = mfbo::benchmarks::by_name(cfg.benchmark);
        mfbo::benchmarks::SyntheticDatasetSpec spec{cfg.train_sizes};
        mfbo::numerics::RandomSource rng(cfg.seed);
        const auto report
            = mfbo::driver::evaluate_surrogate(cfg, fn, spec, cfg.test_count, rng);

        std::cout << "nRMSE " << mfbo::driver::fmt_double(report.nrmse_value) << "\n"
                  << "MNLL " << mfbo::driver::fmt_double(report.mnll_value) << "\n";
        for (std::size_t m = 1; m <= report.per_fidelity_nrmse.size(); ++m)
            std::cout << "fidelity " << m << ": nRMSE "
                      << mfbo::driver::fmt_double(report.per_fidelity_nrmse[m - 1])
                      << ", MNLL "
                      << mfbo::driver::fmt_double(report.per_fidelity_mnll[m - 1]) << "\n";
        if (!args.out_path.empty()) {
            std::ofstream os(args.out_path);
            if (!os)
                throw mfbo::IoFailureError("cannot open output file: " + args.out_path);
            os << "fidelity,nrmse,mnll\n";
            for (std::size_t m = 1; m <= report.per_fidelity_nrmse.size(); ++m)
                os << m << ',' << mfbo::driver::fmt_double(report.per_fidelity_nrmse[m - 1])
                   << ',' << mfbo::driver::fmt_double(report.per_fidelity_mnll[m - 1])
                   << '\n';
        }
        return 0;
    }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"multi-fidelity batch Bayesian optimization"};
    app.require_subcommand(1);

    CommonArgs run_args, suggest_args, report_args, fit_args;
    auto* run_cmd = app.add_subcommand("run", "optimize a named benchmark end to end");
    add_common(run_cmd, run_args, false);
    auto* suggest_cmd = app.add_subcommand("suggest", "propose the next query batch");
    add_common(suggest_cmd, suggest_args, true);
    suggest_cmd->add_option("--data", suggest_args.data_path,
                            "initial observations CSV (new states only)");
    auto* report_cmd = app.add_subcommand("report", "ingest results for the pending batch");
    add_common(report_cmd, report_args, true);
    report_cmd->add_option("--data", report_args.data_path, "observed results CSV");
    auto* fit_cmd = app.add_subcommand("fit-surrogate",
                                       "train on synthetic data and report metrics");
    add_common(fit_cmd, fit_args, false);

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed())
            return cmd_run(run_args);
        if (suggest_cmd->parsed())
            return cmd_suggest(suggest_args);
        if (report_cmd->parsed())
            return cmd_report(report_args);
        if (fit_cmd->parsed())
            return cmd_fit_surrogate(fit_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mfbo::ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 4;
    } catch (const mfbo::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const mfbo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
