#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <mfbo/acquisition/types.hpp>
#include <mfbo/benchmarks/functions.hpp>
#include <mfbo/box.hpp>
#include <mfbo/driver/csv.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/hmc/sample_set.hpp>

namespace mfbo::driver {

    /// Everything a run needs. Benchmark configs take their domain, fidelity
    /// count, and input dimension from the named objective; external configs
    /// must state them explicitly.
    struct RunConfig {
        std::string benchmark; // "branin3", "levy2", or "external"
        std::size_t input_dim = 0;
        std::size_t fidelity_count = 0;
        Box domain;
        std::vector<double> costs; // empty: default model for the fidelity count
        std::size_t batch_size = 5;
        std::size_t rounds = 10;
        std::optional<double> budget; // cap on total charged cost
        std::uint64_t seed = 0;
        std::size_t init_per_fidelity = 10;
        std::vector<std::size_t> hidden_widths = {40, 40};
        double prior_a0 = 1.0;
        double prior_b0 = 0.1;
        hmc::HmcConfig hmc;
        acquisition::AcqOptConfig acq;
        bool mixture_predictive = false;
        std::vector<std::size_t> train_sizes; // fit-surrogate mode
        std::size_t test_count = 100;         // fit-surrogate mode

        bool external() const { return benchmark == "external"; }

        acquisition::CostModel cost_model() const
        {
            if (costs.empty())
                return benchmarks::default_cost_model(fidelity_count);
            if (costs.size() != fidelity_count)
                throw ConfigError("costs must list one value per fidelity");
            numerics::Vector lambdas(static_cast<Eigen::Index>(costs.size()));
            for (std::size_t i = 0; i < costs.size(); ++i)
                lambdas(static_cast<Eigen::Index>(i)) = costs[i];
            return acquisition::CostModel(lambdas);
        }

        darn::DarnModel build_model() const
        {
            return darn::DarnModel(fidelity_count, input_dim, hidden_widths, prior_a0,
                                   prior_b0);
        }
    };

    namespace detail {
        inline std::vector<double> parse_double_list(const std::string& text)
        {
            std::vector<double> values;
            std::istringstream is(text);
            std::string item;
            while (std::getline(is, item, ','))
                values.push_back(parse_double(item));
            return values;
        }

        inline std::vector<std::size_t> parse_count_list(const std::string& text)
        {
            std::vector<std::size_t> values;
            std::istringstream is(text);
            std::string item;
            while (std::getline(is, item, ','))
                values.push_back(static_cast<std::size_t>(std::stoul(item)));
            return values;
        }

        inline bool parse_bool(const std::string& text)
        {
            if (text == "true" || text == "1" || text == "on")
                return true;
            if (text == "false" || text == "0" || text == "off")
                return false;
            throw ConfigError("expected boolean, got: " + text);
        }

        inline std::string trim(const std::string& s)
        {
            const auto begin = s.find_first_not_of(" \t\r");
            if (begin == std::string::npos)
                return "";
            const auto end = s.find_last_not_of(" \t\r");
            return s.substr(begin, end - begin + 1);
        }
    } // namespace detail

    /// Parses the key = value configuration format. Unknown keys are errors.
    inline RunConfig parse_config_text(const std::string& text)
    {
        RunConfig cfg;
        std::vector<double> lower, upper;
        std::istringstream is(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const auto comment = line.find('#');
            if (comment != std::string::npos)
                line = line.substr(0, comment);
            line = detail::trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no)
                                  + ": expected key = value");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            try {
                if (key == "benchmark")
                    cfg.benchmark = value;
                else if (key == "dim")
                    cfg.input_dim = std::stoul(value);
                else if (key == "fidelities")
                    cfg.fidelity_count = std::stoul(value);
                else if (key == "lower")
                    lower = detail::parse_double_list(value);
                else if (key == "upper")
                    upper = detail::parse_double_list(value);
                else if (key == "costs")
                    cfg.costs = detail::parse_double_list(value);
                else if (key == "batch_size")
                    cfg.batch_size = std::stoul(value);
                else if (key == "rounds")
                    cfg.rounds = std::stoul(value);
                else if (key == "budget")
                    cfg.budget = parse_double(value);
                else if (key == "seed")
                    cfg.seed = std::stoull(value);
                else if (key == "init_per_fidelity")
                    cfg.init_per_fidelity = std::stoul(value);
                else if (key == "hidden")
                    cfg.hidden_widths = detail::parse_count_list(value);
                else if (key == "prior_a0")
                    cfg.prior_a0 = parse_double(value);
                else if (key == "prior_b0")
                    cfg.prior_b0 = parse_double(value);
                else if (key == "hmc_burn_in")
                    cfg.hmc.burn_in_steps = std::stoul(value);
                else if (key == "hmc_thinning")
                    cfg.hmc.thinning = std::stoul(value);
                else if (key == "hmc_samples")
                    cfg.hmc.sample_count = std::stoul(value);
                else if (key == "hmc_leapfrog")
                    cfg.hmc.leapfrog_steps = std::stoul(value);
                else if (key == "hmc_step_size")
                    cfg.hmc.step_size = parse_double(value);
                else if (key == "hmc_map_warm_start")
                    cfg.hmc.map_warm_start = detail::parse_bool(value);
                else if (key == "acq_samples")
                    cfg.acq.sample_count = std::stoul(value);
                else if (key == "acq_max_iters")
                    cfg.acq.max_iterations = std::stoul(value);
                else if (key == "acq_tolerance")
                    cfg.acq.tolerance = parse_double(value);
                else if (key == "acq_restarts")
                    cfg.acq.restarts = std::stoul(value);
                else if (key == "acq_eval_budget")
                    cfg.acq.eval_budget = std::stoul(value);
                else if (key == "predictive") {
                    if (value == "gaussian")
                        cfg.mixture_predictive = false;
                    else if (value == "mixture")
                        cfg.mixture_predictive = true;
                    else
                        throw ConfigError("predictive must be gaussian or mixture");
                } else if (key == "train_sizes")
                    cfg.train_sizes = detail::parse_count_list(value);
                else if (key == "test_count")
                    cfg.test_count = std::stoul(value);
                else
                    throw ConfigError("unknown key: " + key);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw ConfigError("line " + std::to_string(line_no) + " (" + key
                                  + "): " + e.what());
            }
        }

        if (cfg.benchmark.empty())
            throw ConfigError("config must set benchmark");
        if (cfg.external()) {
            if (cfg.input_dim == 0 || cfg.fidelity_count == 0)
                throw ConfigError("external mode requires dim and fidelities");
            if (lower.size() != cfg.input_dim || upper.size() != cfg.input_dim)
                throw ConfigError("external mode requires lower/upper of length dim");
            numerics::Vector lo(static_cast<Eigen::Index>(cfg.input_dim));
            numerics::Vector hi(static_cast<Eigen::Index>(cfg.input_dim));
            for (std::size_t i = 0; i < cfg.input_dim; ++i) {
                lo(static_cast<Eigen::Index>(i)) = lower[i];
                hi(static_cast<Eigen::Index>(i)) = upper[i];
            }
            cfg.domain = Box(lo, hi);
        } else {
            if (!lower.empty() || !upper.empty())
                throw ConfigError("benchmark domains are fixed; drop lower/upper");
            const auto fn = benchmarks::by_name(cfg.benchmark);
            cfg.domain = fn.domain;
            cfg.fidelity_count = fn.fidelity_count;
            cfg.input_dim = static_cast<std::size_t>(fn.domain.dim());
        }
        if (cfg.batch_size < 1)
            throw ConfigError("batch_size must be >= 1");
        if (cfg.rounds < 1 && !cfg.budget)
            throw ConfigError("set rounds >= 1 or a budget");
        cfg.hmc.validate();
        cfg.acq.validate();
        cfg.cost_model(); // validates costs
        return cfg;
    }

    inline RunConfig load_config(const std::string& path)
    {
        std::ifstream file(path);
        if (!file)
            throw ConfigError("cannot open config file: " + path);
        std::ostringstream buffer;
        buffer << file.rdbuf();
        return parse_config_text(buffer.str());
    }

} // namespace mfbo::driver
