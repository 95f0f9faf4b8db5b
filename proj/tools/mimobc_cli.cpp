// SPDX-License-Identifier: Apache-2.0
//
// mimobc - high-SNR rate analysis of the MIMO broadcast channel
// Copyright (C) 2026 The mimobc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Command-line front end: table1 | rate-loss | curves | validate.
// Exit codes: 0 success, 1 validation failure, 2 config error, 3 numerical error.

#include <CLI11.hpp>

#include <mimobc/validation.hpp>

#include <iostream>

namespace
{
    enum ExitCode
    {
        exit_ok = 0,
        exit_validation_failed = 1,
        exit_config_error = 2,
        exit_numerical_error = 3
    };
}

int main(int argc, char **argv)
{
    CLI::App app{"High-SNR rate analysis of the MIMO broadcast channel under linear filtering"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> grid;

    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed");
    app.add_option("--trials", trials, "Monte Carlo trials");
    app.add_option("--out", out, "output path (stdout when omitted)");
    app.add_option("--format", format, "csv or json");
    app.add_option("--ptx-grid-db", grid, "transmit power grid start:step:stop in dB");

    for (const char *name : {"table1", "rate-loss", "curves", "validate"})
        app.add_subcommand(name)->fallthrough();
    app.get_subcommand("table1")->description("closed-form ergodic rate loss table, optionally with Monte Carlo");
    app.get_subcommand("rate-loss")->description("instantaneous rate loss per realization");
    app.get_subcommand("curves")->description("ergodic DPC and linear sum rates with affine approximations");
    app.get_subcommand("validate")->description("run the invariant suite");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config_error;
    }

    try
    {
        mimobc::ExperimentConfig config;
        if (!config_path.empty())
            config = mimobc::load_config(config_path, config);
        config.experiment = app.get_subcommands().front()->get_name();
        if (seed)
            config.seed = *seed;
        if (trials)
            config.trials = *trials;
        if (out)
            config.output = *out;
        if (format)
            config.format = *format;
        if (grid)
            config.ptx_grid_db = mimobc::parse_grid(*grid);
        config.validate();

        if (config.experiment == "table1")
            mimobc::emit(mimobc::run_table1(config), config);
        else if (config.experiment == "rate-loss")
            mimobc::emit(mimobc::run_rate_loss(config), config);
        else if (config.experiment == "curves")
            mimobc::emit(mimobc::run_curves(config), config);
        else
        {
            const auto report = mimobc::run_validation(config);
            mimobc::emit(report.table(), config);
            if (!report.passed())
            {
                std::cerr << "validation failed\n";
                return exit_validation_failed;
            }
        }
    }
    catch (const mimobc::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config_error;
    }
    catch (const mimobc::ValidationError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config_error;
    }
    catch (const mimobc::NumericalRankError &e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical_error;
    }
    catch (const mimobc::DomainError &e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical_error;
    }
    catch (const mimobc::DegeneracyError &e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical_error;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config_error;
    }
    return exit_ok;
}
