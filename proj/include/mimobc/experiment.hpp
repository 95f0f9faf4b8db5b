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

#ifndef MIMOBC_EXPERIMENT_HPP
#define MIMOBC_EXPERIMENT_HPP

#include "mimobc.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace mimobc
{
    inline constexpr int output_schema_version = 1;

    struct CorrelationSpec
    {
        enum class Kind
        {
            identity,
            scalar,
            matrices
        };
        Kind kind = Kind::identity;
        std::vector<double> gains;
        std::vector<CMatrix> matrices;

        CorrelationModel build(const SystemProfile &profile) const
        {
            switch (kind)
            {
            case Kind::scalar:
                return CorrelationModel::scalar(profile, gains);
            case Kind::matrices: {
                CorrelationModel model(matrices);
                if (!model.matches(profile))
                    throw ConfigError("correlation matrices do not match the antenna profile");
                return model;
            }
            default:
                return CorrelationModel::identity(profile);
            }
        }
    };

    struct ProfileSpec
    {
        int base_antennas = 0;
        std::vector<int> antennas;
    };

    struct ExperimentConfig
    {
        std::string experiment = "table1"; // table1 | rate-loss | curves | validate
        int base_antennas = 5;
        std::vector<int> antennas{2, 2};
        std::optional<std::vector<double>> weights;
        CorrelationSpec correlation;
        std::string channel_model = "rayleigh"; // rayleigh | orthogonal
        std::vector<double> ptx_grid_db{-10, -5, 0, 5, 10, 15, 20, 25, 30, 35, 40};
        double reference_ptx_db = 30.0;
        std::size_t trials = 1000;
        std::uint64_t seed = 1;
        std::string output; // empty: stdout
        std::string format = "csv";
        bool monte_carlo = false;
        std::vector<ProfileSpec> extra_profiles;
        double tolerance = 1e-8;
        std::size_t max_iterations = 500;
        unsigned threads = 0;

        SystemProfile profile() const
        {
            try
            {
                return SystemProfile(base_antennas, antennas, weights.value_or(std::vector<double>{}));
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError(e.what());
            }
        }

        CorrelationModel correlation_model() const
        {
            try
            {
                return correlation.build(profile());
            }
            catch (const ValidationError &e)
            {
                throw ConfigError(e.what());
            }
        }

        /// Throws ConfigError when any field is out of range.
        void validate() const
        {
            static const std::set<std::string> kinds{"table1", "rate-loss", "curves", "validate"};
            if (!kinds.contains(experiment))
                throw ConfigError("unknown experiment '" + experiment + "'");
            if (format != "csv" && format != "json")
                throw ConfigError("format must be csv or json, got '" + format + "'");
            if (channel_model != "rayleigh" && channel_model != "orthogonal")
                throw ConfigError("channel_model must be rayleigh or orthogonal, got '" + channel_model + "'");
            if (trials < 2)
                throw ConfigError("trials must be at least 2");
            if (!(tolerance > 0.0))
                throw ConfigError("tolerance must be positive");
            if (max_iterations < 1)
                throw ConfigError("max_iterations must be positive");
            if (ptx_grid_db.empty())
                throw ConfigError("the transmit power grid is empty");
            if (!std::is_sorted(ptx_grid_db.begin(), ptx_grid_db.end()))
                throw ConfigError("the transmit power grid must be ascending");
            if (!std::isfinite(reference_ptx_db))
                throw ConfigError("reference_ptx_db must be finite");
            profile();
            correlation_model();
            for (const auto &p : extra_profiles)
                if (p.antennas.empty() || p.base_antennas < 1 ||
                    std::any_of(p.antennas.begin(), p.antennas.end(), [](int a) { return a < 1; }))
                    throw ConfigError("extra profile needs N >= 1 and positive antenna counts");
        }
    };

    /// Parses "start:step:stop" (stop inclusive) into a dB grid.
    inline std::vector<double> parse_grid(const std::string &text)
    {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':'))
        {
            double v = 0.0;
            const auto *first = item.data();
            const auto *last = item.data() + item.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last)
                throw ConfigError("power grid: cannot parse '" + item + "' in '" + text + "'");
            parts.push_back(v);
        }
        if (parts.size() != 3)
            throw ConfigError("power grid must read start:step:stop, got '" + text + "'");
        const double start = parts[0], step = parts[1], stop = parts[2];
        if (!(step > 0.0) || stop < start)
            throw ConfigError("power grid needs a positive step and stop >= start");
        std::vector<double> grid;
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= count; ++i)
            grid.push_back(start + static_cast<double>(i) * step);
        return grid;
    }

    namespace detail
    {
        using nlohmann::json;

        inline CMatrix parse_matrix(const json &j)
        {
            if (!j.is_array() || j.empty())
                throw ConfigError("correlation matrix must be a nonempty array of rows");
            const auto rows = static_cast<Eigen::Index>(j.size());
            const auto cols = static_cast<Eigen::Index>(j.front().size());
            CMatrix m(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i)
            {
                const auto &row = j.at(static_cast<std::size_t>(i));
                if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
                    throw ConfigError("correlation matrix rows must have equal length");
                for (Eigen::Index c = 0; c < cols; ++c)
                {
                    const auto &e = row.at(static_cast<std::size_t>(c));
                    if (e.is_number())
                        m(i, c) = Complex(e.get<double>(), 0.0);
                    else if (e.is_array() && e.size() == 2)
                        m(i, c) = Complex(e[0].get<double>(), e[1].get<double>());
                    else
                        throw ConfigError("matrix entries are numbers or [re, im] pairs");
                }
            }
            return m;
        }

        inline void reject_unknown(const json &j, const std::set<std::string> &known, const std::string &where)
        {
            for (auto it = j.begin(); it != j.end(); ++it)
                if (!known.contains(it.key()))
                    throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    } // namespace detail

    /// Overlays a JSON document onto `base`. Unknown keys are rejected.
    inline ExperimentConfig parse_config(const nlohmann::json &j, ExperimentConfig base = {})
    {
        using detail::json;
        if (!j.is_object())
            throw ConfigError("config must be a JSON object");
        detail::reject_unknown(j,
                               {"schema_version", "experiment", "base_antennas", "antennas", "weights",
                                "correlation", "channel_model", "ptx_grid_db", "reference_ptx_db", "trials", "seed",
                                "output", "format", "monte_carlo", "extra_profiles", "tolerance", "max_iterations",
                                "threads"},
                               "config");
        try
        {
            if (j.contains("schema_version") && j["schema_version"].get<int>() != output_schema_version)
                throw ConfigError("unsupported schema_version " + j["schema_version"].dump());
            if (j.contains("experiment"))
                base.experiment = j["experiment"].get<std::string>();
            if (j.contains("base_antennas"))
                base.base_antennas = j["base_antennas"].get<int>();
            if (j.contains("antennas"))
                base.antennas = j["antennas"].get<std::vector<int>>();
            if (j.contains("weights"))
                base.weights = j["weights"].get<std::vector<double>>();
            if (j.contains("correlation"))
            {
                const auto &c = j["correlation"];
                detail::reject_unknown(c, {"type", "path_gains", "matrices"}, "correlation");
                const auto type = c.at("type").get<std::string>();
                base.correlation = {};
                if (type == "identity")
                    base.correlation.kind = CorrelationSpec::Kind::identity;
                else if (type == "scalar")
                {
                    base.correlation.kind = CorrelationSpec::Kind::scalar;
                    base.correlation.gains = c.at("path_gains").get<std::vector<double>>();
                }
                else if (type == "matrices")
                {
                    base.correlation.kind = CorrelationSpec::Kind::matrices;
                    for (const auto &m : c.at("matrices"))
                        base.correlation.matrices.push_back(detail::parse_matrix(m));
                }
                else
                    throw ConfigError("correlation type must be identity, scalar or matrices");
            }
            if (j.contains("channel_model"))
                base.channel_model = j["channel_model"].get<std::string>();
            if (j.contains("ptx_grid_db"))
            {
                const auto &g = j["ptx_grid_db"];
                base.ptx_grid_db = g.is_string() ? parse_grid(g.get<std::string>()) : g.get<std::vector<double>>();
            }
            if (j.contains("reference_ptx_db"))
                base.reference_ptx_db = j["reference_ptx_db"].get<double>();
            if (j.contains("trials"))
            {
                if (j["trials"].get<long long>() < 2)
                    throw ConfigError("trials must be at least 2");
                base.trials = j["trials"].get<std::size_t>();
            }
            if (j.contains("seed"))
                base.seed = j["seed"].get<std::uint64_t>();
            if (j.contains("output"))
                base.output = j["output"].get<std::string>();
            if (j.contains("format"))
                base.format = j["format"].get<std::string>();
            if (j.contains("monte_carlo"))
                base.monte_carlo = j["monte_carlo"].get<bool>();
            if (j.contains("extra_profiles"))
            {
                base.extra_profiles.clear();
                for (const auto &p : j["extra_profiles"])
                {
                    detail::reject_unknown(p, {"base_antennas", "antennas"}, "extra_profiles");
                    base.extra_profiles.push_back(
                        {p.at("base_antennas").get<int>(), p.at("antennas").get<std::vector<int>>()});
                }
            }
            if (j.contains("tolerance"))
                base.tolerance = j["tolerance"].get<double>();
            if (j.contains("max_iterations"))
            {
                if (j["max_iterations"].get<long long>() < 1)
                    throw ConfigError("max_iterations must be positive");
                base.max_iterations = j["max_iterations"].get<std::size_t>();
            }
            if (j.contains("threads"))
                base.threads = j["threads"].get<unsigned>();
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError(std::string("config: ") + e.what());
        }
        return base;
    }

    inline ExperimentConfig load_config(const std::string &path, ExperimentConfig base = {})
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(in, nullptr, true, true); // comments allowed
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError("config file '" + path + "': " + e.what());
        }
        return parse_config(j, std::move(base));
    }

    // Tabular experiment output.
    using Cell = std::variant<std::monostate, double, long long, std::string>;

    struct ResultTable
    {
        std::string experiment;
        std::vector<std::string> columns;
        std::vector<std::vector<Cell>> rows;
        nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    };

    /// Shortest decimal form with 12 significant digits, independent of the locale.
    inline std::string format_number(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
        return std::string(buf, ptr);
    }

    inline double round_significant(double v)
    {
        if (!std::isfinite(v))
            return v;
        const auto s = format_number(v);
        double out = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), out);
        return out;
    }

    inline void write_csv(std::ostream &os, const ResultTable &table)
    {
        os << "# schema_version: " << output_schema_version << ", experiment: " << table.experiment << '\n';
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            os << (c ? "," : "") << table.columns[c];
        os << '\n';
        for (const auto &row : table.rows)
        {
            for (std::size_t c = 0; c < row.size(); ++c)
            {
                if (c)
                    os << ',';
                std::visit(
                    [&](const auto &v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, double>)
                            os << format_number(v);
                        else if constexpr (std::is_same_v<T, long long>)
                            os << v;
                        else if constexpr (std::is_same_v<T, std::string>)
                            os << v;
                    },
                    row[c]);
            }
            os << '\n';
        }
    }

    inline nlohmann::ordered_json to_json(const ResultTable &table)
    {
        nlohmann::ordered_json j;
        j["schema_version"] = output_schema_version;
        j["experiment"] = table.experiment;
        j["columns"] = table.columns;
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto &row : table.rows)
        {
            nlohmann::ordered_json r = nlohmann::ordered_json::object();
            for (std::size_t c = 0; c < row.size(); ++c)
                std::visit(
                    [&](const auto &v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, std::monostate>)
                            r[table.columns[c]] = nullptr;
                        else if constexpr (std::is_same_v<T, double>)
                            r[table.columns[c]] = round_significant(v);
                        else
                            r[table.columns[c]] = v;
                    },
                    row[c]);
            j["rows"].push_back(std::move(r));
        }
        j["metadata"] = table.metadata;
        return j;
    }

    inline void write_table(std::ostream &os, const ResultTable &table, const std::string &format)
    {
        if (format == "json")
            os << to_json(table).dump(2) << '\n';
        else
            write_csv(os, table);
    }

    /// Writes to `path`, or stdout when the path is empty.
    inline void emit(const ResultTable &table, const ExperimentConfig &config)
    {
        if (config.output.empty())
        {
            write_table(std::cout, table, config.format);
            return;
        }
        std::ofstream out(config.output, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open output file '" + config.output + "'");
        write_table(out, table, config.format);
        if (!out)
            throw std::runtime_error("failed writing output file '" + config.output + "'");
    }

    /// Ergodic rate loss table: every standard profile for N = 2..6 plus the configured extra profiles.
    /// Cells with N < r are emitted empty.
    inline ResultTable run_table1(const ExperimentConfig &config)
    {
        ResultTable t;
        t.experiment = "table1";
        t.columns = {"profile", "N", "closed_form_bits", "mc_mean_bits", "mc_stderr"};

        std::vector<ProfileSpec> specs;
        for (const auto &antennas : rate_loss_table_profiles())
            for (int n = rate_loss_table_min_n; n <= rate_loss_table_max_n; ++n)
                specs.push_back({n, antennas});
        specs.insert(specs.end(), config.extra_profiles.begin(), config.extra_profiles.end());

        for (const auto &spec : specs)
        {
            std::vector<Cell> row{profile_label(spec.antennas), static_cast<long long>(spec.base_antennas)};
            const auto value = rate_loss_cell(spec.antennas, spec.base_antennas);
            if (!value)
            {
                row.insert(row.end(), {std::monostate{}, std::monostate{}, std::monostate{}});
                t.rows.push_back(std::move(row));
                continue;
            }
            row.push_back(*value);
            if (config.monte_carlo)
            {
                const SystemProfile profile(spec.base_antennas, spec.antennas);
                const auto est = monte_carlo_rate_loss(profile, CorrelationModel::identity(profile),
                                                       monte_carlo_trials(profile, config.trials), config.seed,
                                                       config.threads);
                row.push_back(est.mean);
                row.push_back(est.standard_error);
            }
            else
                row.insert(row.end(), {std::monostate{}, std::monostate{}});
            t.rows.push_back(std::move(row));
        }
        t.metadata["monte_carlo"] = config.monte_carlo;
        t.metadata["seed"] = config.seed;
        t.metadata["base_trials"] = config.trials;
        return t;
    }

    /// Channel with mutually orthogonal user blocks, H_k^H H_l = 0 for k != l.
    inline ChannelRealization sample_orthogonal_channel(const SystemProfile &profile,
                                                        const CorrelationModel &correlation, std::uint64_t seed)
    {
        std::mt19937_64 engine(splitmix64(seed));
        const CMatrix z = complex_gaussian(profile.base_antennas(), profile.total_antennas(), engine);
        Eigen::HouseholderQR<CMatrix> qr(z);
        const CMatrix q = qr.householderQ() * CMatrix::Identity(profile.base_antennas(), profile.total_antennas());
        CMatrix h(profile.base_antennas(), profile.total_antennas());
        for (std::size_t k = 0; k < profile.users(); ++k)
        {
            const auto b = profile.block(k);
            h.middleCols(b.offset, b.size) = q.middleCols(b.offset, b.size) * correlation.sqrt_block(k);
        }
        return ChannelRealization(profile, std::move(h));
    }

    /// One row per trial: instantaneous rate loss, asymptotic per-user rates at the optimal power split and
    /// the DPC asymptote, both at the reference transmit power. Singular realizations are flagged.
    inline ResultTable run_rate_loss(const ExperimentConfig &config)
    {
        const auto profile = config.profile();
        const auto correlation = config.correlation_model();
        const double power = db_to_linear(config.reference_ptx_db);
        const auto split = optimal_power_split(profile, power);

        ResultTable t;
        t.experiment = "rate-loss";
        t.columns = {"trial", "seed", "status", "delta_r"};
        for (std::size_t k = 0; k < profile.users(); ++k)
            t.columns.push_back("rate_user_" + std::to_string(k + 1));
        t.columns.push_back("dpc_asymptote");

        struct Row
        {
            bool ok = false;
            double delta = 0.0;
            std::vector<double> rates;
            double dpc = 0.0;
        };
        const bool orthogonal = config.channel_model == "orthogonal";
        auto rows = run_trials<Row>(
            config.trials,
            [&](std::size_t i) {
                Row row;
                const auto seed = trial_seed(config.seed, i);
                const auto ch = orthogonal ? sample_orthogonal_channel(profile, correlation, seed)
                                           : sample_channel(profile, correlation, seed);
                try
                {
                    const GramInverse gram(ch);
                    row.delta = instantaneous_rate_loss(gram, profile);
                    row.rates = asymptotic_rates(gram, profile, split).rates;
                    row.dpc = dpc_asymptotic_sum_rate(gram, profile, power);
                    row.ok = true;
                }
                catch (const NumericalRankError &)
                {
                }
                return row;
            },
            config.threads);

        std::vector<double> deltas;
        std::size_t flagged = 0;
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            std::vector<Cell> cells{static_cast<long long>(i), std::to_string(trial_seed(config.seed, i))};
            if (rows[i].ok)
            {
                cells.push_back(std::string("ok"));
                cells.push_back(rows[i].delta);
                for (double r : rows[i].rates)
                    cells.push_back(r);
                cells.push_back(rows[i].dpc);
                deltas.push_back(rows[i].delta);
            }
            else
            {
                ++flagged;
                cells.push_back(std::string("rank_deficient"));
                cells.resize(t.columns.size(), std::monostate{});
            }
            t.rows.push_back(std::move(cells));
        }
        t.metadata["reference_ptx_db"] = config.reference_ptx_db;
        t.metadata["seed"] = config.seed;
        t.metadata["rank_deficient"] = flagged;
        t.metadata["closed_form_bits"] = round_significant(ergodic_rate_loss(profile));
        if (deltas.size() >= 2)
        {
            const auto est = summarize(deltas, config.seed);
            t.metadata["delta_r_mean"] = round_significant(est.mean);
            t.metadata["delta_r_stderr"] = round_significant(est.standard_error);
        }
        return t;
    }

    inline ResultTable run_curves(const ExperimentConfig &config)
    {
        const auto profile = config.profile();
        const auto curves = generate_curves(profile, config.correlation_model(), config.ptx_grid_db, config.trials,
                                            config.seed, config.tolerance, config.max_iterations, config.threads);
        ResultTable t;
        t.experiment = "curves";
        t.columns = {"P_dB", "dpc_exact", "linear_exact", "dpc_affine", "linear_affine", "dpc_stderr", "linear_stderr"};
        for (const auto &p : curves.points)
            t.rows.push_back({p.power_db, p.dpc_sum_capacity, p.linear_bd_sum_rate, p.dpc_affine, p.linear_affine,
                              p.dpc_stderr, p.linear_stderr});
        t.metadata["trials"] = curves.trials;
        t.metadata["seed"] = config.seed;
        t.metadata["nonconverged"] = curves.nonconverged;
        t.metadata["redraws"] = curves.redraws;
        t.metadata["dominance_violations"] = curves.dominance_violations;
        t.metadata["ergodic_rate_loss_bits"] = round_significant(ergodic_rate_loss(profile));
        t.metadata["power_offset_db"] =
            round_significant(power_offset_db(ergodic_rate_loss(profile), profile.total_antennas()));
        return t;
    }

} // namespace mimobc

#endif
