#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include <mfbo/acquisition/types.hpp>
#include <mfbo/darn/model.hpp>
#include <mfbo/driver/csv.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/numerics/random.hpp>

namespace mfbo::driver {

    /// One charged query: where, at which fidelity, what came back, and the
    /// ledger after it. best_so_far is NaN until a highest-fidelity value
    /// (observed or reporting-only) exists.
    struct HistoryRow {
        std::size_t round = 0; // 0 = initial design
        std::size_t query_index = 0;
        std::size_t fidelity = 1;
        numerics::Vector x;
        double y = 0.0;
        double cost = 0.0;
        double cumulative_cost = 0.0;
        double best_so_far = std::numeric_limits<double>::quiet_NaN();
    };

    /// Full optimizer state: the fidelity-tagged dataset, the cost ledger,
    /// the best-so-far record, the pending batch (between ask and tell), the
    /// query history, and the RNG position.
    struct OptimizationState {
        darn::FidelityDataset data;
        double cumulative_cost = 0.0;
        std::size_t round = 0; // completed rounds
        bool has_best = false;
        double best_value = 0.0;
        numerics::Vector best_x;
        std::vector<acquisition::QueryPoint> pending;
        std::vector<HistoryRow> history;
        numerics::RandomSource rng;

        double best_or_nan() const
        {
            return has_best ? best_value : std::numeric_limits<double>::quiet_NaN();
        }

        void record_best(double value, const numerics::Vector& x)
        {
            if (!has_best || value > best_value) {
                has_best = true;
                best_value = value;
                best_x = x;
            }
        }
    };

    inline std::string history_header(Eigen::Index dim)
    {
        std::string header = "round,query_index,fidelity";
        for (Eigen::Index i = 1; i <= dim; ++i)
            header += ",x" + std::to_string(i);
        header += ",y,cost,cumulative_cost,best_so_far";
        return header;
    }

    inline void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows,
                                  Eigen::Index dim)
    {
        os << history_header(dim) << '\n';
        for (const auto& row : rows) {
            os << row.round << ',' << row.query_index << ',' << row.fidelity;
            for (Eigen::Index i = 0; i < dim; ++i)
                os << ',' << fmt_double(row.x(i));
            os << ',' << fmt_double(row.y) << ',' << fmt_double(row.cost) << ','
               << fmt_double(row.cumulative_cost) << ',' << fmt_double(row.best_so_far)
               << '\n';
        }
    }

    namespace detail {

        inline std::uint64_t fnv1a64(const std::string& text)
        {
            std::uint64_t hash = 1469598103934665603ULL;
            for (unsigned char c : text) {
                hash ^= c;
                hash *= 1099511628211ULL;
            }
            return hash;
        }

        inline std::string hex64(std::uint64_t value)
        {
            static const char digits[] = "0123456789abcdef";
            std::string out(16, '0');
            for (int i = 15; i >= 0; --i) {
                out[static_cast<std::size_t>(i)] = digits[value & 0xf];
                value >>= 4;
            }
            return out;
        }

        // Doubles are stored as shortest round-trip strings so that NaN and
        // infinities survive and checksums are byte-stable.
        inline nlohmann::json vector_to_json(const numerics::Vector& v)
        {
            nlohmann::json arr = nlohmann::json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i)
                arr.push_back(fmt_double(v(i)));
            return arr;
        }

        inline numerics::Vector vector_from_json(const nlohmann::json& arr)
        {
            numerics::Vector v(static_cast<Eigen::Index>(arr.size()));
            for (std::size_t i = 0; i < arr.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = parse_double(arr[i].get<std::string>());
            return v;
        }

        inline nlohmann::json state_to_json(const OptimizationState& state)
        {
            nlohmann::json j;
            j["fidelities"] = state.data.fidelity_count();
            nlohmann::json data = nlohmann::json::array();
            for (std::size_t m = 1; m <= state.data.fidelity_count(); ++m) {
                nlohmann::json fid = nlohmann::json::array();
                for (std::size_t n = 0; n < state.data.count(m); ++n)
                    fid.push_back({{"x", vector_to_json(state.data.inputs[m - 1][n])},
                                   {"y", fmt_double(state.data.targets[m - 1][n])}});
                data.push_back(std::move(fid));
            }
            j["data"] = std::move(data);
            j["cumulative_cost"] = fmt_double(state.cumulative_cost);
            j["round"] = state.round;
            j["has_best"] = state.has_best;
            j["best_value"] = fmt_double(state.best_value);
            j["best_x"] = vector_to_json(state.best_x);
            nlohmann::json pending = nlohmann::json::array();
            for (const auto& p : state.pending)
                pending.push_back({{"x", vector_to_json(p.x)}, {"m", p.fidelity}});
            j["pending"] = std::move(pending);
            nlohmann::json history = nlohmann::json::array();
            for (const auto& row : state.history)
                history.push_back({{"round", row.round},
                                   {"query_index", row.query_index},
                                   {"fidelity", row.fidelity},
                                   {"x", vector_to_json(row.x)},
                                   {"y", fmt_double(row.y)},
                                   {"cost", fmt_double(row.cost)},
                                   {"cumulative_cost", fmt_double(row.cumulative_cost)},
                                   {"best_so_far", fmt_double(row.best_so_far)}});
            j["history"] = std::move(history);
            j["rng"] = state.rng.serialize();
            return j;
        }

        inline OptimizationState state_from_json(const nlohmann::json& j)
        {
            OptimizationState state;
            state.data = darn::FidelityDataset(j.at("fidelities").get<std::size_t>());
            const auto& data = j.at("data");
            for (std::size_t m = 1; m <= data.size(); ++m)
                for (const auto& item : data[m - 1])
                    state.data.add(m, vector_from_json(item.at("x")),
                                   parse_double(item.at("y").get<std::string>()));
            state.cumulative_cost
                = parse_double(j.at("cumulative_cost").get<std::string>());
            state.round = j.at("round").get<std::size_t>();
            state.has_best = j.at("has_best").get<bool>();
            state.best_value = parse_double(j.at("best_value").get<std::string>());
            state.best_x = vector_from_json(j.at("best_x"));
            for (const auto& p : j.at("pending"))
                state.pending.push_back(
                    {vector_from_json(p.at("x")), p.at("m").get<std::size_t>()});
            for (const auto& r : j.at("history")) {
                HistoryRow row;
                row.round = r.at("round").get<std::size_t>();
                row.query_index = r.at("query_index").get<std::size_t>();
                row.fidelity = r.at("fidelity").get<std::size_t>();
                row.x = vector_from_json(r.at("x"));
                row.y = parse_double(r.at("y").get<std::string>());
                row.cost = parse_double(r.at("cost").get<std::string>());
                row.cumulative_cost
                    = parse_double(r.at("cumulative_cost").get<std::string>());
                row.best_so_far = parse_double(r.at("best_so_far").get<std::string>());
                state.history.push_back(std::move(row));
            }
            state.rng = numerics::RandomSource::deserialize(j.at("rng").get<std::string>());
            return state;
        }

    } // namespace detail

    inline constexpr int state_schema_version = 1;

    /// Writes the state as versioned, checksummed JSON. The checksum covers
    /// the serialized state payload.
    inline void save_state(const OptimizationState& state, const std::string& path)
    {
        nlohmann::json payload = detail::state_to_json(state);
        const std::string dump = payload.dump();
        nlohmann::json file;
        file["schema_version"] = state_schema_version;
        file["state"] = std::move(payload);
        file["checksum"] = detail::hex64(detail::fnv1a64(dump));

        const std::string tmp = path + ".tmp";
        {
            std::ofstream os(tmp);
            if (!os)
                throw IoFailureError("cannot write state file: " + path);
            os << file.dump(2) << '\n';
            if (!os)
                throw IoFailureError("failed writing state file: " + path);
        }
        if (std::rename(tmp.c_str(), path.c_str()) != 0)
            throw IoFailureError("cannot replace state file: " + path);
    }

    inline OptimizationState load_state(const std::string& path)
    {
        std::ifstream is(path);
        if (!is)
            throw IoFailureError("cannot open state file: " + path);
        nlohmann::json file;
        try {
            is >> file;
        } catch (const nlohmann::json::exception&) {
            throw ChecksumMismatchError("state file is corrupt or truncated: " + path);
        }
        try {
            if (file.at("schema_version").get<int>() != state_schema_version)
                throw SchemaVersionMismatchError("unsupported state schema version in "
                                                 + path);
            const std::string dump = file.at("state").dump();
            if (detail::hex64(detail::fnv1a64(dump)) != file.at("checksum").get<std::string>())
                throw ChecksumMismatchError("state checksum mismatch: " + path);
            return detail::state_from_json(file.at("state"));
        } catch (const nlohmann::json::exception&) {
            throw ChecksumMismatchError("state file has missing or malformed fields: "
                                        + path);
        }
    }

} // namespace mfbo::driver
