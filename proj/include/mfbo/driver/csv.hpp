#pragma once

#include <charconv>
#include <cstddef>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <mfbo/acquisition/types.hpp>
#include <mfbo/darn/model.hpp>
#include <mfbo/errors.hpp>

namespace mfbo::driver {

    /// Shortest decimal form that round-trips the exact double.
    inline std::string fmt_double(double v)
    {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, end);
    }

    inline double parse_double(const std::string& text)
    {
        const char* begin = text.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin)
            throw InvalidParameterError("cannot parse number: " + text);
        return v;
    }

    inline std::vector<std::string> split_csv_line(const std::string& line)
    {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream is(line);
        while (std::getline(is, field, ','))
            fields.push_back(field);
        if (!line.empty() && line.back() == ',')
            fields.emplace_back();
        return fields;
    }

    /// One observed query result, as exchanged through dataset CSV files.
    struct Observation {
        numerics::Vector x;
        std::size_t fidelity = 1;
        double y = 0.0;
    };

    inline std::string dataset_header(Eigen::Index dim)
    {
        std::string header = "fidelity";
        for (Eigen::Index i = 1; i <= dim; ++i)
            header += ",x" + std::to_string(i);
        header += ",y";
        return header;
    }

    inline void write_dataset_csv(std::ostream& os, const darn::FidelityDataset& data,
                                  Eigen::Index dim)
    {
        os << dataset_header(dim) << '\n';
        for (std::size_t m = 1; m <= data.fidelity_count(); ++m)
            for (std::size_t n = 0; n < data.count(m); ++n) {
                os << m;
                for (Eigen::Index i = 0; i < dim; ++i)
                    os << ',' << fmt_double(data.inputs[m - 1][n](i));
                os << ',' << fmt_double(data.targets[m - 1][n]) << '\n';
            }
    }

    inline std::vector<Observation> read_observations_csv(std::istream& is, Eigen::Index dim)
    {
        std::string line;
        if (!std::getline(is, line))
            throw InvalidParameterError("empty CSV");
        if (line != dataset_header(dim))
            throw InvalidParameterError("unexpected CSV header: " + line);
        std::vector<Observation> rows;
        while (std::getline(is, line)) {
            if (line.empty())
                continue;
            const auto fields = split_csv_line(line);
            if (fields.size() != static_cast<std::size_t>(dim) + 2)
                throw InvalidParameterError("bad CSV row: " + line);
            Observation obs;
            obs.fidelity = static_cast<std::size_t>(std::stoul(fields[0]));
            obs.x.resize(dim);
            for (Eigen::Index i = 0; i < dim; ++i)
                obs.x(i) = parse_double(fields[static_cast<std::size_t>(i) + 1]);
            obs.y = parse_double(fields.back());
            rows.push_back(std::move(obs));
        }
        return rows;
    }

    inline std::string batch_header(Eigen::Index dim)
    {
        std::string header = "fidelity";
        for (Eigen::Index i = 1; i <= dim; ++i)
            header += ",x" + std::to_string(i);
        return header;
    }

    inline void write_batch_csv(std::ostream& os,
                                const std::vector<acquisition::QueryPoint>& pairs,
                                Eigen::Index dim)
    {
        os << batch_header(dim) << '\n';
        for (const auto& pair : pairs) {
            os << pair.fidelity;
            for (Eigen::Index i = 0; i < dim; ++i)
                os << ',' << fmt_double(pair.x(i));
            os << '\n';
        }
    }

} // namespace mfbo::driver
