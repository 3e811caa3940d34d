#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include <mfbo/errors.hpp>

namespace mfbo::numerics {

    namespace detail {
        // splitmix64; used to derive sub-stream seeds.
        inline std::uint64_t mix64(std::uint64_t z)
        {
            z += 0x9e3779b97f4a7c15ULL;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        }
    } // namespace detail

    /// Seeded random stream. The same seed always reproduces the same draw
    /// sequence; split() derives an independent child stream deterministically.
    /// Single-consumer: concurrent users must split first.
    class RandomSource {
    public:
        explicit RandomSource(std::uint64_t seed = 0)
            : _seed(seed), _engine(detail::mix64(seed)) {}

        std::uint64_t seed() const { return _seed; }

        std::uint64_t next_u64() { return _engine(); }

        /// Uniform draw in [0, 1).
        double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

        /// Uniform draw in [lo, hi).
        double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        /// Integer uniform in [0, n).
        std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

        /// Standard normal via the polar method (no cached state, so streams
        /// serialize as plain engine state).
        double normal()
        {
            for (;;) {
                double u = 2.0 * uniform() - 1.0;
                double v = 2.0 * uniform() - 1.0;
                double s = u * u + v * v;
                if (s > 0.0 && s < 1.0)
                    return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }

        /// Independent child stream; the n-th split of a given source is
        /// the same across runs.
        RandomSource split()
        {
            ++_split_count;
            return RandomSource(detail::mix64(_seed ^ detail::mix64(_split_count)));
        }

        /// Engine-state round-trip for persistence.
        std::string serialize() const
        {
            std::ostringstream os;
            os << _seed << ' ' << _split_count << ' ' << _engine;
            return os.str();
        }

        static RandomSource deserialize(const std::string& text)
        {
            std::istringstream is(text);
            RandomSource src;
            is >> src._seed >> src._split_count >> src._engine;
            if (!is)
                throw IoFailureError("bad random-source state");
            return src;
        }

        bool operator==(const RandomSource& other) const
        {
            return _seed == other._seed && _split_count == other._split_count
                && _engine == other._engine;
        }

    private:
        std::uint64_t _seed = 0;
        std::uint64_t _split_count = 0;
        std::mt19937_64 _engine;
    };

    /// Draw from Gamma(shape, rate), mean shape/rate. Marsaglia-Tsang squeeze
    /// with the shape<1 boost.
    inline double gamma_sample(double shape, double rate, RandomSource& rng)
    {
        if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
            throw InvalidParameterError("gamma_sample requires positive finite shape and rate");

        if (shape < 1.0) {
            // Gamma(a) = Gamma(a+1) * U^(1/a)
            double u = rng.uniform();
            while (u <= 0.0)
                u = rng.uniform();
            return gamma_sample(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
        }

        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = rng.normal();
            double t = 1.0 + c * x;
            if (t <= 0.0)
                continue;
            double v = t * t * t;
            double u = rng.uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v / rate;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v / rate;
        }
    }

} // namespace mfbo::numerics
