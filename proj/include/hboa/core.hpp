// core.hpp: bitstring genomes, populations, random source, problem interface
// and evaluation accounting shared by the rest of the library.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hboa {

/// Fixed-length bitstring candidate solution. One byte per bit; the fitness
/// is cached after evaluation and must never disagree with a re-evaluation
/// of the same bits.
struct Genome {
    std::vector<std::uint8_t> bits;
    std::optional<double> fitness;

    Genome() = default;
    explicit Genome(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

    std::size_t length() const { return bits.size(); }
    bool evaluated() const { return fitness.has_value(); }
};

/// Ordered multiset of genomes, all of one length.
struct Population {
    std::vector<Genome> members;

    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }
};

/// Evaluation accounting. `evaluations` counts completed fitness
/// computations; `flips` counts local-search single-bit probes and is
/// bookkeeping only. Both are monotone within a run.
struct EvalCounter {
    std::uint64_t evaluations = 0;
    std::uint64_t flips = 0;
};

/// Seedable deterministic random source. Same seed, same stream; the
/// engine is a mt19937_64 whose output sequence is pinned by the standard,
/// and the derived draws below avoid platform-dependent distributions.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform bit.
    bool bit() { return (engine_() >> 63) != 0; }

    /// Uniform integer in [0, m). Rejection sampling keeps the draw unbiased.
    std::uint64_t below(std::uint64_t m) {
        if (m == 0) throw std::invalid_argument("RandomSource::below: m must be positive");
        const std::uint64_t threshold = (-m) % m;  // 2^64 mod m
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % m;
        }
    }

    /// Uniform real in [0, 1) with 53 random mantissa bits.
    double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Black-box maximization problem over {0,1}^n. `evaluate` must be
/// deterministic and total; when `known_optimum` is present no genome's
/// fitness may exceed it. A problem may carry a repair step (local search)
/// applied before evaluation.
class Problem {
public:
    virtual ~Problem() = default;

    virtual std::size_t size() const = 0;
    virtual double evaluate(std::span<const std::uint8_t> bits) const = 0;
    virtual std::optional<double> known_optimum() const { return std::nullopt; }
    virtual std::string name() const = 0;

    virtual bool has_repair() const { return false; }
    /// In-place improvement of `bits`; returns the fitness of the repaired
    /// bits. Implementations count probe flips in `counter.flips` and must
    /// not touch `counter.evaluations`.
    virtual double repair(std::vector<std::uint8_t>& bits, EvalCounter& counter) const {
        (void)bits;
        (void)counter;
        throw std::logic_error("Problem::repair: no repair step defined");
    }
};

/// Result of one complete run (fixed population size or parameter-less).
struct RunResult {
    bool success = false;
    std::uint64_t evaluations = 0;
    std::uint64_t flips = 0;
    double best_fitness = -std::numeric_limits<double>::infinity();
    std::uint64_t generations = 0;  // fixed runs: generations; parameter-less: schedule steps
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    int max_population_index = -1;  // parameter-less runs only
    std::string stop_reason;        // "optimum", "max-generations", "budget" or "exhausted"
    Genome best_genome;
};

/// Absolute tolerance used when comparing a fitness against a known optimum.
inline constexpr double kOptimumTolerance = 1e-9;

inline bool reaches_optimum(double fitness, double optimum) {
    return fitness >= optimum - kOptimumTolerance;
}

/// Evaluate one genome, applying the problem's repair step first when
/// present (Lamarckian: improved bits are written back). Counts exactly one
/// evaluation regardless of how many probes the repair used.
inline Genome& evaluate(Genome& genome, const Problem& problem, EvalCounter& counter) {
    if (genome.length() != problem.size())
        throw std::invalid_argument("evaluate: genome length does not match problem size");
    if (problem.has_repair()) {
        genome.fitness = problem.repair(genome.bits, counter);
    } else {
        genome.fitness = problem.evaluate(genome.bits);
    }
    ++counter.evaluations;
    return genome;
}

/// Population of `count` genomes with every bit drawn uniformly. Fitness unset.
inline Population random_population(std::size_t n, std::size_t count, RandomSource& rng) {
    if (n < 1) throw std::invalid_argument("random_population: genome length must be positive");
    if (count < 1) throw std::invalid_argument("random_population: population size must be positive");
    Population pop;
    pop.members.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Genome g;
        g.bits.resize(n);
        for (std::size_t j = 0; j < n; ++j) g.bits[j] = rng.bit() ? 1 : 0;
        pop.members.push_back(std::move(g));
    }
    return pop;
}

inline std::size_t hamming_distance(const Genome& a, const Genome& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) d += a.bits[i] != b.bits[i];
    return d;
}

}  // namespace hboa
