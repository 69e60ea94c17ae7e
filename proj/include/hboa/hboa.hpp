// hboa.hpp: one fixed-population-size hierarchical BOA: tournament
// selection, model building and sampling, restricted tournament replacement,
// and the complete fixed-N run driver.
#pragma once

#include "hboa/bayesnet.hpp"
#include "hboa/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>

namespace hboa {

struct HboaConfig {
    int tournament_size = 2;
    double offspring_fraction = 1.0;
    /// RTR window; unset means the min(n, N/20) rule, floor, at least 1.
    std::optional<std::size_t> rtr_window;
    /// 0 means "genome length", resolved per run.
    std::size_t max_generations = 0;
};

inline std::size_t rtr_window_size(const HboaConfig& cfg, std::size_t n, std::size_t pop_size) {
    std::size_t w = cfg.rtr_window ? *cfg.rtr_window : std::min(n, pop_size / 20);
    if (w < 1) w = 1;
    return w;
}

struct GenerationStats {
    std::uint64_t generation = 0;
    double best = 0.0;
    double average = 0.0;
    std::uint64_t evaluations = 0;  // cumulative, after this generation
};

/// Per-decision RTR observer: window member indices, the nearest member
/// chosen, and whether the offspring replaced it.
struct RtrDecision {
    std::span<const std::uint32_t> window;
    std::uint32_t chosen = 0;
    bool replaced = false;
};
using RtrObserver = std::function<void(const Population&, const Genome& offspring, const RtrDecision&)>;

/// `count` winners of independent s-ary tournaments, contestants drawn
/// uniformly with replacement; ties go to the first-drawn contestant.
inline Population tournament_select(const Population& pop, std::size_t count, int s,
                                    RandomSource& rng) {
    if (count < 1) throw std::invalid_argument("tournament_select: count must be positive");
    if (s < 2) throw std::invalid_argument("tournament_select: tournament size must be at least 2");
    if (pop.empty()) throw std::invalid_argument("tournament_select: empty population");
    for (const Genome& g : pop.members)
        if (!g.evaluated()) throw std::logic_error("tournament_select: unevaluated member");
    Population out;
    out.members.reserve(count);
    const std::size_t n = pop.size();
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t winner = static_cast<std::size_t>(rng.below(n));
        for (int c = 1; c < s; ++c) {
            const std::size_t challenger = static_cast<std::size_t>(rng.below(n));
            if (*pop.members[challenger].fitness > *pop.members[winner].fitness)
                winner = challenger;
        }
        out.members.push_back(pop.members[winner]);
    }
    return out;
}

/// Restricted tournament replacement. Each offspring draws w distinct member
/// indices; the drawn member nearest in Hamming distance (ties: lowest
/// index) is replaced iff the offspring is strictly fitter. Population size
/// never changes and its best fitness never decreases.
inline void rtr_incorporate(Population& pop, const Population& offspring, std::size_t w,
                            RandomSource& rng, const RtrObserver& observer = {}) {
    const std::size_t n = pop.size();
    if (w < 1 || w > n) throw std::invalid_argument("rtr_incorporate: window must satisfy 1 <= w <= |pop|");
    for (const Genome& g : pop.members)
        if (!g.evaluated()) throw std::logic_error("rtr_incorporate: unevaluated population member");
    for (const Genome& g : offspring.members)
        if (!g.evaluated()) throw std::logic_error("rtr_incorporate: unevaluated offspring");

    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::vector<std::pair<std::size_t, std::size_t>> swaps;
    swaps.reserve(w);

    for (const Genome& child : offspring.members) {
        // partial Fisher-Yates for w distinct indices, undone afterwards
        swaps.clear();
        for (std::size_t t = 0; t < w; ++t) {
            const std::size_t r = t + static_cast<std::size_t>(rng.below(n - t));
            std::swap(idx[t], idx[r]);
            swaps.emplace_back(t, r);
        }
        std::size_t best_pos = 0;
        std::size_t best_dist = hamming_distance(child, pop.members[idx[0]]);
        std::uint32_t best_index = idx[0];
        for (std::size_t t = 1; t < w; ++t) {
            const std::size_t d = hamming_distance(child, pop.members[idx[t]]);
            if (d < best_dist || (d == best_dist && idx[t] < best_index)) {
                best_dist = d;
                best_pos = t;
                best_index = idx[t];
            }
        }
        (void)best_pos;
        const bool replace = *child.fitness > *pop.members[best_index].fitness;
        if (observer)
            observer(pop, child, RtrDecision{{idx.data(), w}, best_index, replace});
        if (replace) pop.members[best_index] = child;
        for (std::size_t t = swaps.size(); t-- > 0;) std::swap(idx[swaps[t].first], idx[swaps[t].second]);
    }
}

inline GenerationStats population_stats(const Population& pop, std::uint64_t generation,
                                        const EvalCounter& counter) {
    GenerationStats st;
    st.generation = generation;
    st.evaluations = counter.evaluations;
    double sum = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const Genome& g : pop.members) {
        sum += *g.fitness;
        best = std::max(best, *g.fitness);
    }
    st.best = best;
    st.average = pop.empty() ? 0.0 : sum / static_cast<double>(pop.size());
    return st;
}

/// One hBOA generation, in place: select N promising members, learn a model,
/// sample floor(offspring_fraction * N) offspring, evaluate them, and fold
/// them back with RTR.
inline GenerationStats run_generation(Population& pop, const HboaConfig& cfg, const Problem& problem,
                                      RandomSource& rng, EvalCounter& counter,
                                      std::uint64_t generation = 0, const RtrObserver& observer = {}) {
    const std::size_t n = problem.size();
    const std::size_t pop_size = pop.size();
    if (cfg.offspring_fraction <= 0.0 || cfg.offspring_fraction > 1.0)
        throw std::invalid_argument("run_generation: offspring fraction must be in (0, 1]");
    const auto offspring_count =
        static_cast<std::size_t>(std::floor(cfg.offspring_fraction * static_cast<double>(pop_size)));
    if (offspring_count < 1)
        throw std::invalid_argument("run_generation: offspring fraction yields no offspring");

    Population selected = tournament_select(pop, pop_size, cfg.tournament_size, rng);
    const BayesNet model = learn_model(selected);
    Population offspring = sample_model(model, offspring_count, rng);
    for (Genome& g : offspring.members) evaluate(g, problem, counter);
    rtr_incorporate(pop, offspring, rtr_window_size(cfg, n, pop_size), rng, observer);
    return population_stats(pop, generation, counter);
}

using GenerationObserver = std::function<void(const GenerationStats&)>;

/// Complete fixed-population-size run: random initialization, then
/// generations until the known optimum is reached or the generation cap
/// (default: one generation per bit) is exhausted.
inline RunResult run_fixed(const Problem& problem, std::size_t pop_size, const HboaConfig& cfg,
                           std::uint64_t seed, const GenerationObserver& observer = {}) {
    if (pop_size < 2) throw std::invalid_argument("run_fixed: population size must be at least 2");
    const std::size_t max_generations = cfg.max_generations ? cfg.max_generations : problem.size();
    const std::optional<double> optimum = problem.known_optimum();
    if (!optimum && max_generations == 0)
        throw std::invalid_argument("run_fixed: no stopping rule (no optimum and no generation cap)");

    const auto t0 = std::chrono::steady_clock::now();
    RandomSource rng(seed);
    EvalCounter counter;
    RunResult result;
    result.seed = seed;

    Population pop = random_population(problem.size(), pop_size, rng);
    for (Genome& g : pop.members) evaluate(g, problem, counter);

    const auto note_best = [&](const Population& p) {
        for (const Genome& g : p.members) {
            if (*g.fitness > result.best_fitness) {
                result.best_fitness = *g.fitness;
                result.best_genome = g;
            }
        }
    };
    note_best(pop);

    std::uint64_t generation = 0;
    while (!(optimum && reaches_optimum(result.best_fitness, *optimum)) && generation < max_generations) {
        ++generation;
        const GenerationStats st = run_generation(pop, cfg, problem, rng, counter, generation);
        note_best(pop);
        if (observer) observer(st);
    }

    result.generations = generation;
    result.evaluations = counter.evaluations;
    result.flips = counter.flips;
    result.success = optimum && reaches_optimum(result.best_fitness, *optimum);
    result.stop_reason = result.success ? "optimum" : "max-generations";
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace hboa
