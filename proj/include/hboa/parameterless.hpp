// parameterless.hpp: the population-doubling scheme that removes the
// population-size parameter: a ladder of populations N0 * 2^i simulated in
// an interleaved order (k generations of each population per one generation
// of the next larger), with per-population termination rules.
#pragma once

#include "hboa/hboa.hpp"

namespace hboa {

struct PlConfig {
    /// Generations a population runs for each generation of the next larger.
    int generations_per_level = 2;
    std::size_t base_population = 10;
    HboaConfig hboa;
    /// Disable to get the bare interleaving schedule (no population ever
    /// terminates); used to study the pacing in isolation.
    bool termination_checks = true;
};

enum class TerminationKind { kNone, kConverged, kDominated, kGenerationCap };

struct TerminationInfo {
    TerminationKind kind = TerminationKind::kNone;
    /// Index of the larger population whose average beat ours (kDominated).
    int dominated_by = -1;
    double own_average = 0.0;
    double other_average = 0.0;
};

struct PopulationEntry {
    Population pop;
    std::size_t target_size = 0;
    std::uint64_t generation = 0;
    /// Evaluations spent by this population's generations; initialization is
    /// tracked separately so pacing comparisons are per-generation work only.
    std::uint64_t generation_evaluations = 0;
    std::uint64_t initialization_evaluations = 0;
    double average = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    TerminationInfo termination;

    bool active() const { return termination.kind == TerminationKind::kNone; }
};

struct ScheduleState {
    std::vector<PopulationEntry> entries;
    std::size_t cursor = 0;
    std::uint64_t steps = 0;
};

struct StepRecord {
    std::uint64_t step = 0;
    std::size_t pop_index = 0;
    std::size_t pop_size = 0;
    std::uint64_t generation = 0;
    double best = 0.0;
    double average = 0.0;
    std::uint64_t evaluations = 0;  // cumulative, all populations
    TerminationKind termination = TerminationKind::kNone;
};
using StepObserver = std::function<void(const StepRecord&)>;

namespace detail {

inline void refresh_entry_stats(PopulationEntry& e) {
    double sum = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const Genome& g : e.pop.members) {
        sum += *g.fitness;
        best = std::max(best, *g.fitness);
    }
    e.average = e.pop.empty() ? 0.0 : sum / static_cast<double>(e.pop.size());
    e.best = best;
}

inline void validate_pl_config(const PlConfig& cfg) {
    if (cfg.generations_per_level < 1)
        throw std::invalid_argument("parameterless: generations per level must be at least 1");
    if (cfg.base_population < 1)
        throw std::invalid_argument("parameterless: base population must be at least 1");
}

inline PopulationEntry& create_entry(ScheduleState& st, const PlConfig& cfg, const Problem& problem,
                                     RandomSource& rng, EvalCounter& counter) {
    const std::size_t level = st.entries.size();
    if (level >= 50) throw std::runtime_error("parameterless: population ladder exceeds representable sizes");
    PopulationEntry e;
    e.target_size = cfg.base_population << level;
    e.pop = random_population(problem.size(), e.target_size, rng);
    for (Genome& g : e.pop.members) evaluate(g, problem, counter);
    e.initialization_evaluations = e.target_size;
    refresh_entry_stats(e);
    st.entries.push_back(std::move(e));
    return st.entries.back();
}

}  // namespace detail

inline bool population_converged(const Population& pop) {
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop.members[i].bits != pop.members[0].bits) return false;
    return true;
}

/// Apply the termination rules to one population, in order: converged (all
/// members identical), dominated (some larger population has strictly
/// greater average fitness), generation cap. Returns true if it terminated.
inline bool check_termination(ScheduleState& st, std::size_t index, std::size_t max_generations) {
    PopulationEntry& e = st.entries[index];
    if (!e.active()) return true;
    if (population_converged(e.pop)) {
        e.termination.kind = TerminationKind::kConverged;
        return true;
    }
    for (std::size_t j = index + 1; j < st.entries.size(); ++j) {
        const PopulationEntry& other = st.entries[j];
        if (other.average > e.average) {
            e.termination = {TerminationKind::kDominated, static_cast<int>(j), e.average, other.average};
            return true;
        }
    }
    if (max_generations > 0 && e.generation >= max_generations) {
        e.termination.kind = TerminationKind::kGenerationCap;
        return true;
    }
    return false;
}

namespace detail {

inline std::size_t smallest_active(const ScheduleState& st) {
    for (std::size_t j = 0; j < st.entries.size(); ++j)
        if (st.entries[j].active()) return j;
    return st.entries.size();
}

inline std::size_t next_active_or_new(const ScheduleState& st, std::size_t index) {
    for (std::size_t j = index + 1; j < st.entries.size(); ++j)
        if (st.entries[j].active()) return j;
    return st.entries.size();
}

}  // namespace detail

/// One schedule step: simulate one generation of the population under the
/// cursor (creating and initializing it first if it does not exist yet),
/// apply terminations, then move the cursor. After k consecutive generations
/// the cursor advances to the next larger active (or brand new) population;
/// otherwise it resets to the smallest active one. Terminated populations
/// are never simulated again.
inline StepRecord schedule_step(ScheduleState& st, const PlConfig& cfg, const Problem& problem,
                                RandomSource& rng, EvalCounter& counter,
                                const RtrObserver& rtr_observer = {}) {
    detail::validate_pl_config(cfg);
    const std::size_t i = st.cursor;
    if (i > st.entries.size())
        throw std::logic_error("schedule_step: cursor beyond the next new population");
    if (i == st.entries.size()) detail::create_entry(st, cfg, problem, rng, counter);

    PopulationEntry& e = st.entries[i];
    if (!e.active()) throw std::logic_error("schedule_step: cursor on a terminated population");
    const std::uint64_t before = counter.evaluations;
    ++e.generation;
    run_generation(e.pop, cfg.hboa, problem, rng, counter, e.generation, rtr_observer);
    e.generation_evaluations += counter.evaluations - before;
    detail::refresh_entry_stats(e);
    ++st.steps;

    if (cfg.termination_checks) {
        const std::size_t max_gen = cfg.hboa.max_generations ? cfg.hboa.max_generations : problem.size();
        check_termination(st, i, max_gen);
        // this population's average rose; smaller ones may now be dominated
        for (std::size_t j = 0; j < i; ++j)
            if (st.entries[j].active()) check_termination(st, j, max_gen);
    }

    const auto k = static_cast<std::uint64_t>(cfg.generations_per_level);
    st.cursor = (e.generation % k == 0) ? detail::next_active_or_new(st, i) : detail::smallest_active(st);

    StepRecord rec;
    rec.step = st.steps;
    rec.pop_index = i;
    rec.pop_size = e.target_size;
    rec.generation = e.generation;
    rec.best = e.best;
    rec.average = e.average;
    rec.evaluations = counter.evaluations;
    rec.termination = e.termination.kind;
    return rec;
}

/// Complete parameter-less run: start with the base population, keep
/// stepping the schedule until the known optimum is reached or the
/// evaluation budget does not allow another step. budget 0 means unlimited.
inline RunResult run_parameterless(const Problem& problem, const PlConfig& cfg, std::uint64_t seed,
                                   std::uint64_t budget = 0, const StepObserver& observer = {}) {
    detail::validate_pl_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    RandomSource rng(seed);
    EvalCounter counter;
    RunResult result;
    result.seed = seed;
    const std::optional<double> optimum = problem.known_optimum();
    const std::uint64_t limit = budget ? budget : std::numeric_limits<std::uint64_t>::max();

    ScheduleState st;
    const auto note_best = [&](const PopulationEntry& e) {
        if (e.best <= result.best_fitness) return;
        for (const Genome& g : e.pop.members) {
            if (*g.fitness > result.best_fitness) {
                result.best_fitness = *g.fitness;
                result.best_genome = g;
            }
        }
    };
    const auto succeeded = [&]() { return optimum && reaches_optimum(result.best_fitness, *optimum); };

    // initialize the base population up front so a lucky random member
    // finishes the run before any model is built
    note_best(detail::create_entry(st, cfg, problem, rng, counter));

    while (!succeeded() && counter.evaluations < limit) {
        const StepRecord rec = schedule_step(st, cfg, problem, rng, counter);
        note_best(st.entries[rec.pop_index]);
        if (observer) observer(rec);
    }

    result.generations = st.steps;
    result.evaluations = counter.evaluations;
    result.flips = counter.flips;
    result.success = succeeded();
    result.max_population_index = static_cast<int>(st.entries.size()) - 1;
    if (result.success) {
        result.stop_reason = "optimum";
    } else {
        bool all_terminated = true;
        for (const PopulationEntry& e : st.entries)
            if (e.active()) all_terminated = false;
        result.stop_reason = all_terminated ? "exhausted" : "budget";
    }
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace hboa
