#include <catch2/catch_amalgamated.hpp>

#include "hboa/hboa.hpp"
#include "hboa/problems.hpp"

using namespace hboa;

namespace {

Population evaluated_population(const Problem& problem, std::size_t count, RandomSource& rng,
                                EvalCounter& counter) {
    Population pop = random_population(problem.size(), count, rng);
    for (Genome& g : pop.members) evaluate(g, problem, counter);
    return pop;
}

Genome make_genome(std::initializer_list<std::uint8_t> bits, double fitness) {
    Genome g;
    g.bits = bits;
    g.fitness = fitness;
    return g;
}

double best_of(const Population& pop) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Genome& g : pop.members) best = std::max(best, *g.fitness);
    return best;
}

}  // namespace

TEST_CASE("tournament selection validates its inputs") {
    Population pop;
    RandomSource rng(1);
    REQUIRE_THROWS_AS(tournament_select(pop, 5, 2, rng), std::invalid_argument);
    pop.members.push_back(make_genome({0, 1}, 1.0));
    REQUIRE_THROWS_AS(tournament_select(pop, 0, 2, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(tournament_select(pop, 5, 1, rng), std::invalid_argument);
    pop.members.push_back(Genome{{0, 0}});
    REQUIRE_THROWS_AS(tournament_select(pop, 5, 2, rng), std::logic_error);
}

TEST_CASE("binary tournament on a two-member population selects the fitter 3/4 of the time") {
    Population pop;
    pop.members.push_back(make_genome({0}, 0.0));
    pop.members.push_back(make_genome({1}, 1.0));
    RandomSource rng(21);
    const Population sel = tournament_select(pop, 20000, 2, rng);
    std::size_t fitter = 0;
    for (const Genome& g : sel.members) fitter += *g.fitness == 1.0;
    const double frac = static_cast<double>(fitter) / 20000.0;
    REQUIRE(std::abs(frac - 0.75) < 0.015);
}

TEST_CASE("s-ary tournament hit rate matches 1 - (3/4)^s") {
    Population pop;
    pop.members.push_back(make_genome({0, 0}, 0.0));
    pop.members.push_back(make_genome({0, 1}, 0.0));
    pop.members.push_back(make_genome({1, 0}, 0.0));
    pop.members.push_back(make_genome({1, 1}, 1.0));
    RandomSource rng(22);
    const Population sel = tournament_select(pop, 20000, 4, rng);
    std::size_t fitter = 0;
    for (const Genome& g : sel.members) fitter += *g.fitness == 1.0;
    const double frac = static_cast<double>(fitter) / 20000.0;
    REQUIRE(std::abs(frac - 0.68359375) < 0.015);
}

TEST_CASE("tournament selection is deterministic for a fixed seed") {
    OneMaxProblem problem(8);
    RandomSource init(3);
    EvalCounter counter;
    const Population pop = evaluated_population(problem, 20, init, counter);
    RandomSource r1(4);
    RandomSource r2(4);
    const Population a = tournament_select(pop, 20, 2, r1);
    const Population b = tournament_select(pop, 20, 2, r2);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a.members[i].bits == b.members[i].bits);
}

TEST_CASE("rtr window size rule") {
    HboaConfig cfg;
    REQUIRE(rtr_window_size(cfg, 20, 300) == 15);
    REQUIRE(rtr_window_size(cfg, 5, 300) == 5);
    REQUIRE(rtr_window_size(cfg, 20, 10) == 1);
    cfg.rtr_window = 7;
    REQUIRE(rtr_window_size(cfg, 20, 300) == 7);
}

TEST_CASE("rtr replaces the nearest window member only when strictly fitter") {
    RandomSource rng(5);

    SECTION("fitter offspring replaces its nearest neighbor") {
        Population pop;
        pop.members.push_back(make_genome({0, 0, 0, 0}, 1.0));
        pop.members.push_back(make_genome({1, 1, 0, 0}, 2.0));
        pop.members.push_back(make_genome({1, 1, 1, 1}, 3.0));
        pop.members.push_back(make_genome({0, 0, 1, 1}, 2.0));
        Population offspring;
        offspring.members.push_back(make_genome({1, 1, 1, 0}, 2.5));

        std::vector<RtrDecision> decisions;
        std::vector<std::vector<std::uint32_t>> windows;
        rtr_incorporate(pop, offspring, 4, rng, [&](const Population&, const Genome&, const RtrDecision& d) {
            decisions.push_back(d);
            windows.emplace_back(d.window.begin(), d.window.end());
        });
        REQUIRE(decisions.size() == 1);
        // distance 1 to members 1 and 2; member 2 is fitter than the child,
        // member 1 is the lowest tied index and loses
        REQUIRE(decisions[0].chosen == 1);
        REQUIRE(decisions[0].replaced);
        REQUIRE(windows[0].size() == 4);
        REQUIRE(pop.members[1].bits == std::vector<std::uint8_t>{1, 1, 1, 0});
        REQUIRE(pop.members[1].fitness == 2.5);
    }

    SECTION("weaker offspring is discarded") {
        Population pop;
        pop.members.push_back(make_genome({0, 0, 0, 0}, 1.0));
        pop.members.push_back(make_genome({1, 1, 1, 1}, 3.0));
        Population offspring;
        offspring.members.push_back(make_genome({1, 1, 1, 1}, 2.0));
        rtr_incorporate(pop, offspring, 2, rng);
        REQUIRE(pop.members[1].fitness == 3.0);
        REQUIRE(pop.members[0].fitness == 1.0);
    }

    SECTION("equal fitness does not replace") {
        Population pop;
        pop.members.push_back(make_genome({0, 0, 0, 0}, 1.0));
        Population offspring;
        offspring.members.push_back(make_genome({1, 0, 0, 0}, 1.0));
        rtr_incorporate(pop, offspring, 1, rng);
        REQUIRE(pop.members[0].bits == std::vector<std::uint8_t>{0, 0, 0, 0});
    }
}

TEST_CASE("rtr validates window and evaluation state") {
    RandomSource rng(6);
    Population pop;
    pop.members.push_back(make_genome({1}, 1.0));
    Population offspring;
    offspring.members.push_back(make_genome({0}, 0.5));
    REQUIRE_THROWS_AS(rtr_incorporate(pop, offspring, 0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(rtr_incorporate(pop, offspring, 2, rng), std::invalid_argument);
    Population bad;
    bad.members.push_back(Genome{{1}});
    REQUIRE_THROWS_AS(rtr_incorporate(pop, bad, 1, rng), std::logic_error);
}

TEST_CASE("rtr decisions are minimal over their windows") {
    OneMaxProblem problem(12);
    RandomSource rng(8);
    EvalCounter counter;
    Population pop = evaluated_population(problem, 30, rng, counter);
    Population offspring = evaluated_population(problem, 200, rng, counter);

    const double best_before = best_of(pop);
    std::size_t checked = 0;
    const RtrObserver verify = [&](const Population& p, const Genome& child, const RtrDecision& d) {
        REQUIRE(d.window.size() == 5);
        std::vector<std::uint32_t> seen(d.window.begin(), d.window.end());
        std::sort(seen.begin(), seen.end());
        REQUIRE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());

        std::size_t min_dist = hamming_distance(child, p.members[d.window[0]]);
        std::uint32_t want = d.window[0];
        for (const std::uint32_t idx : d.window) {
            const std::size_t dist = hamming_distance(child, p.members[idx]);
            if (dist < min_dist || (dist == min_dist && idx < want)) {
                min_dist = dist;
                want = idx;
            }
        }
        REQUIRE(d.chosen == want);
        REQUIRE(d.replaced == (*child.fitness > *p.members[want].fitness));
        ++checked;
    };
    rtr_incorporate(pop, offspring, 5, rng, verify);
    REQUIRE(checked == 200);
    REQUIRE(pop.size() == 30);
    REQUIRE(best_of(pop) >= best_before);
}

TEST_CASE("run_generation evaluates exactly the offspring and never loses the best") {
    Dec3Problem problem(6);
    RandomSource rng(11);
    EvalCounter counter;
    Population pop = evaluated_population(problem, 60, rng, counter);
    REQUIRE(counter.evaluations == 60);

    HboaConfig cfg;
    double best = best_of(pop);
    for (std::uint64_t gen = 1; gen <= 10; ++gen) {
        const GenerationStats st = run_generation(pop, cfg, problem, rng, counter, gen);
        REQUIRE(counter.evaluations == 60 + gen * 60);
        REQUIRE(st.generation == gen);
        REQUIRE(st.evaluations == counter.evaluations);
        REQUIRE(best_of(pop) >= best);
        best = best_of(pop);
        REQUIRE(st.best == best);
    }
}

TEST_CASE("offspring fraction scales the per-generation evaluations") {
    OneMaxProblem problem(8);
    RandomSource rng(13);
    EvalCounter counter;
    Population pop = evaluated_population(problem, 40, rng, counter);
    HboaConfig cfg;
    cfg.offspring_fraction = 0.5;
    run_generation(pop, cfg, problem, rng, counter);
    REQUIRE(counter.evaluations == 40 + 20);
    REQUIRE(pop.size() == 40);

    cfg.offspring_fraction = 0.0;
    REQUIRE_THROWS_AS(run_generation(pop, cfg, problem, rng, counter), std::invalid_argument);
    cfg.offspring_fraction = 1.5;
    REQUIRE_THROWS_AS(run_generation(pop, cfg, problem, rng, counter), std::invalid_argument);
}

TEST_CASE("run_fixed solves onemax within the generation cap") {
    OneMaxProblem problem(5);
    for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const RunResult r = run_fixed(problem, 50, HboaConfig{}, seed);
        REQUIRE(r.success);
        REQUIRE(r.stop_reason == "optimum");
        REQUIRE(r.best_fitness == 5.0);
        REQUIRE(r.evaluations <= 300);  // 50 init + at most 5 generations of 50
        REQUIRE(r.seed == seed);
        REQUIRE(r.best_genome.bits == std::vector<std::uint8_t>(5, 1));
    }
}

TEST_CASE("run_fixed is bit-exact replayable") {
    Dec3Problem problem(9);
    const RunResult a = run_fixed(problem, 80, HboaConfig{}, 12345);
    const RunResult b = run_fixed(problem, 80, HboaConfig{}, 12345);
    REQUIRE(a.success == b.success);
    REQUIRE(a.evaluations == b.evaluations);
    REQUIRE(a.generations == b.generations);
    REQUIRE(a.best_fitness == b.best_fitness);
    REQUIRE(a.best_genome.bits == b.best_genome.bits);
}

TEST_CASE("run_fixed without an optimum stops at the generation cap") {
    class Flat final : public Problem {
    public:
        std::size_t size() const override { return 6; }
        std::string name() const override { return "flat"; }
        double evaluate(std::span<const std::uint8_t>) const override { return 0.0; }
    };
    Flat problem;
    HboaConfig cfg;
    cfg.max_generations = 3;
    const RunResult r = run_fixed(problem, 10, cfg, 5);
    REQUIRE_FALSE(r.success);
    REQUIRE(r.generations == 3);
    REQUIRE(r.stop_reason == "max-generations");
    REQUIRE(r.evaluations == 10 + 3 * 10);
}

TEST_CASE("run_fixed validates the population size") {
    OneMaxProblem problem(4);
    REQUIRE_THROWS_AS(run_fixed(problem, 1, HboaConfig{}, 1), std::invalid_argument);
}

TEST_CASE("generation observer sees every generation in order") {
    OneMaxProblem problem(10);
    std::vector<std::uint64_t> gens;
    const RunResult r = run_fixed(problem, 30, HboaConfig{}, 9,
                                  [&](const GenerationStats& st) { gens.push_back(st.generation); });
    REQUIRE(gens.size() == r.generations);
    for (std::size_t i = 0; i < gens.size(); ++i) REQUIRE(gens[i] == i + 1);
}
