#include <catch2/catch_amalgamated.hpp>

#include "hboa/core.hpp"
#include "hboa/problems.hpp"

#include <random>

using namespace hboa;

TEST_CASE("RandomSource is a thin wrapper over the standard 64-bit engine") {
    RandomSource rng(42);
    std::mt19937_64 ref(42);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t raw = ref();
        REQUIRE(rng.bit() == ((raw >> 63) != 0));
    }
    RandomSource rng2(42);
    std::mt19937_64 ref2(42);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t raw = ref2();
        REQUIRE(rng2.real01() == static_cast<double>(raw >> 11) * 0x1.0p-53);
    }
}

TEST_CASE("below draws unbiased values in range") {
    RandomSource rng(7);
    REQUIRE_THROWS_AS(rng.below(0), std::invalid_argument);

    std::vector<int> counts(6, 0);
    for (int i = 0; i < 60000; ++i) {
        const std::uint64_t v = rng.below(6);
        REQUIRE(v < 6);
        ++counts[v];
    }
    for (const int c : counts) {
        REQUIRE(c > 9000);
        REQUIRE(c < 11000);
    }

    RandomSource a(123);
    RandomSource b(123);
    for (int i = 0; i < 100; ++i) REQUIRE(a.below(1000) == b.below(1000));
}

TEST_CASE("real01 stays in the half-open unit interval") {
    RandomSource rng(99);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double r = rng.real01();
        REQUIRE(r >= 0.0);
        REQUIRE(r < 1.0);
        sum += r;
    }
    REQUIRE(std::abs(sum / 100000.0 - 0.5) < 0.01);
}

TEST_CASE("genome and population basics") {
    Genome g;
    g.bits = {1, 0, 1};
    REQUIRE(g.length() == 3);
    REQUIRE_FALSE(g.evaluated());
    g.fitness = 2.0;
    REQUIRE(g.evaluated());

    Population p;
    REQUIRE(p.empty());
    p.members.push_back(g);
    REQUIRE(p.size() == 1);
}

TEST_CASE("evaluate counts exactly one evaluation and checks the length") {
    OneMaxProblem problem(4);
    EvalCounter counter;
    Genome g;
    g.bits = {1, 0, 1, 1};
    evaluate(g, problem, counter);
    REQUIRE(g.fitness == 3.0);
    REQUIRE(counter.evaluations == 1);
    REQUIRE(counter.flips == 0);

    Genome wrong;
    wrong.bits = {1, 0};
    REQUIRE_THROWS_AS(evaluate(wrong, problem, counter), std::invalid_argument);
}

TEST_CASE("repairing problems are Lamarckian and still cost one evaluation") {
    OneMaxProblem inner(3);
    WithLocalSearch problem(inner);
    EvalCounter counter;
    Genome g;
    g.bits = {0, 1, 0};
    evaluate(g, problem, counter);
    REQUIRE(g.bits == std::vector<std::uint8_t>{1, 1, 1});
    REQUIRE(g.fitness == 3.0);
    REQUIRE(counter.evaluations == 1);
    // two improving passes plus the final no-improvement pass, 3 probes each
    REQUIRE(counter.flips == 9);
}

TEST_CASE("plain problems report no repair and refuse repair calls") {
    OneMaxProblem problem(3);
    REQUIRE_FALSE(problem.has_repair());
    std::vector<std::uint8_t> bits{0, 0, 0};
    EvalCounter counter;
    REQUIRE_THROWS_AS(problem.repair(bits, counter), std::logic_error);
}

TEST_CASE("random_population shape, determinism and validation") {
    RandomSource rng(5);
    const Population p = random_population(8, 12, rng);
    REQUIRE(p.size() == 12);
    for (const Genome& g : p.members) {
        REQUIRE(g.length() == 8);
        REQUIRE_FALSE(g.evaluated());
        for (const std::uint8_t b : g.bits) REQUIRE((b == 0 || b == 1));
    }

    RandomSource r1(17);
    RandomSource r2(17);
    const Population a = random_population(6, 4, r1);
    const Population b = random_population(6, 4, r2);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a.members[i].bits == b.members[i].bits);

    RandomSource r3(1);
    REQUIRE_THROWS_AS(random_population(0, 5, r3), std::invalid_argument);
    REQUIRE_THROWS_AS(random_population(5, 0, r3), std::invalid_argument);
}

TEST_CASE("hamming distance") {
    Genome a;
    a.bits = {0, 1, 1, 0};
    Genome b;
    b.bits = {1, 1, 0, 0};
    REQUIRE(hamming_distance(a, b) == 2);
    REQUIRE(hamming_distance(a, a) == 0);
}

TEST_CASE("optimum comparison uses an absolute tolerance") {
    REQUIRE(reaches_optimum(10.0, 10.0));
    REQUIRE(reaches_optimum(10.0 - 0.5e-9, 10.0));
    REQUIRE_FALSE(reaches_optimum(10.0 - 1e-6, 10.0));
    REQUIRE(reaches_optimum(10.0 + 1.0, 10.0));
}
