// problems.hpp: benchmark problems: onemax, order-3 deceptive functions,
// hierarchical traps, 2D ±J spin glasses; deterministic best-improvement
// local search; spin-glass instance generation and file I/O.
#pragma once

#include "hboa/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hboa {

// ---------------------------------------------------------------------------
// onemax

class OneMaxProblem final : public Problem {
public:
    explicit OneMaxProblem(std::size_t n) : n_(n) {
        if (n < 1) throw std::invalid_argument("onemax: size must be positive");
    }

    std::size_t size() const override { return n_; }
    std::string name() const override { return "onemax"; }
    std::optional<double> known_optimum() const override { return static_cast<double>(n_); }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        if (bits.size() != n_) throw std::invalid_argument("onemax: wrong genome length");
        std::size_t u = 0;
        for (auto b : bits) u += b;
        return static_cast<double>(u);
    }

private:
    std::size_t n_;
};

// ---------------------------------------------------------------------------
// order-3 deceptive function, consecutive non-overlapping triples

class Dec3Problem final : public Problem {
public:
    explicit Dec3Problem(std::size_t n) : n_(n) {
        if (n < 3 || n % 3 != 0)
            throw std::invalid_argument("dec3: size must be a positive multiple of 3");
    }

    std::size_t size() const override { return n_; }
    std::string name() const override { return "dec3"; }
    std::optional<double> known_optimum() const override { return static_cast<double>(n_ / 3); }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        if (bits.size() != n_) throw std::invalid_argument("dec3: wrong genome length");
        double total = 0.0;
        for (std::size_t g = 0; g < n_; g += 3) {
            const int u = bits[g] + bits[g + 1] + bits[g + 2];
            total += triple_value(u);
        }
        return total;
    }

    /// u ones in a triple: 3 -> 1, 2 -> 0, 1 -> 0.8, 0 -> 0.9.
    static double triple_value(int u) {
        switch (u) {
            case 3: return 1.0;
            case 2: return 0.0;
            case 1: return 0.8;
            default: return 0.9;
        }
    }

private:
    std::size_t n_;
};

// ---------------------------------------------------------------------------
// order-3 hierarchical trap, n = 3^L

class HTrapProblem final : public Problem {
public:
    explicit HTrapProblem(std::size_t n) : n_(n) {
        std::size_t m = n;
        levels_ = 0;
        while (m >= 3 && m % 3 == 0) {
            m /= 3;
            ++levels_;
        }
        if (m != 1 || levels_ < 1)
            throw std::invalid_argument("htrap: size must be an integer power of 3");
    }

    std::size_t size() const override { return n_; }
    std::size_t levels() const { return levels_; }
    std::string name() const override { return "htrap"; }

    /// Every level contributes n/3 at the all-ones string.
    std::optional<double> known_optimum() const override {
        return static_cast<double>(levels_) * static_cast<double>(n_ / 3);
    }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        if (bits.size() != n_) throw std::invalid_argument("htrap: wrong genome length");
        // symbols: 0, 1, or null (unresolved triple)
        constexpr std::uint8_t kNull = 2;
        std::vector<std::uint8_t> cur(bits.begin(), bits.end());
        double total = 0.0;
        double weight = 1.0;
        while (cur.size() >= 3) {
            const bool top = cur.size() == 3;
            const double f_lo = top ? 0.9 : 1.0;
            const double f_hi = 1.0;
            double level = 0.0;
            std::vector<std::uint8_t> next;
            next.reserve(cur.size() / 3);
            for (std::size_t g = 0; g + 2 < cur.size(); g += 3) {
                const std::uint8_t a = cur[g], b = cur[g + 1], c = cur[g + 2];
                if (a == kNull || b == kNull || c == kNull) {
                    next.push_back(kNull);  // null groups contribute nothing
                    continue;
                }
                const int u = a + b + c;
                level += basis(u, f_lo, f_hi);
                next.push_back(u == 3 ? 1 : (u == 0 ? 0 : kNull));
            }
            total += weight * level;
            weight *= 3.0;
            if (top) break;
            cur = std::move(next);
        }
        return total;
    }

    /// Trap basis over a triple: f_hi at u=3, otherwise f_lo scaled down
    /// linearly so that u=0 scores f_lo and u=2 scores 0.
    static double basis(int u, double f_lo, double f_hi) {
        if (u == 3) return f_hi;
        return f_lo * (1.0 - static_cast<double>(u) / 2.0);
    }

private:
    std::size_t n_;
    std::size_t levels_;
};

// ---------------------------------------------------------------------------
// 2D ±J spin glass on a toroidal grid

/// Couplings of a 2D toroidal ±J spin glass. Each cell owns its right and
/// down edge, 2·L² edges in total. Bit b maps to spin 2b−1.
struct SpinGlassInstance {
    int side = 0;                     // L; n = L * L
    std::vector<std::int8_t> right;   // J between cell i and its right neighbor
    std::vector<std::int8_t> down;    // J between cell i and its down neighbor
    std::uint64_t seed = 0;           // seed recorded at generation time

    std::size_t spins() const { return static_cast<std::size_t>(side) * side; }
    std::size_t edges() const { return 2 * spins(); }

    int right_neighbor(int cell) const {
        const int r = cell / side, c = cell % side;
        return r * side + (c + 1) % side;
    }
    int down_neighbor(int cell) const {
        const int r = cell / side, c = cell % side;
        return ((r + 1) % side) * side + c;
    }
};

inline int spin_of(std::uint8_t bit) { return bit ? 1 : -1; }

/// E(S) = sum over edges of s_i * J_ij * s_j. Exact integer.
inline long long spin_energy(const SpinGlassInstance& inst, std::span<const std::uint8_t> bits) {
    if (bits.size() != inst.spins())
        throw std::invalid_argument("spin_energy: wrong assignment length");
    long long e = 0;
    const int n = static_cast<int>(inst.spins());
    for (int i = 0; i < n; ++i) {
        const int si = spin_of(bits[i]);
        e += static_cast<long long>(si) * inst.right[i] * spin_of(bits[inst.right_neighbor(i)]);
        e += static_cast<long long>(si) * inst.down[i] * spin_of(bits[inst.down_neighbor(i)]);
    }
    return e;
}

/// Each of the 2L² couplings set to +1 or -1 with equal probability.
/// Draw order is cell-major, right edge before down edge.
inline SpinGlassInstance generate_instance(int side, RandomSource& rng) {
    if (side < 3) throw std::invalid_argument("generate_instance: side must be at least 3");
    SpinGlassInstance inst;
    inst.side = side;
    inst.seed = rng.seed();
    const std::size_t n = inst.spins();
    inst.right.resize(n);
    inst.down.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        inst.right[i] = rng.bit() ? 1 : -1;
        inst.down[i] = rng.bit() ? 1 : -1;
    }
    return inst;
}

/// Plain-text instance format, bit-exact:
///   spinglass 2d pm-j
///   L <side>
///   seed <u64>
///   <cell> <neighbor> <+1|-1>     (2L² lines, per cell: right edge, down edge)
inline void write_instance(const SpinGlassInstance& inst, std::ostream& os) {
    os << "spinglass 2d pm-j\n";
    os << "L " << inst.side << "\n";
    os << "seed " << inst.seed << "\n";
    const int n = static_cast<int>(inst.spins());
    for (int i = 0; i < n; ++i) {
        os << i << " " << inst.right_neighbor(i) << " " << (inst.right[i] > 0 ? "+1" : "-1") << "\n";
        os << i << " " << inst.down_neighbor(i) << " " << (inst.down[i] > 0 ? "+1" : "-1") << "\n";
    }
}

inline void write_instance_file(const SpinGlassInstance& inst, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_instance(inst, os);
}

inline SpinGlassInstance read_instance(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "spinglass 2d pm-j")
        throw std::runtime_error("spin glass file: bad header line");
    SpinGlassInstance inst;
    std::string key;
    if (!(is >> key >> inst.side) || key != "L" || inst.side < 3)
        throw std::runtime_error("spin glass file: bad L line");
    if (!(is >> key >> inst.seed) || key != "seed")
        throw std::runtime_error("spin glass file: bad seed line");
    const int n = static_cast<int>(inst.spins());
    inst.right.assign(n, 0);
    inst.down.assign(n, 0);
    std::vector<bool> seen_right(n, false), seen_down(n, false);
    for (std::size_t e = 0; e < inst.edges(); ++e) {
        int cell = 0, nbr = 0, j = 0;
        if (!(is >> cell >> nbr >> j))
            throw std::runtime_error("spin glass file: truncated edge list");
        if (cell < 0 || cell >= n || (j != 1 && j != -1))
            throw std::runtime_error("spin glass file: bad edge line");
        if (nbr == inst.right_neighbor(cell) && !seen_right[cell]) {
            inst.right[cell] = static_cast<std::int8_t>(j);
            seen_right[cell] = true;
        } else if (nbr == inst.down_neighbor(cell) && !seen_down[cell]) {
            inst.down[cell] = static_cast<std::int8_t>(j);
            seen_down[cell] = true;
        } else {
            throw std::runtime_error("spin glass file: unexpected edge " + std::to_string(cell) +
                                     " -> " + std::to_string(nbr));
        }
    }
    return inst;
}

inline SpinGlassInstance read_instance_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open instance file: " + path);
    return read_instance(is);
}

// ---------------------------------------------------------------------------
// deterministic best-improvement local search

/// Repeatedly evaluates all n single-bit flips and applies the one with the
/// largest strict fitness improvement (ties: lowest bit index) until no flip
/// improves. Every probe increments counter.flips; no evaluations are
/// charged. Returns the fitness of the final bits.
inline double local_search(std::vector<std::uint8_t>& bits, const Problem& problem,
                           EvalCounter& counter) {
    const std::size_t n = bits.size();
    double current = problem.evaluate(bits);
    for (;;) {
        double best_gain = 0.0;
        std::size_t best_bit = n;
        for (std::size_t i = 0; i < n; ++i) {
            bits[i] ^= 1;
            const double f = problem.evaluate(bits);
            bits[i] ^= 1;
            ++counter.flips;
            const double gain = f - current;
            if (gain > best_gain) {
                best_gain = gain;
                best_bit = i;
            }
        }
        if (best_bit == n) return current;
        bits[best_bit] ^= 1;
        current += best_gain;
    }
}

/// Wrap any problem with the generic local searcher as its repair step.
class WithLocalSearch final : public Problem {
public:
    explicit WithLocalSearch(const Problem& inner) : inner_(inner) {}

    std::size_t size() const override { return inner_.size(); }
    std::string name() const override { return inner_.name() + "+ls"; }
    std::optional<double> known_optimum() const override { return inner_.known_optimum(); }
    double evaluate(std::span<const std::uint8_t> bits) const override {
        return inner_.evaluate(bits);
    }
    bool has_repair() const override { return true; }
    double repair(std::vector<std::uint8_t>& bits, EvalCounter& counter) const override {
        return local_search(bits, inner_, counter);
    }

private:
    const Problem& inner_;
};

/// Ground-state search posed as maximization: fitness = -E. The repair step
/// is the same best-improvement searcher with flip deltas computed from the
/// local field of each spin instead of full re-evaluations.
class SpinGlassProblem final : public Problem {
public:
    explicit SpinGlassProblem(SpinGlassInstance inst, bool with_local_search = true)
        : inst_(std::move(inst)), local_search_(with_local_search) {}

    std::size_t size() const override { return inst_.spins(); }
    std::string name() const override { return "spinglass"; }
    const SpinGlassInstance& instance() const { return inst_; }

    std::optional<double> known_optimum() const override { return optimum_; }
    /// Ground-state energy from an oracle or a best-known record.
    void set_ground_energy(long long energy) { optimum_ = -static_cast<double>(energy); }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        return -static_cast<double>(spin_energy(inst_, bits));
    }

    bool has_repair() const override { return local_search_; }

    double repair(std::vector<std::uint8_t>& bits, EvalCounter& counter) const override {
        if (bits.size() != inst_.spins())
            throw std::invalid_argument("spin glass repair: wrong assignment length");
        const int n = static_cast<int>(inst_.spins());
        // local field h[i] = sum over the 4 incident edges of J_ij * s_j
        std::vector<int> spin(n), h(n, 0);
        for (int i = 0; i < n; ++i) spin[i] = spin_of(bits[i]);
        long long energy = 0;
        for (int i = 0; i < n; ++i) {
            const int ri = inst_.right_neighbor(i), di = inst_.down_neighbor(i);
            h[i] += inst_.right[i] * spin[ri];
            h[ri] += inst_.right[i] * spin[i];
            h[i] += inst_.down[i] * spin[di];
            h[di] += inst_.down[i] * spin[i];
            energy += static_cast<long long>(spin[i]) * (inst_.right[i] * spin[ri] + inst_.down[i] * spin[di]);
        }
        for (;;) {
            // fitness improvement of flipping spin i is 2 * s_i * h_i
            long long best_gain = 0;
            int best_bit = n;
            for (int i = 0; i < n; ++i) {
                ++counter.flips;
                const long long gain = 2LL * spin[i] * h[i];
                if (gain > best_gain) {
                    best_gain = gain;
                    best_bit = i;
                }
            }
            if (best_bit == n) break;
            const int old = spin[best_bit];
            spin[best_bit] = -old;
            bits[best_bit] ^= 1;
            energy -= best_gain;
            // h of the flipped spin is unchanged; its four neighbors see the flip
            const int ri = inst_.right_neighbor(best_bit), di = inst_.down_neighbor(best_bit);
            const int li = left_neighbor(best_bit), ui = up_neighbor(best_bit);
            h[ri] += -2 * old * inst_.right[best_bit];
            h[di] += -2 * old * inst_.down[best_bit];
            h[li] += -2 * old * inst_.right[li];
            h[ui] += -2 * old * inst_.down[ui];
        }
        return -static_cast<double>(energy);
    }

private:
    int left_neighbor(int cell) const {
        const int L = inst_.side;
        const int r = cell / L, c = cell % L;
        return r * L + (c + L - 1) % L;
    }
    int up_neighbor(int cell) const {
        const int L = inst_.side;
        const int r = cell / L, c = cell % L;
        return ((r + L - 1) % L) * L + c;
    }

    SpinGlassInstance inst_;
    bool local_search_;
    std::optional<double> optimum_;
};

}  // namespace hboa
