// harness.hpp: experiment engine: seed derivation, minimal-population
// bisection, scaling experiments with CSV output, the exhaustive spin-glass
// ground-state oracle, best-known-energy bookkeeping, and a power-law fit.
#pragma once

#include "hboa/parameterless.hpp"
#include "hboa/problems.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace hboa {

// ---------------------------------------------------------------------------
// seed derivation

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based seed split: any (tag, a, b, c) tuple gets its own stream,
/// so every individual run is replayable from the master seed alone.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a,
                                 std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t h = mix64(master);
    for (const char ch : tag) h = mix64(h ^ static_cast<unsigned char>(ch));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// ---------------------------------------------------------------------------
// problem families

enum class Family { kDec3, kHTrap, kSpinGlass };

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::kDec3: return "dec3";
        case Family::kHTrap: return "htrap";
        case Family::kSpinGlass: return "spinglass";
    }
    throw std::logic_error("family_name: unknown family");
}

inline std::optional<Family> family_from_name(std::string_view name) {
    if (name == "dec3") return Family::kDec3;
    if (name == "htrap") return Family::kHTrap;
    if (name == "spinglass") return Family::kSpinGlass;
    return std::nullopt;
}

/// For dec3 and htrap `size` is the bit count; for spin glasses it is the
/// lattice side L (the bit count is L^2).
inline void validate_family_size(Family f, std::size_t size) {
    switch (f) {
        case Family::kDec3:
            if (size < 3 || size % 3 != 0)
                throw std::invalid_argument("dec3 size must be a positive multiple of 3");
            return;
        case Family::kHTrap: {
            std::size_t p = 3;
            while (p < size) p *= 3;
            if (size < 3 || p != size) throw std::invalid_argument("htrap size must be a power of 3 (at least 3)");
            return;
        }
        case Family::kSpinGlass:
            if (size < 3) throw std::invalid_argument("spin glass side must be at least 3");
            return;
    }
}

/// Instance-free problems only; spin glasses need a concrete instance.
inline std::unique_ptr<Problem> make_scalar_problem(Family f, std::size_t n) {
    validate_family_size(f, n);
    switch (f) {
        case Family::kDec3: return std::make_unique<Dec3Problem>(n);
        case Family::kHTrap: return std::make_unique<HTrapProblem>(n);
        case Family::kSpinGlass: throw std::invalid_argument("spin glass problems require an instance");
    }
    throw std::logic_error("make_scalar_problem: unknown family");
}

// ---------------------------------------------------------------------------
// parallel run execution

/// Run fn(0..count-1) across up to `threads` workers. Indices are claimed
/// from a shared counter; callers own all per-index state, so results are
/// deterministic as long as they are stored by index.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t workers = threads == 0 ? 1 : threads;
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
                next.store(count);
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// bisection for the minimal population size

struct BisectResult {
    std::size_t n_min = 0;
    std::size_t lo = 0;  // largest size that failed (== n_min when nothing failed)
    std::size_t hi = 0;  // smallest size known to pass; equals n_min
    std::size_t probes = 0;
};

namespace detail {

inline bool probe_population_size(const Problem& problem, const HboaConfig& cfg, std::size_t pop_size,
                                  std::size_t runs, std::uint64_t master_seed, unsigned threads) {
    const std::string tag = std::string(problem.name()) + "/bisect";
    std::vector<std::uint8_t> ok(runs, 0);
    parallel_for(runs, threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(master_seed, tag, problem.size(), i, pop_size);
        ok[i] = run_fixed(problem, pop_size, cfg, seed).success ? 1 : 0;
    });
    for (const std::uint8_t o : ok)
        if (!o) return false;
    return true;
}

}  // namespace detail

/// Minimal population size at which `runs` independent fixed-size runs all
/// reach the optimum: double from 10 until a size passes, then bisect the
/// bracket (midpoints rounded to even, plain integer midpoint when even
/// rounding cannot shrink the bracket) until hi - lo <= lo/10.
inline BisectResult bisect_population_size(const Problem& problem, const HboaConfig& cfg,
                                           std::size_t runs, std::uint64_t master_seed,
                                           std::size_t ceiling = std::size_t{1} << 22,
                                           unsigned threads = 1) {
    if (runs < 1) throw std::invalid_argument("bisect_population_size: runs must be positive");
    if (!problem.known_optimum())
        throw std::invalid_argument("bisect_population_size: problem has no known optimum");

    BisectResult result;
    const auto probe = [&](std::size_t pop_size) {
        ++result.probes;
        return detail::probe_population_size(problem, cfg, pop_size, runs, master_seed, threads);
    };

    std::size_t n = 10;
    if (probe(n)) {
        result.n_min = result.lo = result.hi = n;
        return result;
    }
    std::size_t lo = n;
    std::size_t hi = 0;
    while (true) {
        if (n > ceiling / 2) throw std::runtime_error("unsolvable-at-ceiling: no population size up to the ceiling passed");
        n *= 2;
        if (probe(n)) {
            hi = n;
            break;
        }
        lo = n;
    }

    while (static_cast<double>(hi - lo) > 0.1 * static_cast<double>(lo)) {
        std::size_t mid = ((lo + hi + 2) / 4) * 2;  // nearest even, ties up
        if (mid <= lo || mid >= hi) mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;  // adjacent bounds; bracket cannot shrink
        if (probe(mid))
            hi = mid;
        else
            lo = mid;
    }

    result.n_min = hi;
    result.lo = lo;
    result.hi = hi;
    return result;
}

// ---------------------------------------------------------------------------
// spin-glass ground-state oracle and best-known bookkeeping

struct GroundState {
    long long energy = 0;
    std::vector<std::uint8_t> bits;
};

/// Exact minimum energy by Gray-code enumeration of all assignments with
/// spin 0 fixed to +1 (negating every spin preserves the energy).
inline GroundState brute_force_ground_state(const SpinGlassInstance& instance) {
    const std::size_t m = instance.spins();
    if (m > 26) throw std::invalid_argument("brute_force_ground_state: more than 26 spins");

    std::vector<int> spin(m, 1);
    std::vector<long long> field(m, 0);  // field[i] = sum over neighbors j of J_ij * s_j
    const auto couple = [&](std::size_t a, std::size_t b, int j) {
        field[a] += static_cast<long long>(j) * spin[b];
        field[b] += static_cast<long long>(j) * spin[a];
    };
    for (std::size_t c = 0; c < m; ++c) {
        couple(c, instance.right_neighbor(c), instance.right[c]);
        couple(c, instance.down_neighbor(c), instance.down[c]);
    }
    long long energy = 0;
    for (std::size_t c = 0; c < m; ++c) energy += spin[c] * field[c];
    energy /= 2;  // every edge counted from both ends

    GroundState best;
    best.energy = energy;
    best.bits.assign(m, 1);  // spin +1 encodes as bit 1

    const auto record = [&](long long e) {
        if (e >= best.energy) return;
        best.energy = e;
        for (std::size_t c = 0; c < m; ++c) best.bits[c] = spin[c] > 0 ? 1 : 0;
    };

    const std::uint64_t total = std::uint64_t{1} << (m - 1);
    for (std::uint64_t x = 1; x < total; ++x) {
        const std::size_t i = static_cast<std::size_t>(std::countr_zero(x)) + 1;  // spin 0 stays fixed
        energy -= 2LL * spin[i] * field[i];
        const int delta = -2 * spin[i];
        spin[i] = -spin[i];
        field[instance.right_neighbor(i)] += static_cast<long long>(instance.right[i]) * delta;
        field[instance.down_neighbor(i)] += static_cast<long long>(instance.down[i]) * delta;
        const std::size_t li = (i % instance.side == 0) ? i + instance.side - 1 : i - 1;
        const std::size_t ui = (i < static_cast<std::size_t>(instance.side)) ? i + m - instance.side : i - instance.side;
        field[li] += static_cast<long long>(instance.right[li]) * delta;
        field[ui] += static_cast<long long>(instance.down[ui]) * delta;
        record(energy);
    }
    return best;
}

inline std::filesystem::path best_known_path(const std::filesystem::path& dir, int side,
                                             std::uint64_t instance_seed) {
    return dir / ("sg_L" + std::to_string(side) + "_seed" + std::to_string(instance_seed) + ".best");
}

inline std::optional<long long> read_best_known(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) return std::nullopt;
    long long e = 0;
    if (!(in >> e)) throw std::runtime_error("best-known file is not a single integer: " + file.string());
    return e;
}

inline void write_best_known(const std::filesystem::path& file, long long energy) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write best-known file: " + file.string());
    out << energy << "\n";
}

/// Records `energy` if it beats (is lower than) the stored value or the file
/// does not exist yet. Returns true when the file was (re)written.
inline bool update_best_known(const std::filesystem::path& file, long long energy) {
    const std::optional<long long> current = read_best_known(file);
    if (current && *current <= energy) return false;
    write_best_known(file, energy);
    return true;
}

// ---------------------------------------------------------------------------
// experiment records and CSV

/// Round to 6 significant digits, matching the CSV text exactly so written
/// files re-read field-for-field equal.
inline double round_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

struct ExperimentRecord {
    std::string problem;
    std::size_t n = 0;  // bit count (L^2 for spin glasses)
    std::string mode;   // "pl" or "fixed-bisected"
    std::size_t runs = 0;
    std::size_t successes = 0;
    double mean_evals = 0.0;  // over successful runs, 6 significant digits
    double std_evals = 0.0;
    std::optional<std::size_t> nmin;  // fixed-bisected only
    std::uint64_t master_seed = 0;

    bool operator==(const ExperimentRecord&) const = default;
};

inline constexpr std::string_view kCsvHeader = "problem,n,mode,runs,successes,mean_evals,std_evals,nmin,master_seed";

inline std::string csv_row(const ExperimentRecord& r) {
    char mean[64];
    char sd[64];
    std::snprintf(mean, sizeof mean, "%.6g", r.mean_evals);
    std::snprintf(sd, sizeof sd, "%.6g", r.std_evals);
    std::ostringstream out;
    out << r.problem << ',' << r.n << ',' << r.mode << ',' << r.runs << ',' << r.successes << ','
        << mean << ',' << sd << ',';
    if (r.nmin) out << *r.nmin;
    out << ',' << r.master_seed;
    return out.str();
}

inline void write_csv(const std::filesystem::path& file, const std::vector<ExperimentRecord>& records) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write CSV file: " + file.string());
    out << kCsvHeader << "\n";
    for (const ExperimentRecord& r : records) out << csv_row(r) << "\n";
}

inline std::vector<ExperimentRecord> read_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read CSV file: " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("unexpected CSV header in " + file.string());
    std::vector<ExperimentRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 9) throw std::runtime_error("malformed CSV row in " + file.string());
        ExperimentRecord r;
        r.problem = fields[0];
        r.n = std::stoull(fields[1]);
        r.mode = fields[2];
        r.runs = std::stoull(fields[3]);
        r.successes = std::stoull(fields[4]);
        r.mean_evals = std::strtod(fields[5].c_str(), nullptr);
        r.std_evals = std::strtod(fields[6].c_str(), nullptr);
        if (!fields[7].empty()) r.nmin = std::stoull(fields[7]);
        r.master_seed = std::stoull(fields[8]);
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// experiments

struct ExperimentOptions {
    std::size_t runs = 100;
    std::string mode = "pl";  // "pl" or "fixed-bisected"
    std::uint64_t master_seed = 1;
    std::uint64_t budget = 100'000'000;
    std::size_t bisect_runs = 30;
    std::size_t bisect_ceiling = std::size_t{1} << 22;
    unsigned threads = std::thread::hardware_concurrency();
    PlConfig pl;
    /// Ground truths for spin glasses too large for the oracle; required for
    /// side > 5 and ignored otherwise.
    std::optional<std::filesystem::path> best_known_dir;
};

namespace detail {

struct RunOutcome {
    bool success = false;
    std::uint64_t evaluations = 0;
    double best_fitness = 0.0;
};

inline ExperimentRecord summarize(std::string problem, std::size_t n, const ExperimentOptions& opt,
                                  const std::vector<RunOutcome>& outcomes,
                                  std::optional<std::size_t> nmin) {
    ExperimentRecord r;
    r.problem = std::move(problem);
    r.n = n;
    r.mode = opt.mode;
    r.runs = outcomes.size();
    r.master_seed = opt.master_seed;
    r.nmin = nmin;
    double sum = 0.0;
    for (const RunOutcome& o : outcomes) {
        if (!o.success) continue;
        ++r.successes;
        sum += static_cast<double>(o.evaluations);
    }
    if (r.successes > 0) {
        const double mean = sum / static_cast<double>(r.successes);
        double ss = 0.0;
        for (const RunOutcome& o : outcomes) {
            if (!o.success) continue;
            const double d = static_cast<double>(o.evaluations) - mean;
            ss += d * d;
        }
        r.mean_evals = round_sig6(mean);
        r.std_evals = round_sig6(std::sqrt(ss / static_cast<double>(r.successes)));
    }
    return r;
}

inline ExperimentRecord run_scalar_experiment(Family family, std::size_t n, const ExperimentOptions& opt) {
    const std::unique_ptr<Problem> problem = make_scalar_problem(family, n);
    const std::string name(problem->name());
    std::vector<RunOutcome> outcomes(opt.runs);
    std::optional<std::size_t> nmin;

    if (opt.mode == "pl") {
        const std::string tag = name + "/pl";
        parallel_for(opt.runs, opt.threads, [&](std::size_t i) {
            const std::uint64_t seed = derive_seed(opt.master_seed, tag, n, i);
            const RunResult rr = run_parameterless(*problem, opt.pl, seed, opt.budget);
            outcomes[i] = {rr.success, rr.evaluations, rr.best_fitness};
        });
    } else {
        const BisectResult b = bisect_population_size(*problem, opt.pl.hboa, opt.bisect_runs,
                                                      opt.master_seed, opt.bisect_ceiling, opt.threads);
        nmin = b.n_min;
        const std::string tag = name + "/fixed";
        parallel_for(opt.runs, opt.threads, [&](std::size_t i) {
            const std::uint64_t seed = derive_seed(opt.master_seed, tag, n, i, b.n_min);
            const RunResult rr = run_fixed(*problem, b.n_min, opt.pl.hboa, seed);
            outcomes[i] = {rr.success, rr.evaluations, rr.best_fitness};
        });
    }
    return summarize(name, n, opt, outcomes, nmin);
}

inline ExperimentRecord run_spinglass_experiment(std::size_t side, const ExperimentOptions& opt) {
    const std::size_t n = side * side;
    const bool oracle_sized = n <= 26;

    struct PerInstance {
        std::uint64_t seed = 0;
        long long target_energy = 0;
        long long found_energy = 0;
        std::filesystem::path best_file;
    };
    std::vector<PerInstance> instances(opt.runs);
    std::vector<RunOutcome> outcomes(opt.runs);

    const auto make_instance = [&](std::size_t k) {
        const std::uint64_t iseed = derive_seed(opt.master_seed, "spinglass/instance", side, k);
        RandomSource rng(iseed);
        SpinGlassInstance inst = generate_instance(static_cast<int>(side), rng);
        inst.seed = iseed;
        return inst;
    };

    // resolve ground truths up front so a missing best-known file fails fast
    for (std::size_t k = 0; k < opt.runs; ++k) {
        instances[k].seed = derive_seed(opt.master_seed, "spinglass/instance", side, k);
        if (!oracle_sized) {
            if (!opt.best_known_dir)
                throw std::runtime_error("configuration error: spin glass side " + std::to_string(side) +
                                         " needs --bestknown-dir (oracle limit is 26 spins)");
            instances[k].best_file = best_known_path(*opt.best_known_dir, static_cast<int>(side), instances[k].seed);
            const std::optional<long long> e = read_best_known(instances[k].best_file);
            if (!e)
                throw std::runtime_error("configuration error: no best-known energy recorded for instance " +
                                         instances[k].best_file.string());
            instances[k].target_energy = *e;
        }
    }

    std::optional<std::size_t> nmin;
    if (opt.mode == "fixed-bisected") {
        SpinGlassInstance inst0 = make_instance(0);
        SpinGlassProblem p0(inst0);
        if (oracle_sized)
            p0.set_ground_energy(brute_force_ground_state(inst0).energy);
        else
            p0.set_ground_energy(instances[0].target_energy);
        const BisectResult b = bisect_population_size(p0, opt.pl.hboa, opt.bisect_runs, opt.master_seed,
                                                      opt.bisect_ceiling, opt.threads);
        nmin = b.n_min;
    }

    parallel_for(opt.runs, opt.threads, [&](std::size_t k) {
        SpinGlassInstance inst = make_instance(k);
        SpinGlassProblem problem(inst);
        if (oracle_sized)
            instances[k].target_energy = brute_force_ground_state(inst).energy;
        problem.set_ground_energy(instances[k].target_energy);

        RunResult rr;
        if (opt.mode == "pl") {
            const std::uint64_t seed = derive_seed(opt.master_seed, "spinglass/pl", side, k);
            rr = run_parameterless(problem, opt.pl, seed, opt.budget);
        } else {
            const std::uint64_t seed = derive_seed(opt.master_seed, "spinglass/fixed", side, k, *nmin);
            rr = run_fixed(problem, *nmin, opt.pl.hboa, seed);
        }
        outcomes[k] = {rr.success, rr.evaluations, rr.best_fitness};
        instances[k].found_energy = static_cast<long long>(std::llround(-rr.best_fitness));
    });

    if (!oracle_sized)
        for (std::size_t k = 0; k < opt.runs; ++k)
            update_best_known(instances[k].best_file, instances[k].found_energy);

    ExperimentRecord r = summarize("spinglass", n, opt, outcomes, nmin);
    return r;
}

}  // namespace detail

/// One record per size. Sizes are bit counts for dec3/htrap and lattice
/// sides for spin glasses (recorded as n = L^2). Spin-glass sizes get a
/// fresh random instance per run, each solved against its exact ground
/// state (oracle, up to 26 spins) or a recorded best-known energy.
inline std::vector<ExperimentRecord> run_experiment(Family family, const std::vector<std::size_t>& sizes,
                                                    const ExperimentOptions& opt) {
    if (opt.runs < 1) throw std::invalid_argument("run_experiment: runs must be positive");
    if (opt.mode != "pl" && opt.mode != "fixed-bisected")
        throw std::invalid_argument("run_experiment: mode must be pl or fixed-bisected");
    if (sizes.empty()) throw std::invalid_argument("run_experiment: no sizes given");
    for (const std::size_t s : sizes) validate_family_size(family, s);

    std::vector<ExperimentRecord> records;
    records.reserve(sizes.size());
    for (const std::size_t s : sizes) {
        if (family == Family::kSpinGlass)
            records.push_back(detail::run_spinglass_experiment(s, opt));
        else
            records.push_back(detail::run_scalar_experiment(family, s, opt));
    }
    return records;
}

// ---------------------------------------------------------------------------
// scaling fit

/// Least-squares slope of log(y) against log(x).
inline double power_law_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("power_law_fit: need at least 3 points");
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& [x, y] : points) {
        if (x <= 0.0 || y <= 0.0) throw std::invalid_argument("power_law_fit: points must be positive");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double mx = sx / static_cast<double>(points.size());
    const double my = sy / static_cast<double>(points.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("power_law_fit: all x values identical");
    return sxy / sxx;
}

inline double power_law_fit(const std::vector<ExperimentRecord>& records) {
    std::vector<std::pair<double, double>> points;
    points.reserve(records.size());
    for (const ExperimentRecord& r : records)
        points.emplace_back(static_cast<double>(r.n), r.mean_evals);
    return power_law_fit(points);
}

}  // namespace hboa
