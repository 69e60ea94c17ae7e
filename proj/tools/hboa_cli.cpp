// Command-line front end: single runs, population-size bisection, scaling
// experiments with CSV output, spin-glass instance generation, and the
// exhaustive ground-state oracle.
#include "CLI11.hpp"
#include "hboa/harness.hpp"

#include <iomanip>
#include <iostream>

namespace {

struct RunArgs {
    std::string problem;
    std::size_t n = 0;
    std::string instance;
    std::string mode = "pl";
    std::size_t pop = 0;
    std::uint64_t seed = 1;
    std::uint64_t budget = 100'000'000;
    std::string trace;
    std::string bestknown_dir;
};

struct BisectArgs {
    std::string problem;
    std::size_t n = 0;
    std::size_t runs = 30;
    std::uint64_t seed = 1;
    unsigned threads = std::thread::hardware_concurrency();
};

struct ExperimentArgs {
    std::string problem;
    std::vector<std::size_t> sizes;
    std::size_t runs = 100;
    std::string mode = "pl";
    std::uint64_t seed = 1;
    std::string out;
    std::uint64_t budget = 100'000'000;
    unsigned threads = std::thread::hardware_concurrency();
    std::string bestknown_dir;
};

struct GenArgs {
    int side = 0;
    int count = 0;
    std::uint64_t seed = 1;
    std::string out_dir;
};

hboa::Family parse_family(const std::string& name) {
    const std::optional<hboa::Family> f = hboa::family_from_name(name);
    if (!f) throw std::invalid_argument("unknown problem: " + name);
    return *f;
}

std::size_t side_from_bits(std::size_t n) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side < 3 || side * side != n)
        throw std::invalid_argument("spin glass --n must be L*L for a side L >= 3");
    return side;
}

hboa::SpinGlassInstance load_or_generate_instance(const RunArgs& args) {
    if (!args.instance.empty()) {
        hboa::SpinGlassInstance inst = hboa::read_instance_file(args.instance);
        if (inst.spins() != args.n)
            throw std::invalid_argument("--n does not match the instance (" + std::to_string(inst.spins()) +
                                        " spins)");
        return inst;
    }
    const std::size_t side = side_from_bits(args.n);
    const std::uint64_t iseed = hboa::derive_seed(args.seed, "spinglass/instance", side, 0);
    hboa::RandomSource rng(iseed);
    hboa::SpinGlassInstance inst = hboa::generate_instance(static_cast<int>(side), rng);
    inst.seed = iseed;
    return inst;
}

void print_run_result(const hboa::RunResult& r, const std::string& problem, std::size_t n,
                      const std::string& mode) {
    std::cout << std::setprecision(12);
    std::cout << "problem: " << problem << "\n";
    std::cout << "n: " << n << "\n";
    std::cout << "mode: " << mode << "\n";
    std::cout << "seed: " << r.seed << "\n";
    std::cout << "success: " << (r.success ? "yes" : "no") << "\n";
    std::cout << "best_fitness: " << r.best_fitness << "\n";
    std::cout << "evaluations: " << r.evaluations << "\n";
    std::cout << "flips: " << r.flips << "\n";
    std::cout << "steps: " << r.generations << "\n";
    if (r.max_population_index >= 0)
        std::cout << "max_population_index: " << r.max_population_index << "\n";
    std::cout << "stop_reason: " << r.stop_reason << "\n";
    std::cout << "wall_time_s: " << r.wall_time_s << "\n";
}

void cmd_run(const RunArgs& args) {
    const hboa::Family family = parse_family(args.problem);
    if (args.mode == "fixed" && args.pop < 2)
        throw std::invalid_argument("fixed mode requires --pop (at least 2)");
    if (args.mode == "pl" && args.pop != 0)
        throw std::invalid_argument("--pop only applies to --mode fixed");

    std::unique_ptr<hboa::Problem> scalar;
    std::optional<hboa::SpinGlassInstance> instance;
    std::optional<hboa::SpinGlassProblem> spin;
    const hboa::Problem* problem = nullptr;
    std::optional<std::filesystem::path> best_file;

    if (family == hboa::Family::kSpinGlass) {
        instance = load_or_generate_instance(args);
        spin.emplace(*instance);
        if (instance->spins() <= 26) {
            spin->set_ground_energy(hboa::brute_force_ground_state(*instance).energy);
        } else if (!args.bestknown_dir.empty()) {
            best_file = hboa::best_known_path(args.bestknown_dir, instance->side, instance->seed);
            if (const std::optional<long long> e = hboa::read_best_known(*best_file))
                spin->set_ground_energy(*e);
        }
        problem = &*spin;
    } else {
        scalar = hboa::make_scalar_problem(family, args.n);
        problem = scalar.get();
    }

    std::ofstream trace;
    if (!args.trace.empty()) {
        trace.open(args.trace);
        if (!trace) throw std::runtime_error("cannot write trace file: " + args.trace);
        trace << "step,pop_index,pop_size,generation,best,average,evaluations\n";
        trace << std::setprecision(12);
    }

    hboa::RunResult result;
    if (args.mode == "pl") {
        hboa::StepObserver observer;
        if (trace.is_open())
            observer = [&trace](const hboa::StepRecord& s) {
                trace << s.step << ',' << s.pop_index << ',' << s.pop_size << ',' << s.generation << ','
                      << s.best << ',' << s.average << ',' << s.evaluations << "\n";
            };
        result = hboa::run_parameterless(*problem, hboa::PlConfig{}, args.seed, args.budget, observer);
    } else {
        hboa::GenerationObserver observer;
        const std::size_t pop = args.pop;
        if (trace.is_open())
            observer = [&trace, pop](const hboa::GenerationStats& g) {
                trace << g.generation << ",0," << pop << ',' << g.generation << ',' << g.best << ','
                      << g.average << ',' << g.evaluations << "\n";
            };
        result = hboa::run_fixed(*problem, args.pop, hboa::HboaConfig{}, args.seed, observer);
    }

    print_run_result(result, args.problem, problem->size(), args.mode);
    if (spin) {
        const auto energy = static_cast<long long>(std::llround(-result.best_fitness));
        std::cout << "best_energy: " << energy << "\n";
        if (best_file && hboa::update_best_known(*best_file, energy))
            std::cout << "best_known_updated: " << best_file->string() << "\n";
    }
}

void cmd_bisect(const BisectArgs& args) {
    const hboa::Family family = parse_family(args.problem);
    std::unique_ptr<hboa::Problem> scalar;
    std::optional<hboa::SpinGlassProblem> spin;
    const hboa::Problem* problem = nullptr;

    if (family == hboa::Family::kSpinGlass) {
        const std::size_t side = side_from_bits(args.n);
        if (args.n > 26)
            throw std::invalid_argument("bisect on spin glasses is limited to 26 spins (exact oracle)");
        const std::uint64_t iseed = hboa::derive_seed(args.seed, "spinglass/instance", side, 0);
        hboa::RandomSource rng(iseed);
        hboa::SpinGlassInstance inst = hboa::generate_instance(static_cast<int>(side), rng);
        inst.seed = iseed;
        spin.emplace(inst);
        spin->set_ground_energy(hboa::brute_force_ground_state(inst).energy);
        problem = &*spin;
    } else {
        scalar = hboa::make_scalar_problem(family, args.n);
        problem = scalar.get();
    }

    const hboa::BisectResult b = hboa::bisect_population_size(*problem, hboa::HboaConfig{}, args.runs,
                                                              args.seed, std::size_t{1} << 22, args.threads);
    std::cout << "problem: " << args.problem << "\n";
    std::cout << "n: " << args.n << "\n";
    std::cout << "runs: " << args.runs << "\n";
    std::cout << "seed: " << args.seed << "\n";
    std::cout << "n_min: " << b.n_min << "\n";
    std::cout << "interval_lo: " << b.lo << "\n";
    std::cout << "interval_hi: " << b.hi << "\n";
    std::cout << "probes: " << b.probes << "\n";
}

void cmd_experiment(const ExperimentArgs& args) {
    const hboa::Family family = parse_family(args.problem);
    hboa::ExperimentOptions opt;
    opt.runs = args.runs;
    opt.mode = args.mode;
    opt.master_seed = args.seed;
    opt.budget = args.budget;
    opt.threads = args.threads;
    if (!args.bestknown_dir.empty()) opt.best_known_dir = args.bestknown_dir;

    const std::vector<hboa::ExperimentRecord> records = hboa::run_experiment(family, args.sizes, opt);
    hboa::write_csv(args.out, records);
    std::cout << hboa::kCsvHeader << "\n";
    for (const hboa::ExperimentRecord& r : records) std::cout << hboa::csv_row(r) << "\n";
    std::cout << "wrote " << args.out << "\n";
}

void cmd_gen_spinglass(const GenArgs& args) {
    if (args.side < 3) throw std::invalid_argument("--l must be at least 3");
    if (args.count < 1) throw std::invalid_argument("--count must be positive");
    std::filesystem::create_directories(args.out_dir);
    for (int k = 0; k < args.count; ++k) {
        const std::uint64_t iseed =
            hboa::derive_seed(args.seed, "spinglass/instance", static_cast<std::uint64_t>(args.side),
                              static_cast<std::uint64_t>(k));
        hboa::RandomSource rng(iseed);
        hboa::SpinGlassInstance inst = hboa::generate_instance(args.side, rng);
        inst.seed = iseed;
        const std::filesystem::path file = std::filesystem::path(args.out_dir) /
                                           ("sg_L" + std::to_string(args.side) + "_" + std::to_string(k) + ".txt");
        hboa::write_instance_file(inst, file.string());
        std::cout << "wrote " << file.string() << "\n";
    }
}

void cmd_oracle(const std::string& instance_file) {
    const hboa::SpinGlassInstance inst = hboa::read_instance_file(instance_file);
    const hboa::GroundState gs = hboa::brute_force_ground_state(inst);
    std::cout << "energy: " << gs.energy << "\n";
    std::cout << "assignment: ";
    for (const std::uint8_t b : gs.bits) std::cout << static_cast<int>(b);
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical BOA with parameter-less population sizing"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Execute a single run");
    run->add_option("--problem", run_args.problem)->required()->check(CLI::IsMember({"dec3", "htrap", "spinglass"}));
    run->add_option("--n", run_args.n)->required();
    run->add_option("--instance", run_args.instance);
    run->add_option("--mode", run_args.mode)->check(CLI::IsMember({"pl", "fixed"}));
    run->add_option("--pop", run_args.pop);
    run->add_option("--seed", run_args.seed);
    run->add_option("--budget", run_args.budget);
    run->add_option("--trace", run_args.trace);
    run->add_option("--bestknown-dir", run_args.bestknown_dir);
    run->callback([&] { cmd_run(run_args); });

    BisectArgs bisect_args;
    CLI::App* bisect = app.add_subcommand("bisect", "Find the minimal population size");
    bisect->add_option("--problem", bisect_args.problem)
        ->required()
        ->check(CLI::IsMember({"dec3", "htrap", "spinglass"}));
    bisect->add_option("--n", bisect_args.n)->required();
    bisect->add_option("--runs", bisect_args.runs);
    bisect->add_option("--seed", bisect_args.seed);
    bisect->add_option("--threads", bisect_args.threads);
    bisect->callback([&] { cmd_bisect(bisect_args); });

    ExperimentArgs exp_args;
    CLI::App* exp = app.add_subcommand("experiment", "Run a scaling sweep and write a CSV");
    exp->add_option("--problem", exp_args.problem)
        ->required()
        ->check(CLI::IsMember({"dec3", "htrap", "spinglass"}));
    exp->add_option("--sizes", exp_args.sizes)->required()->delimiter(',');
    exp->add_option("--runs", exp_args.runs);
    exp->add_option("--mode", exp_args.mode)->check(CLI::IsMember({"pl", "fixed-bisected"}));
    exp->add_option("--seed", exp_args.seed);
    exp->add_option("--out", exp_args.out)->required();
    exp->add_option("--budget", exp_args.budget);
    exp->add_option("--threads", exp_args.threads);
    exp->add_option("--bestknown-dir", exp_args.bestknown_dir);
    exp->callback([&] { cmd_experiment(exp_args); });

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen-spinglass", "Generate random spin-glass instances");
    gen->add_option("--l", gen_args.side)->required();
    gen->add_option("--count", gen_args.count)->required();
    gen->add_option("--seed", gen_args.seed);
    gen->add_option("--out-dir", gen_args.out_dir)->required();
    gen->callback([&] { cmd_gen_spinglass(gen_args); });

    std::string oracle_instance;
    CLI::App* oracle = app.add_subcommand("oracle", "Exact ground state of a spin-glass instance");
    oracle->add_option("--instance", oracle_instance)->required();
    oracle->callback([&] { cmd_oracle(oracle_instance); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
