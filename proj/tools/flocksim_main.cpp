#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "flocksim/acceptance.hpp"
#include "flocksim/report.hpp"
#include "flocksim/scenario.hpp"
#include "flocksim/version.hpp"

namespace {

// Builtin names never contain '/'; anything that looks like a path, or exists
// on disk, is read as a scenario file.
flocksim::Scenario resolve_scenario(const std::string& arg) {
    if (arg.find('/') != std::string::npos || std::filesystem::exists(arg))
        return flocksim::load_scenario(arg);
    return flocksim::builtin_scenario(arg);
}

int run_simulate(const std::string& scenario_arg, long paths, bool has_seed,
                 std::uint64_t seed, int workers, const std::string& out_dir,
                 bool dump_paths, const std::string& formats) {
    flocksim::Scenario sc = resolve_scenario(scenario_arg);
    if (paths >= 0) sc.n_paths = paths;
    if (has_seed) sc.master_seed = seed;

    auto [stats, manifest] = flocksim::run_ensemble(sc, workers);
    flocksim::emit_report(stats, manifest, out_dir, formats);
    if (dump_paths) {
        std::vector<flocksim::PathResult> results = flocksim::run_paths(sc, workers);
        auto file = std::filesystem::path(out_dir) / "paths.csv";
        flocksim::write_text_file(file.string(), flocksim::paths_to_csv(results));
    }
    std::cout << sc.name << ": " << sc.n_paths << " paths, seed " << sc.master_seed
              << ", " << std::fixed << std::setprecision(2) << manifest.wall_seconds
              << "s -> " << out_dir << "\n";
    return 0;
}

int run_list() {
    for (const flocksim::Scenario& s : flocksim::builtin_scenarios()) {
        std::cout << std::left << std::setw(20) << s.name << " n=" << s.cfg.n
                  << " d=" << s.cfg.d << " kernel=" << s.cfg.kernel.config_string()
                  << " noise=" << s.cfg.noise.config_string() << " T=" << s.horizon
                  << " paths=" << s.n_paths << "\n";
    }
    return 0;
}

int run_check(int workers) {
    std::vector<flocksim::CriterionResult> rows = flocksim::run_acceptance(workers);
    return flocksim::print_acceptance(std::cout, rows) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ensemble simulator for singular-kernel alignment dynamics"};
    app.set_version_flag("--version", flocksim::kVersion);
    app.require_subcommand(1);

    std::string scenario_arg;
    long paths = -1;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_dir = ".";
    bool dump_paths = false;
    std::string formats = "csv,json";

    CLI::App* sim = app.add_subcommand("simulate", "run a scenario and write reports");
    sim->add_option("--scenario", scenario_arg, "builtin name or scenario file")->required();
    sim->add_option("--paths", paths, "override path count");
    CLI::Option* seed_opt = sim->add_option("--seed", seed, "override master seed");
    sim->add_option("--workers", workers, "worker threads (0 = hardware)");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_flag("--dump-paths", dump_paths, "also write per-path series to paths.csv");
    sim->add_option("--format", formats, "comma list of csv,json,svg");

    CLI::App* lst = app.add_subcommand("list-scenarios", "print the builtin scenarios");

    int check_workers = 0;
    CLI::App* chk = app.add_subcommand("check", "run the acceptance criteria");
    chk->add_option("--workers", check_workers, "worker threads (0 = hardware)");

    int rc = 0;
    sim->callback([&] {
        rc = run_simulate(scenario_arg, paths, seed_opt->count() > 0, seed, workers,
                          out_dir, dump_paths, formats);
    });
    lst->callback([&] { rc = run_list(); });
    chk->callback([&] { rc = run_check(check_workers); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
