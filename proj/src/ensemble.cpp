#include "flocksim/ensemble.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "flocksim/errors.hpp"
#include "flocksim/numfmt.hpp"
#include "flocksim/rng.hpp"
#include "flocksim/version.hpp"

namespace flocksim {

namespace {

void append_uniform(std::vector<double>& grid, double start, double stop, double step) {
    for (long k = 1;; ++k) {
        double t = start + static_cast<double>(k) * step;
        if (t >= stop * (1.0 - 1e-12)) break;
        grid.push_back(t);
    }
    grid.push_back(stop);
}

} // namespace

std::vector<double> scenario_noise_grid(const Scenario& sc) {
    std::vector<double> grid{0.0};
    append_uniform(grid, 0.0, sc.horizon, sc.ctrl.dt_base);
    if (sc.event_enabled) {
        double t_ext = sc.event_params().effective_t_trunc();
        if (t_ext > sc.horizon) {
            double step = sc.tail_dt > 0.0 ? sc.tail_dt : sc.ctrl.dt_base;
            append_uniform(grid, sc.horizon, t_ext, step);
        }
    }
    return grid;
}

namespace {

// Locate each output time among the track nodes; the grids are built from the
// same horizon so matches are exact up to rounding of k*dt products.
std::size_t matching_node(const std::vector<double>& times, std::size_t from, double t) {
    const double eps = 2e-12 * std::max(1.0, std::abs(t));
    for (std::size_t k = from; k < times.size(); ++k) {
        if (std::abs(times[k] - t) <= eps) return k;
        if (times[k] > t + eps) break;
    }
    throw GridError("ensemble: output time missing from the noise grid");
}

PathResult one_path(const Scenario& sc, const std::vector<double>& sim_grid,
                    const std::vector<double>& out_grid, long idx) {
    const std::uint64_t pseed = rng::path_seed(sc.master_seed, static_cast<std::uint64_t>(idx));
    BrownianPath path = BrownianPath::sample_on(sim_grid, rng::hash2(pseed, rng::kTagWiener));

    if (sc.mode == RunMode::Full) {
        PathResult res =
            simulate_on_path(sc.cfg, sc.ctrl, sc.horizon, path, pseed, out_grid, sc.p_list);
        if (sc.event_enabled) {
            EventAParams prm = sc.event_params();
            std::size_t qi = 0;
            while (sc.p_list[qi] != sc.event_q) ++qi; // validated to exist
            EventEval ev = event_A_eval(res.xnorm[qi][0], res.vnorm[qi][0], prm, path);
            res.event_class = ev.cls;
            res.event_integral = ev.integral;
            res.event_tail = ev.tail;
            res.event_g_low = ev.g_low;
        }
        return res;
    }

    // PathsOnly: record the martingale track (and event integral) without
    // integrating any particles.
    PathResult res;
    res.seed = pseed;
    res.status = PathStatus::Completed;
    res.sample_times = out_grid;
    MartingaleTrack track = stochastic_integral(path, sc.cfg.noise);
    res.m_values.resize(out_grid.size());
    res.qv_values.resize(out_grid.size());
    std::size_t node = 0;
    for (std::size_t o = 0; o < out_grid.size(); ++o) {
        node = matching_node(track.times, node, out_grid[o]);
        res.m_values[o] = track.m_values[node];
        res.qv_values[o] = track.qv_values[node];
    }
    if (sc.event_enabled) {
        EventAParams prm = sc.event_params();
        ExpFunctional ef = exp_functional(path, prm.drift_coef(), prm.vol_coef(),
                                          prm.effective_t_trunc(), prm.c_lil);
        res.event_integral = ef.value;
        res.event_tail = ef.tail_bound;
    }
    return res;
}

} // namespace

std::vector<PathResult> run_paths(const Scenario& sc, int workers) {
    sc.validate();
    if (sc.n_paths <= 0) throw EmptyEnsemble("run_paths: scenario has no paths");

    const std::vector<double> sim_grid = scenario_noise_grid(sc);
    const std::vector<double> out_grid = sc.output_grid();

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    if (static_cast<long>(n_workers) > sc.n_paths) n_workers = static_cast<int>(sc.n_paths);

    std::vector<PathResult> results(static_cast<std::size_t>(sc.n_paths));
    std::atomic<long> cursor{0};
    std::mutex err_mu;
    long err_idx = -1;
    std::string err_msg;

    auto work = [&]() {
        for (;;) {
            long idx = cursor.fetch_add(1);
            if (idx >= sc.n_paths) return;
            try {
                results[static_cast<std::size_t>(idx)] = one_path(sc, sim_grid, out_grid, idx);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (err_idx < 0 || idx < err_idx) {
                    err_idx = idx;
                    err_msg = e.what();
                }
            }
        }
    };

    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    if (err_idx >= 0)
        throw std::runtime_error("path " + std::to_string(err_idx) + ": " + err_msg);
    return results;
}

std::pair<EnsembleStats, RunManifest> run_ensemble(const Scenario& sc, int workers) {
    auto start = std::chrono::steady_clock::now();
    std::vector<PathResult> results = run_paths(sc, workers);

    EnsembleStats stats;
    if (sc.event_enabled && sc.mode == RunMode::Full) {
        std::vector<unsigned char> mask(results.size(), 0);
        for (std::size_t i = 0; i < results.size(); ++i)
            if (results[i].event_class && *results[i].event_class == EventClass::InA) mask[i] = 1;
        stats = flocking_metrics(results, &mask);
    } else {
        stats = flocking_metrics(results, nullptr);
    }
    stats.master_seed = sc.master_seed;
    stats.scenario_config = sc.serialize();

    if (sc.fit_model != Scenario::FitModel::None) {
        double lo = 0.0, hi = 0.0;
        sc.fit_window(lo, hi);
        DecayModel model = sc.fit_model == Scenario::FitModel::Exponential
                               ? DecayModel::Exponential
                               : DecayModel::Algebraic;
        for (std::size_t pi = 0; pi < stats.p_list.size(); ++pi) {
            std::string tag = "p=" + num_to_string(stats.p_list[pi]);
            stats.fits.push_back(
                NamedFit{"mean_vnorm[" + tag + "]",
                         fit_decay(stats.grid, stats.mean_vnorm[pi].mean, model, lo, hi)});
            if (stats.has_conditional)
                stats.fits.push_back(
                    NamedFit{"cond_mean_vnorm[" + tag + "]",
                             fit_decay(stats.grid, stats.cond_mean_vnorm[pi].mean, model, lo, hi)});
        }
    }

    RunManifest man;
    man.scenario = sc.serialize();
    man.version = kVersion;
    man.master_seed = sc.master_seed;
    man.workers = workers;
    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(stats), std::move(man)};
}

} // namespace flocksim
