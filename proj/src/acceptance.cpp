#include "flocksim/acceptance.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "flocksim/errors.hpp"
#include "flocksim/numfmt.hpp"
#include "flocksim/report.hpp"
#include "flocksim/rng.hpp"
#include "flocksim/scenario.hpp"

namespace flocksim {

namespace {

double sq(double x) { return x * x; }

std::string short_num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::size_t grid_index(const std::vector<double>& grid, double t) {
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (std::abs(grid[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
    throw GridError("acceptance: time missing from output grid");
}

// Criterion 1: constant kernel, closed-form mean decay e^{-lambda psi t} and
// the fitted exponential rate.
CriterionResult c1(int workers) {
    Scenario sc = builtin_scenario("S1-exp-flock");
    EnsembleStats st = run_ensemble(sc, workers).first;
    const SeriesStat& v = st.mean_vnorm[0];
    const double v0 = v.mean[0];
    const double band_floor = 2.0 * std::sqrt(sc.ctrl.dt_base);
    bool ok = true;
    std::string det;
    for (double t : {1.0, 2.0, 4.0}) {
        std::size_t k = grid_index(st.grid, t);
        double ratio = v.mean[k] / v0;
        double se_ratio =
            std::sqrt(sq(v.se[k] / v0) + sq(v.mean[k] * v.se[0] / (v0 * v0)));
        double band = std::max(3.0 * se_ratio, band_floor);
        double dev = std::abs(ratio - std::exp(-t));
        if (dev > band) ok = false;
        det += "t=" + short_num(t) + " dev " + short_num(dev) + " vs " + short_num(band) + "; ";
    }
    double rate = 0.0;
    for (const NamedFit& nf : st.fits)
        if (nf.target == "mean_vnorm[p=2]") rate = nf.fit.rate;
    if (!(std::abs(rate - 1.0) <= 0.05)) ok = false;
    det += "fit rate " + short_num(rate) + " (want 1 +- 0.05)";
    return {"S1-exp-flock", ok, det};
}

// Criterion 2: pathwise dominance by the comparison process, and velocity-sum
// conservation.
CriterionResult c2(int workers) {
    Scenario sc = builtin_scenario("S2-comparison");
    std::vector<PathResult> results = run_paths(sc, workers);
    const double psi_star = sc.cfg.kernel.psi_star();
    long viol = 0, total = 0;
    double worst_vsum = 0.0;
    for (const PathResult& r : results) {
        const double v0 = r.vnorm[0][0];
        for (std::size_t k = 0; k < r.sample_times.size(); ++k) {
            double bound = comparison_value(r.m_values[k], r.qv_values[k], psi_star,
                                            sc.cfg.lambda, v0, r.sample_times[k]);
            ++total;
            if (r.vnorm[0][k] > bound * 1.05) ++viol;
        }
        worst_vsum = std::max(worst_vsum, r.max_vsum);
    }
    double frac = static_cast<double>(viol) / static_cast<double>(total);
    bool ok = frac < 1e-3 && worst_vsum <= 1e-9;
    std::string det = "violations " + std::to_string(viol) + "/" + std::to_string(total) +
                      " (" + short_num(frac) + "), max |sum v| " + short_num(worst_vsum);
    return {"S2-comparison", ok, det};
}

// Criterion 3: unit martingale mean under both intensity families.
CriterionResult c3(int workers) {
    Scenario a = builtin_scenario("S3-martingale");
    Scenario b = a;
    b.cfg.noise = parse_noise("powdec:1:0.75");
    bool ok = true;
    std::string det;
    const char* tags[] = {"const", "powdec"};
    int ti = 0;
    for (const Scenario& sc : {a, b}) {
        EnsembleStats st = run_ensemble(sc, workers).first;
        for (double t : {1.0, 5.0}) {
            std::size_t k = grid_index(st.grid, t);
            double dev = std::abs(st.martingale_mean.mean[k] - 1.0);
            double band = 3.0 * st.martingale_mean.se[k];
            if (dev > band) ok = false;
            det += std::string(tags[ti]) + " t=" + short_num(t) + " dev " + short_num(dev) +
                   " vs " + short_num(band) + "; ";
        }
        ++ti;
    }
    det.resize(det.size() - 2);
    return {"S3-martingale", ok, det};
}

// Criterion 4: no collisions for the strongly singular kernel; guaranteed
// collision for the weak kernel with head-on deterministic data.
CriterionResult c4(int workers) {
    Scenario sc = builtin_scenario("S4-collision-avoid");
    EnsembleStats st = run_ensemble(sc, workers).first;
    bool ok = st.collision_frequency.count == 0 && st.collision_frequency.hi < 2e-3;
    std::string det = "collided " + std::to_string(st.collision_frequency.count) + "/" +
                      std::to_string(st.collision_frequency.n) + ", upper " +
                      short_num(st.collision_frequency.hi);

    Scenario b = sc;
    b.name = "S4b-head-on";
    b.cfg.n = 2;
    b.cfg.d = 1;
    b.cfg.kernel = parse_kernel("power:0.5");
    b.cfg.noise = parse_noise("const:0");
    b.cfg.sampler = parse_sampler("two_particle:1:-4");
    b.horizon = 1.0;
    b.output_dt = 0.1;
    b.n_paths = 16;
    EnsembleStats stb = run_ensemble(b, workers).first;
    if (stb.collision_frequency.count != stb.collision_frequency.n) ok = false;
    det += "; head-on collided " + std::to_string(stb.collision_frequency.count) + "/" +
           std::to_string(stb.collision_frequency.n);
    return {"S4-collision-avoid", ok, det};
}

// Criterion 5: the initial-data/noise event has probability strictly inside
// (0,1); conditioned on it, positions stay bounded and velocities decay.
CriterionResult c5(int workers) {
    Scenario sc = builtin_scenario("S5-event-A");
    EnsembleStats st = run_ensemble(sc, workers).first;
    const FreqStat& ef = st.event_frequency;
    bool ok_p = ef.n > 0 && ef.lo > 0.0 && ef.hi < 1.0;

    std::vector<double> u, y, yse;
    for (std::size_t k = 0; k < st.grid.size(); ++k) {
        if (st.grid[k] < 0.5 * sc.horizon - 1e-9) continue;
        u.push_back(st.grid[k]);
        y.push_back(st.cond_mean_xnorm[0].mean[k]);
        yse.push_back(st.cond_mean_xnorm[0].se[k]);
    }
    SlopeStat sl = slope_with_se(u, y, yse);
    bool ok_x = st.has_conditional && sl.slope <= 3.0 * sl.se;

    double arate = 0.0;
    for (const NamedFit& nf : st.fits)
        if (nf.target == "cond_mean_vnorm[p=2]") arate = nf.fit.rate;
    bool ok_v = arate > 0.0;

    bool ok = ok_p && ok_x && ok_v;
    std::string det = "P(A) in [" + short_num(ef.lo) + ", " + short_num(ef.hi) + "], " +
                      std::to_string(st.indeterminate_count) + " indeterminate; xnorm slope " +
                      short_num(sl.slope) + " vs 3se " + short_num(3.0 * sl.se) +
                      "; vnorm algebraic rate " + short_num(arate);
    return {"S5-event-A", ok, det};
}

// Criterion 6: strong-error slope against the exact linear-case solution on a
// shared Brownian path, over dt = 1e-2, 1e-3, 1e-4.
CriterionResult c6(int) {
    Scenario sc = builtin_scenario("S6-strong-order");
    const double fine_dt = 1e-4;
    std::vector<double> grid{0.0};
    for (long k = 1;; ++k) {
        double t = static_cast<double>(k) * fine_dt;
        if (t >= sc.horizon * (1.0 - 1e-12)) break;
        grid.push_back(t);
    }
    grid.push_back(sc.horizon);

    const std::array<std::size_t, 3> strides{100, 10, 1};
    std::array<double, 3> errs{0.0, 0.0, 0.0};
    const double u0 = 2.0; // relative velocity of the deterministic initial data
    const double lam_psi = sc.cfg.lambda * sc.cfg.kernel.psi_star();
    const double dcoef = sc.cfg.noise.d0();

    for (long idx = 0; idx < sc.n_paths; ++idx) {
        const std::uint64_t pseed = rng::path_seed(sc.master_seed, static_cast<std::uint64_t>(idx));
        BrownianPath fine = BrownianPath::sample_on(grid, rng::hash2(pseed, rng::kTagWiener));
        const double w_end = fine.values.back();
        const double t_end = fine.times.back();
        const double u_exact =
            u0 * std::exp((-lam_psi - 0.5 * dcoef * dcoef) * t_end + dcoef * w_end);

        for (std::size_t lvl = 0; lvl < strides.size(); ++lvl) {
            BrownianPath sub;
            sub.seed = fine.seed;
            for (std::size_t j = 0; j < fine.times.size(); j += strides[lvl]) {
                sub.times.push_back(fine.times[j]);
                sub.values.push_back(fine.values[j]);
            }
            StepController ctrl = sc.ctrl;
            ctrl.dt_base = fine_dt * static_cast<double>(strides[lvl]);
            PathResult res = simulate_on_path(sc.cfg, ctrl, sc.horizon, sub, pseed,
                                              {0.0, sc.horizon}, sc.p_list);
            errs[lvl] += std::abs(res.relative->v.back() - u_exact);
        }
    }

    std::vector<double> log_dt, log_err;
    std::string det = "mean errors";
    for (std::size_t lvl = 0; lvl < strides.size(); ++lvl) {
        errs[lvl] /= static_cast<double>(sc.n_paths);
        log_dt.push_back(std::log(fine_dt * static_cast<double>(strides[lvl])));
        log_err.push_back(std::log(errs[lvl]));
        det += " " + short_num(errs[lvl]);
    }
    double slope = ols(log_dt, log_err).slope;
    bool ok = slope >= 0.4 && slope <= 1.1;
    det += ", slope " + short_num(slope) + " (want [0.4, 1.1])";
    return {"S6-strong-order", ok, det};
}

// Criterion 7: scalar two-particle system; conditional relative velocity
// dominates the coupling tail and stays bounded away from zero.
CriterionResult c7(int workers) {
    Scenario sc = builtin_scenario("S7-appendixA");
    std::vector<PathResult> results = run_paths(sc, workers);
    TwoParticleBound b = two_particle_lower_bound(results, sc.cfg.kernel, sc.cfg.lambda);
    bool ok = !b.omitted && b.mask_count == b.n;
    double worst_margin = 1e300, min_v = 1e300;
    for (std::size_t k = 0; k < b.times.size(); ++k) {
        worst_margin = std::min(worst_margin, b.mean_diff[k] + 3.0 * b.se_diff[k]);
        min_v = std::min(min_v, b.mean_v[k]);
    }
    if (!(worst_margin >= 0.0) || !(min_v >= 0.2)) ok = false;
    std::string det = "mask " + std::to_string(b.mask_count) + "/" + std::to_string(b.n) +
                      ", worst margin " + short_num(worst_margin) + ", min cond mean v " +
                      short_num(min_v);
    return {"S7-appendixA", ok, det};
}

// Criterion 8: law of the truncated exponential functional against the
// inverse-gamma family with the predicted shape.
CriterionResult c8(int workers) {
    Scenario sc = builtin_scenario("S8-dufresne");
    std::vector<PathResult> results = run_paths(sc, workers);
    std::vector<double> sample;
    sample.reserve(results.size());
    for (const PathResult& r : results) sample.push_back(r.event_integral);
    const double shape = (sc.event_beta - 2.0) / sc.event_beta;
    const double scale = inv_gamma_ml_scale(sample, shape);
    const double ks = ks_distance(
        sample, [shape, scale](double x) { return inv_gamma_cdf(x, shape, scale); });
    bool ok = ks < 0.03;
    std::string det = "KS " + short_num(ks) + " (want < 0.03), shape " + short_num(shape) +
                      ", fitted scale " + short_num(scale);
    return {"S8-dufresne", ok, det};
}

// Criterion 9: deterministic property bundle.
CriterionResult c9(int) {
    std::vector<std::string> fails;
    auto expect = [&fails](bool cond, const std::string& what) {
        if (!cond) fails.push_back(what);
    };

    // Kernel families: monotonicity, running infimum wiring, slope bound,
    // primitive derivative.
    {
        std::vector<Kernel> kernels = {parse_kernel("power:1.5"),  parse_kernel("power:1"),
                                       parse_kernel("reg:1"),      parse_kernel("log:1.2"),
                                       parse_kernel("const:0.7"),  parse_kernel("shift:power:1.5:0.2")};
        std::vector<double> rs;
        for (int i = 0; i <= 60; ++i) rs.push_back(1e-3 * std::pow(10.0, i / 10.0));
        for (const Kernel& ker : kernels) {
            for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
                double f0 = ker.eval(rs[i]), f1 = ker.eval(rs[i + 1]);
                expect(f1 <= f0 * (1.0 + 1e-12) + 1e-15,
                       ker.config_string() + " not non-increasing at r=" + short_num(rs[i]));
                double fd = std::abs(f1 - f0);
                double bound = ker.lipschitz_const(rs[i]) * (rs[i + 1] - rs[i]);
                expect(fd <= bound * (1.0 + 1e-9) + 1e-18,
                       ker.config_string() + " slope bound fails at r=" + short_num(rs[i]));
                if (ker.family() != KernelFamily::Shifted) {
                    expect(ker.running_inf(rs[i]) == ker.eval(rs[i]),
                           ker.config_string() + " running inf mismatch");
                } else {
                    double ri = ker.running_inf(rs[i]);
                    expect(ri <= ker.eval(rs[i]) + 1e-12 && ri >= ker.psi_star() - 1e-12,
                           ker.config_string() + " running inf out of range");
                }
            }
        }
        for (const char* spec : {"power:1.5", "power:1", "shift:power:1.5:0.2"}) {
            Kernel ker = parse_kernel(spec);
            for (int i = 0; i <= 40; ++i) {
                double r = 1e-2 * std::pow(10.0, i / 10.0);
                double h = 1e-6 * r;
                double fd = (ker.primitive(r + h) - ker.primitive(r - h)) / (2.0 * h);
                double want = ker.eval(r);
                expect(std::abs(fd - want) <= 1e-7 * (1.0 + std::abs(want)),
                       std::string(spec) + " primitive derivative off at r=" + short_num(r));
            }
        }
    }

    // Concave envelope: dominance, midpoint concavity, branch-point value.
    {
        std::vector<double> rs;
        for (int i = 0; i <= 40; ++i) rs.push_back(1e-2 * std::pow(10.0, i / 10.0));
        for (double t : {0.5, 2.0, 10.0})
            for (double a : {1.5, 3.0})
                for (double al : {0.3, 0.7})
                    for (double lam : {0.5, 2.0}) {
                        for (double r : rs) {
                            double env = concave_envelope(t, a, al, lam, r);
                            double base = envelope_base(t, a, al, lam, r);
                            expect(env - base >= -1e-12, "envelope below target");
                        }
                        for (std::size_t i = 0; i < rs.size(); ++i)
                            for (std::size_t j = i + 1; j < rs.size(); ++j) {
                                double mid = concave_envelope(t, a, al, lam, 0.5 * (rs[i] + rs[j]));
                                double chord = 0.5 * (concave_envelope(t, a, al, lam, rs[i]) +
                                                      concave_envelope(t, a, al, lam, rs[j]));
                                expect(mid >= chord - 1e-12, "envelope fails midpoint concavity");
                            }
                        double ap = a / (a - 1.0);
                        double rstar = 0.5 * std::pow(al * ap * lam * t, 1.0 / al);
                        double want = std::exp(-1.0 / al);
                        expect(std::abs(concave_envelope(t, a, al, lam, rstar) - want) <= 1e-12,
                               "branch point value off");
                        expect(std::abs(envelope_base(t, a, al, lam, rstar) - want) <= 1e-12,
                               "branch point target off");
                        expect(concave_envelope(t, a, al, lam, 0.0) == 0.0, "envelope(0) != 0");
                    }
    }

    // Bridge refinement preserves the original nodes bit for bit.
    {
        BrownianPath base = BrownianPath::sample(1.0, 0.25, 9001);
        BrownianPath fine = refine(base, 0.25, 0.5, 8);
        for (std::size_t k = 0; k < base.times.size(); ++k) {
            std::size_t j = fine.find_node(base.times[k]);
            expect(fine.values[j] == base.values[k], "refinement moved an original node");
        }
        expect(fine.times.size() == base.times.size() + 7, "refinement node count off");
    }

    // Decomposition identities and exact macro evolution.
    {
        rng::GaussianStream g{424242, 0};
        const int n = 5, d = 3;
        std::vector<double> raw(static_cast<std::size_t>(n) * d);
        for (double& v : raw) v = g.next();
        std::vector<double> mean, cent;
        decompose(raw, n, d, mean, cent);
        for (int c = 0; c < d; ++c) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += cent[static_cast<std::size_t>(i) * d + c];
            expect(std::abs(s) <= 1e-12, "centered sum not zero");
        }
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < d; ++c) {
                std::size_t at = static_cast<std::size_t>(i) * d + c;
                expect(std::abs(raw[at] - (mean[c] + cent[at])) <= 1e-12,
                       "decomposition does not reassemble");
            }
        std::vector<double> xbar0{0.3, -0.2}, vbar0{1.5, 0.25}, xb, vb;
        macro_evolution(xbar0, vbar0, 2.5, xb, vb);
        for (int c = 0; c < 2; ++c) {
            expect(xb[c] == xbar0[c] + vbar0[c] * 2.5, "macro position not exact");
            expect(vb[c] == vbar0[c], "macro velocity not constant");
        }
    }

    // Decay fits: planted rates, exactness, scaling invariance.
    {
        std::vector<double> ts, ye, ya;
        for (int i = 0; i <= 25; ++i) {
            double t = 0.2 * i;
            ts.push_back(t);
            ye.push_back(3.0 * std::exp(-2.0 * t));
            ya.push_back(std::pow(1.0 + t, -0.5));
        }
        RateFit fe = fit_decay(ts, ye, DecayModel::Exponential, 0.0, 5.0);
        expect(std::abs(fe.rate - 2.0) <= 1e-8, "planted exponential rate off");
        expect(std::abs(fe.intercept - 3.0) <= 1e-8, "planted exponential intercept off");
        expect(fe.r_squared >= 1.0 - 1e-12, "planted exponential r2 off");
        RateFit fa = fit_decay(ts, ya, DecayModel::Algebraic, 0.0, 5.0);
        expect(std::abs(fa.rate - 0.5) <= 1e-8, "planted algebraic rate off");
        std::vector<double> ys = ye;
        for (double& v : ys) v *= 7.25;
        RateFit fs = fit_decay(ts, ys, DecayModel::Exponential, 0.0, 5.0);
        expect(std::abs(fs.rate - fe.rate) <= 1e-12, "rate not scale invariant");
        expect(std::abs(fs.intercept / fe.intercept - 7.25) <= 1e-12,
               "intercept does not follow scaling");
    }

    // Worker-count independence, including the emitted reports.
    {
        Scenario sc = builtin_scenario("S2-comparison");
        sc.n_paths = 50;
        EnsembleStats one = run_ensemble(sc, 1).first;
        EnsembleStats three = run_ensemble(sc, 3).first;
        expect(one == three, "stats differ between 1 and 3 workers");
        expect(stats_to_json(one) == stats_to_json(three), "json differs across workers");
        expect(stats_to_csv(one) == stats_to_csv(three), "csv differs across workers");
        expect(stats_to_svg(one) == stats_to_svg(three), "svg differs across workers");
    }

    bool ok = fails.empty();
    std::string det;
    if (ok) {
        det = "kernel bounds, envelope, bridge, decomposition, macro, fits, determinism";
    } else {
        det = std::to_string(fails.size()) + " failure(s): " + fails.front();
        if (fails.size() > 1) det += " (+" + std::to_string(fails.size() - 1) + " more)";
    }
    return {"S9-properties", ok, det};
}

} // namespace

std::vector<CriterionResult> run_acceptance(int workers) {
    using Fn = CriterionResult (*)(int);
    struct Entry {
        const char* id;
        Fn fn;
    };
    const Entry entries[] = {{"S1-exp-flock", c1},  {"S2-comparison", c2},
                             {"S3-martingale", c3}, {"S4-collision-avoid", c4},
                             {"S5-event-A", c5},    {"S6-strong-order", c6},
                             {"S7-appendixA", c7},  {"S8-dufresne", c8},
                             {"S9-properties", c9}};
    std::vector<CriterionResult> rows;
    for (const Entry& e : entries) {
        auto start = std::chrono::steady_clock::now();
        CriterionResult row;
        try {
            row = e.fn(workers);
        } catch (const std::exception& ex) {
            row = {e.id, false, std::string("exception: ") + ex.what()};
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char buf[32];
        std::snprintf(buf, sizeof buf, " [%.1fs]", secs);
        row.detail += buf;
        rows.push_back(std::move(row));
    }
    return rows;
}

bool print_acceptance(std::ostream& os, const std::vector<CriterionResult>& rows) {
    bool all = true;
    for (const CriterionResult& r : rows) {
        os << r.id << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.detail << ")\n";
        if (!r.pass) all = false;
    }
    return all;
}

} // namespace flocksim
