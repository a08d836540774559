#include "flocksim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flocksim/errors.hpp"
#include "flocksim/numfmt.hpp"
#include "flocksim/rng.hpp"

namespace flocksim {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// Output times are generated as exact grid multiples but may differ from node
// times by accumulated rounding; the match window stays far below any legal
// step size.
double match_eps(double t) { return 2e-12 * std::max(1.0, std::abs(t)); }

} // namespace

void InitialSampler::sample(std::uint64_t key, int n, int d,
                            std::vector<double>& x, std::vector<double>& v) const {
    const std::size_t nd = static_cast<std::size_t>(n) * static_cast<std::size_t>(d);
    x.assign(nd, 0.0);
    v.assign(nd, 0.0);
    rng::GaussianStream gs{key, 0};
    switch (kind) {
    case Kind::UniformGauss:
        for (std::size_t i = 0; i < nd; ++i) x[i] = p1 * (2.0 * gs.next_u01() - 1.0);
        for (std::size_t i = 0; i < nd; ++i) v[i] = p2 * gs.next();
        break;
    case Kind::Gauss:
        for (std::size_t i = 0; i < nd; ++i) x[i] = p1 * gs.next();
        for (std::size_t i = 0; i < nd; ++i) v[i] = p2 * gs.next();
        break;
    case Kind::Lattice:
    case Kind::Crossing:
        for (int i = 0; i < n; ++i) {
            const double xi = (n == 1) ? 0.0 : -p1 + 2.0 * p1 * (static_cast<double>(i) / (n - 1));
            x[static_cast<std::size_t>(i) * d] = xi;
            if (kind == Kind::Lattice)
                v[static_cast<std::size_t>(i) * d] = (i % 2 == 0) ? p2 : -p2;
            else
                v[static_cast<std::size_t>(i) * d] = -(p2 / p1) * xi;
        }
        break;
    case Kind::TwoParticle:
        if (n != 2 || d != 1)
            throw ConfigError("two_particle sampler requires n=2, d=1");
        x[0] = 0.5 * p1;
        x[1] = -0.5 * p1;
        v[0] = 0.5 * p2;
        v[1] = -0.5 * p2;
        break;
    case Kind::Zero:
        if (n != 1) throw ConfigError("zero sampler requires n=1");
        break;
    }
}

std::string InitialSampler::config_string() const {
    switch (kind) {
    case Kind::UniformGauss:
        return "uniform_gauss:" + num_to_string(p1) + ":" + num_to_string(p2);
    case Kind::Gauss:
        return "gauss:" + num_to_string(p1) + ":" + num_to_string(p2);
    case Kind::Lattice:
        return "lattice:" + num_to_string(p1) + ":" + num_to_string(p2);
    case Kind::Crossing:
        return "crossing:" + num_to_string(p1) + ":" + num_to_string(p2);
    case Kind::TwoParticle:
        return "two_particle:" + num_to_string(p1) + ":" + num_to_string(p2);
    case Kind::Zero:
        return "zero";
    }
    return "";
}

InitialSampler parse_sampler(const std::string& spec) {
    const auto parts = split(spec, ':');
    InitialSampler s;
    if (parts[0] == "zero") {
        if (parts.size() != 1) throw ConfigError("zero sampler takes no parameters");
        s.kind = InitialSampler::Kind::Zero;
        return s;
    }
    if (parts.size() != 3)
        throw ConfigError("sampler spec '" + spec + "': expected <kind>:<p1>:<p2>");
    if (parts[0] == "uniform_gauss") s.kind = InitialSampler::Kind::UniformGauss;
    else if (parts[0] == "gauss") s.kind = InitialSampler::Kind::Gauss;
    else if (parts[0] == "lattice") s.kind = InitialSampler::Kind::Lattice;
    else if (parts[0] == "crossing") s.kind = InitialSampler::Kind::Crossing;
    else if (parts[0] == "two_particle") s.kind = InitialSampler::Kind::TwoParticle;
    else throw ConfigError("unknown sampler kind '" + parts[0] + "'");
    s.p1 = parse_double(parts[1], "sampler p1");
    s.p2 = parse_double(parts[2], "sampler p2");
    if (s.kind != InitialSampler::Kind::TwoParticle && !(s.p1 > 0.0))
        throw ConfigError("sampler scale p1 must be positive");
    return s;
}

std::vector<double> StepController::cutoff_sequence() const {
    if (!(cutoff_a1 > 0.0) || !(cutoff_ratio > 0.0) || cutoff_ratio >= 1.0)
        throw ConfigError("cutoff sequence requires a1 > 0 and ratio in (0,1)");
    if (!(collision_threshold > 0.0) || collision_threshold > cutoff_a1)
        throw ConfigError("collision threshold must lie in (0, a1]");
    std::vector<double> seq;
    double a = cutoff_a1;
    while (a > collision_threshold) {
        seq.push_back(a);
        a *= cutoff_ratio;
    }
    seq.push_back(collision_threshold);
    return seq;
}

double StepController::dt_eff(double min_dist, double vn2) const {
    double dt = c_cfl * min_dist / (1.0 + vn2);
    if (!(dt < dt_base)) dt = dt_base; // also catches min_dist = inf
    if (dt < dt_min) dt = dt_min;
    return dt;
}

double min_pair_distance(const std::vector<double>& x, int n, int d) {
    if (n < 2) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double dx = x[static_cast<std::size_t>(i) * d + k] -
                                  x[static_cast<std::size_t>(j) * d + k];
                r2 += dx * dx;
            }
            if (r2 < best) best = r2;
        }
    }
    return std::sqrt(best);
}

void drift_into(const SystemState& state, const SystemConfig& cfg,
                const CutoffKernel& active, std::vector<double>& out) {
    const int n = cfg.n, d = cfg.d;
    out.assign(static_cast<std::size_t>(n) * d, 0.0);
    const double w = cfg.lambda / n;
    for (int i = 0; i < n; ++i) {
        const std::size_t bi = static_cast<std::size_t>(i) * d;
        for (int j = i + 1; j < n; ++j) {
            const std::size_t bj = static_cast<std::size_t>(j) * d;
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double dx = state.x[bi + k] - state.x[bj + k];
                r2 += dx * dx;
            }
            const double c = w * active.eval(std::sqrt(r2));
            for (int k = 0; k < d; ++k) {
                const double dv = c * (state.v[bj + k] - state.v[bi + k]);
                out[bi + k] += dv;
                out[bj + k] -= dv;
            }
        }
    }
}

std::vector<double> drift(const SystemState& state, const SystemConfig& cfg,
                          const CutoffKernel& active) {
    std::vector<double> out;
    drift_into(state, cfg, active, out);
    return out;
}

void em_step_inplace(SystemState& state, double dt, double dW,
                     const SystemConfig& cfg, const CutoffKernel& active) {
    if (!(dt > 0.0)) throw DomainError("em_step: dt must be positive");
    thread_local std::vector<double> b;
    drift_into(state, cfg, active, b);
    const std::size_t nd = state.x.size();
    const double g = cfg.noise.at(state.t) * dW;
    double xs = 0.0, vs = 0.0;
    for (std::size_t i = 0; i < nd; ++i) {
        state.x[i] += state.v[i] * dt;
        xs += state.x[i] * state.x[i];
    }
    for (std::size_t i = 0; i < nd; ++i) {
        state.v[i] += b[i] * dt + g * state.v[i];
        vs += state.v[i] * state.v[i];
    }
    state.vnorm2 = std::sqrt(vs);
    state.m_now += g;
    state.w_now += dW;
    state.t += dt;
    state.qv_now = cfg.noise.quad_variation(state.t);
    state.min_dist = min_pair_distance(state.x, cfg.n, cfg.d);
    if (!std::isfinite(xs) || !std::isfinite(vs))
        throw NumericalError("non-finite coordinate after step at t=" + num_to_string(state.t));
}

SystemState em_step(const SystemState& state, double dt, double dW,
                    const SystemConfig& cfg, const CutoffKernel& active) {
    SystemState next = state;
    em_step_inplace(next, dt, dW, cfg, active);
    return next;
}

void decompose(const std::vector<double>& raw, int n, int d,
               std::vector<double>& mean, std::vector<double>& centered) {
    mean.assign(static_cast<std::size_t>(d), 0.0);
    centered.resize(raw.size());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k)
            mean[static_cast<std::size_t>(k)] += raw[static_cast<std::size_t>(i) * d + k];
    for (int k = 0; k < d; ++k) mean[static_cast<std::size_t>(k)] /= n;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k)
            centered[static_cast<std::size_t>(i) * d + k] =
                raw[static_cast<std::size_t>(i) * d + k] - mean[static_cast<std::size_t>(k)];
}

void macro_evolution(const std::vector<double>& xbar0, const std::vector<double>& vbar0,
                     double t, std::vector<double>& xbar, std::vector<double>& vbar) {
    if (t < 0.0) throw DomainError("macro_evolution: negative time");
    xbar.resize(xbar0.size());
    vbar = vbar0;
    for (std::size_t k = 0; k < xbar0.size(); ++k) xbar[k] = xbar0[k] + vbar0[k] * t;
}

double lp_norm(const std::vector<double>& y, int n, int d, double p) {
    if (!(p >= 2.0)) throw DomainError("lp_norm: p must be >= 2");
    const bool use_max = std::isinf(p);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) {
            const double c = y[static_cast<std::size_t>(i) * d + k];
            r2 += c * c;
        }
        if (use_max) {
            acc = std::max(acc, r2);
        } else if (p == 2.0) {
            acc += r2;
        } else {
            acc += std::pow(r2, 0.5 * p);
        }
    }
    if (use_max) return std::sqrt(acc);
    if (p == 2.0) return std::sqrt(acc);
    return std::pow(acc, 1.0 / p);
}

namespace {

struct OutputRecorder {
    PathResult* res;
    const SystemConfig* cfg;
    const std::vector<double>* grid;
    const std::vector<double>* p_list;
    const std::vector<double>* vint_acc;
    std::size_t next = 0;
    bool record_relative = false;

    bool pending() const { return next < grid->size(); }
    double next_time() const { return (*grid)[next]; }

    void record(const SystemState& st, bool frozen, const CollisionRecord* pending_pair) {
        const std::size_t o = next++;
        for (std::size_t pi = 0; pi < p_list->size(); ++pi) {
            const double p = (*p_list)[pi];
            res->xnorm[pi][o] = lp_norm(st.x, cfg->n, cfg->d, p);
            res->vnorm[pi][o] = lp_norm(st.v, cfg->n, cfg->d, p);
            res->vint[pi][o] = (*vint_acc)[pi];
        }
        res->min_dist[o] = st.min_dist;
        res->m_values[o] = st.m_now;
        res->qv_values[o] = st.qv_now;
        {
            double s2 = 0.0;
            for (int c = 0; c < cfg->d; ++c) {
                double s = 0.0;
                for (int i = 0; i < cfg->n; ++i)
                    s += st.v[static_cast<std::size_t>(i) * cfg->d + c];
                s2 += s * s;
            }
            res->max_vsum = std::max(res->max_vsum, std::sqrt(s2));
        }
        if (record_relative) {
            res->relative->x[o] = st.x[0] - st.x[1];
            res->relative->v[o] = st.v[0] - st.v[1];
        }
        if (frozen && !res->collision) {
            CollisionRecord rec = *pending_pair;
            rec.time = (*grid)[o];
            res->collision = rec;
        }
    }
};

} // namespace

PathResult simulate_on_path(const SystemConfig& cfg, const StepController& ctrl,
                            double horizon, BrownianPath& path, std::uint64_t path_seed,
                            const std::vector<double>& output_grid,
                            const std::vector<double>& p_list) {
    if (!(horizon > 0.0)) throw ConfigError("simulate: horizon must be positive");
    if (output_grid.empty()) throw ConfigError("simulate: empty output grid");
    for (std::size_t i = 0; i < output_grid.size(); ++i) {
        if (output_grid[i] < 0.0 || output_grid[i] > horizon + match_eps(horizon))
            throw ConfigError("simulate: output grid leaves [0, horizon]");
        if (i > 0 && !(output_grid[i] > output_grid[i - 1]))
            throw ConfigError("simulate: output grid must be strictly increasing");
    }
    if (p_list.empty()) throw ConfigError("simulate: empty norm list");
    for (double p : p_list)
        if (!(p >= 2.0)) throw DomainError("simulate: norms require p >= 2");
    if (path.times.empty() || path.times.front() != 0.0 ||
        path.times.back() < horizon - match_eps(horizon))
        throw ConfigError("simulate: path does not cover [0, horizon]");

    PathResult res;
    res.seed = path_seed;
    res.p_list = p_list;
    res.sample_times = output_grid;
    const std::size_t n_out = output_grid.size();
    const std::size_t n_p = p_list.size();
    res.xnorm.assign(n_p, std::vector<double>(n_out, 0.0));
    res.vnorm.assign(n_p, std::vector<double>(n_out, 0.0));
    res.vint.assign(n_p, std::vector<double>(n_out, 0.0));
    res.min_dist.assign(n_out, 0.0);
    res.m_values.assign(n_out, 0.0);
    res.qv_values.assign(n_out, 0.0);

    SystemState st;
    {
        std::vector<double> raw_x, raw_v;
        cfg.sampler.sample(rng::hash2(path_seed, rng::kTagInit), cfg.n, cfg.d, raw_x, raw_v);
        decompose(raw_x, cfg.n, cfg.d, res.macro_x0, st.x);
        decompose(raw_v, cfg.n, cfg.d, res.macro_v0, st.v);
    }
    st.t = 0.0;
    st.qv_now = 0.0;
    st.min_dist = min_pair_distance(st.x, cfg.n, cfg.d);
    st.vnorm2 = lp_norm(st.v, cfg.n, cfg.d, 2.0);

    std::vector<double> vint_acc(n_p, 0.0);

    OutputRecorder out;
    out.res = &res;
    out.cfg = &cfg;
    out.grid = &output_grid;
    out.p_list = &p_list;
    out.vint_acc = &vint_acc;
    out.record_relative = (cfg.n == 2 && cfg.d == 1);
    if (out.record_relative) {
        res.relative.emplace();
        res.relative->x.assign(n_out, 0.0);
        res.relative->v.assign(n_out, 0.0);
    }

    const std::vector<double> cutoffs = ctrl.cutoff_sequence();
    auto active_radius = [&cutoffs](double min_dist) {
        for (double a : cutoffs)
            if (a < min_dist) return a;
        return cutoffs.back();
    };

    bool frozen = st.min_dist < ctrl.collision_threshold;
    CollisionRecord pending_pair;
    auto note_pair = [&]() {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < cfg.n; ++i) {
            for (int j = i + 1; j < cfg.n; ++j) {
                double r2 = 0.0;
                for (int k = 0; k < cfg.d; ++k) {
                    const double dx = st.x[static_cast<std::size_t>(i) * cfg.d + k] -
                                      st.x[static_cast<std::size_t>(j) * cfg.d + k];
                    r2 += dx * dx;
                }
                if (r2 < best) {
                    best = r2;
                    pending_pair.i = i;
                    pending_pair.j = j;
                }
            }
        }
    };
    if (frozen) note_pair();

    std::size_t k = 0;
    while (true) {
        while (out.pending() && out.next_time() <= st.t + match_eps(out.next_time()))
            out.record(st, frozen, &pending_pair);
        if (!out.pending()) break;
        if (frozen) {
            // Trajectory is frozen at the collision state; remaining outputs
            // repeat it.
            while (out.pending()) out.record(st, true, &pending_pair);
            break;
        }
        if (st.t >= horizon - match_eps(horizon)) break;
        if (k + 1 >= path.times.size())
            throw ConfigError("simulate: path grid ended before horizon");

        double span = path.times[k + 1] - path.times[k];
        const double dt_eff = ctrl.dt_eff(st.min_dist, st.vnorm2);
        if (span > dt_eff * (1.0 + 1e-9)) {
            const double want = std::max(dt_eff, ctrl.dt_min);
            int parts = static_cast<int>(std::ceil(span / want - 1e-12));
            const int cap = static_cast<int>(std::ceil(span / ctrl.dt_min));
            parts = std::min(parts, cap);
            if (parts >= 2) {
                path.refine(path.times[k], path.times[k + 1], parts);
                span = path.times[k + 1] - path.times[k];
            }
        }
        const double dW = path.values[k + 1] - path.values[k];
        const CutoffKernel active{&cfg.kernel, active_radius(st.min_dist)};
        const double t_next = path.times[k + 1];
        // The position update uses the pre-step velocity, so the running
        // integral of |v|_p must be accumulated before stepping.
        for (std::size_t pi = 0; pi < n_p; ++pi) {
            const double vn = (p_list[pi] == 2.0) ? st.vnorm2
                                                  : lp_norm(st.v, cfg.n, cfg.d, p_list[pi]);
            vint_acc[pi] += vn * span;
        }
        em_step_inplace(st, span, dW, cfg, active);
        st.t = t_next; // keep node times exact
        st.qv_now = cfg.noise.quad_variation(st.t);
        ++k;
        if (st.min_dist < ctrl.collision_threshold) {
            frozen = true;
            note_pair();
        }
    }

    res.status = frozen ? PathStatus::Collided : PathStatus::Completed;
    return res;
}

PathResult simulate_path(const SystemConfig& cfg, const StepController& ctrl,
                         double horizon, std::uint64_t path_seed,
                         const std::vector<double>& output_grid,
                         const std::vector<double>& p_list) {
    BrownianPath path = BrownianPath::sample(horizon, ctrl.dt_base,
                                             rng::hash2(path_seed, rng::kTagWiener));
    return simulate_on_path(cfg, ctrl, horizon, path, path_seed, output_grid, p_list);
}

} // namespace flocksim
