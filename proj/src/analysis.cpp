#include "flocksim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flocksim/errors.hpp"

namespace flocksim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

double exp_martingale(const MartingaleTrack& track, double t) {
    std::size_t k = track.find_node(t);
    return exp_martingale_value(track.m_values[k], track.qv_values[k]);
}

double comparison_process(const MartingaleTrack& track, double psi_star, double lambda,
                          double v0_norm, double t) {
    if (psi_star < 0.0 || lambda < 0.0 || v0_norm < 0.0)
        throw DomainError("comparison_process: psi_star, lambda, v0_norm must be nonnegative");
    std::size_t k = track.find_node(t);
    return comparison_value(track.m_values[k], track.qv_values[k], psi_star, lambda, v0_norm,
                            track.times[k]);
}

ExpFunctional exp_functional(const BrownianPath& path, double drift_coef, double vol_coef,
                             double t_trunc, double c_lil) {
    if (!(drift_coef > 0.0) || !std::isfinite(drift_coef))
        throw DomainError("exp_functional: drift_coef must be positive");
    if (!std::isfinite(vol_coef)) throw DomainError("exp_functional: vol_coef must be finite");
    if (!(t_trunc > 0.0)) throw DomainError("exp_functional: t_trunc must be positive");
    if (c_lil < 0.0) throw DomainError("exp_functional: c_lil must be nonnegative");
    if (path.times.size() < 2) throw GridError("exp_functional: path has no increments");

    // Truncate at the path end when the path is shorter than requested; the
    // tail bound is then taken from the realized endpoint, so the value/tail
    // pair stays a valid bracket.
    const double t_end = std::min(t_trunc, path.times.back());

    auto integrand = [&](double s, double w) { return std::exp(vol_coef * w - drift_coef * s); };

    double acc = 0.0;
    double w_end = 0.0;
    double f_prev = integrand(path.times[0], path.values[0]);
    for (std::size_t k = 1; k < path.times.size(); ++k) {
        double t0 = path.times[k - 1], t1 = path.times[k];
        if (t1 <= t_end) {
            double f1 = integrand(t1, path.values[k]);
            acc += 0.5 * (f_prev + f1) * (t1 - t0);
            f_prev = f1;
            w_end = path.values[k];
            if (t1 == t_end) break;
        } else {
            // Cut the last segment at t_end; W is interpolated linearly,
            // the conditional mean of the bridge.
            double frac = (t_end - t0) / (t1 - t0);
            double w_cut = path.values[k - 1] + frac * (path.values[k] - path.values[k - 1]);
            double f_cut = integrand(t_end, w_cut);
            acc += 0.5 * (f_prev + f_cut) * (t_end - t0);
            w_end = w_cut;
            break;
        }
    }

    double denom = drift_coef - vol_coef * c_lil;
    double tail = denom > 0.0 ? integrand(t_end, w_end) / denom : kInf;
    return ExpFunctional{acc, tail};
}

void EventAParams::validate() const {
    if (!(beta > 2.0) || !std::isfinite(beta))
        throw DomainError("event_A: beta must exceed 2");
    if (!(q > 1.0)) throw DomainError("event_A: q must exceed 1");
    if (!(lambda > 0.0)) throw DomainError("event_A: lambda must be positive");
    if (D == 0.0 || !std::isfinite(D)) throw DomainError("event_A: D must be nonzero");
    if (c_lil < 0.0) throw DomainError("event_A: c_lil must be nonnegative");
}

double EventAParams::constant() const {
    if (const_factor > 0.0) return const_factor;
    return std::pow(std::exp2(beta + 1.0) / (beta * lambda), 2.0 / beta);
}

double EventAParams::effective_t_trunc() const {
    return t_trunc > 0.0 ? t_trunc : 50.0 / drift_coef();
}

EventEval event_A_eval(double x0_norm, double v0_norm, const EventAParams& params,
                       const BrownianPath& path) {
    params.validate();
    if (x0_norm < 0.0 || v0_norm < 0.0)
        throw DomainError("event_A: initial norms must be nonnegative");

    ExpFunctional ef = exp_functional(path, params.drift_coef(), params.vol_coef(),
                                      params.effective_t_trunc(), params.c_lil);
    EventEval out;
    out.integral = ef.value;
    out.tail = ef.tail_bound;

    double base = 4.0 * x0_norm * v0_norm * params.constant();
    double expo = 1.0 - 2.0 / params.beta; // in (0,1) for beta > 2
    if (base == 0.0) {
        // Degenerate initial data; the comparison threshold is met outright.
        out.g_low = 0.0;
        out.g_high = 0.0;
        out.cls = EventClass::InA;
        return out;
    }
    out.g_low = base * std::pow(ef.value, expo);
    out.g_high = std::isinf(ef.tail_bound) ? kInf
                                           : base * std::pow(ef.value + ef.tail_bound, expo);
    if (out.g_high < 1.0)
        out.cls = EventClass::InA;
    else if (out.g_low >= 1.0)
        out.cls = EventClass::NotInA;
    else
        out.cls = EventClass::Indeterminate;
    return out;
}

EventClass event_A(double x0_norm, double v0_norm, const EventAParams& params,
                   const BrownianPath& path) {
    return event_A_eval(x0_norm, v0_norm, params, path).cls;
}

RateFit fit_decay(const std::vector<double>& times, const std::vector<double>& ys,
                  DecayModel model, double window_lo, double window_hi) {
    if (times.size() != ys.size()) throw DomainError("fit_decay: length mismatch");
    if (!(window_lo < window_hi)) throw DomainError("fit_decay: empty window");

    std::vector<double> u, logy;
    double ymin = kInf, ymax = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double t = times[k];
        if (t < window_lo || t > window_hi) continue;
        double y = ys[k];
        if (!(y > 0.0)) throw DomainError("fit_decay: values must be positive in window");
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
        u.push_back(model == DecayModel::Exponential ? t : std::log1p(t));
        logy.push_back(std::log(y));
    }
    if (u.size() < 5) throw DegenerateFit("fit_decay: fewer than 5 points in window");
    if (ymax / ymin < 1.01) throw DegenerateFit("fit_decay: series is flat over the window");

    LinearFit ls = ols(u, logy);
    RateFit out;
    out.model = model;
    out.rate = -ls.slope;
    out.intercept = std::exp(ls.intercept);
    out.r_squared = ls.r_squared;
    out.window_lo = window_lo;
    out.window_hi = window_hi;
    return out;
}

namespace {

// Mean and standard error across paths at each grid index; `pick` maps a path
// to its series. Runs in path-index order for worker-count independence.
template <typename Pick>
SeriesStat reduce_series(const std::vector<PathResult>& results,
                         const std::vector<unsigned char>* mask, std::size_t len, Pick pick) {
    SeriesStat out;
    out.mean.assign(len, 0.0);
    out.se.assign(len, 0.0);
    long n = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        ++n;
        const std::vector<double>& row = pick(results[i]);
        for (std::size_t k = 0; k < len; ++k) out.mean[k] += row[k];
    }
    for (std::size_t k = 0; k < len; ++k) out.mean[k] /= static_cast<double>(n);
    if (n >= 2) {
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (mask && !(*mask)[i]) continue;
            const std::vector<double>& row = pick(results[i]);
            for (std::size_t k = 0; k < len; ++k) {
                double d = row[k] - out.mean[k];
                out.se[k] += d * d;
            }
        }
        double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n));
        for (std::size_t k = 0; k < len; ++k) out.se[k] = std::sqrt(out.se[k] * scale);
    }
    return out;
}

} // namespace

EnsembleStats flocking_metrics(const std::vector<PathResult>& results,
                               const std::vector<unsigned char>* mask) {
    if (results.empty()) throw EmptyEnsemble("flocking_metrics: no paths");
    if (mask && mask->size() != results.size())
        throw DomainError("flocking_metrics: mask length mismatch");

    const PathResult& first = results.front();
    for (const PathResult& r : results) {
        if (r.sample_times != first.sample_times)
            throw DomainError("flocking_metrics: paths disagree on the sample grid");
        if (r.p_list != first.p_list)
            throw DomainError("flocking_metrics: paths disagree on recorded norms");
    }

    EnsembleStats st;
    st.grid = first.sample_times;
    st.n_paths = static_cast<long>(results.size());
    st.p_list = first.p_list;
    const std::size_t len = st.grid.size();

    for (std::size_t pi = 0; pi < st.p_list.size(); ++pi) {
        st.mean_vnorm.push_back(reduce_series(
            results, nullptr, len, [pi](const PathResult& r) -> const std::vector<double>& {
                return r.vnorm[pi];
            }));
        st.mean_xnorm.push_back(reduce_series(
            results, nullptr, len, [pi](const PathResult& r) -> const std::vector<double>& {
                return r.xnorm[pi];
            }));
    }

    if (mask) {
        st.mask_count = static_cast<long>(std::count(mask->begin(), mask->end(), 1));
        if (st.mask_count > 0) {
            st.has_conditional = true;
            for (std::size_t pi = 0; pi < st.p_list.size(); ++pi) {
                st.cond_mean_vnorm.push_back(reduce_series(
                    results, mask, len, [pi](const PathResult& r) -> const std::vector<double>& {
                        return r.vnorm[pi];
                    }));
                st.cond_mean_xnorm.push_back(reduce_series(
                    results, mask, len, [pi](const PathResult& r) -> const std::vector<double>& {
                        return r.xnorm[pi];
                    }));
            }
        }
    }

    long collided = 0;
    for (const PathResult& r : results)
        if (r.status == PathStatus::Collided) ++collided;
    st.collision_frequency = wilson_interval(collided, st.n_paths);

    long classified = 0, in_a = 0;
    bool any_event = false;
    for (const PathResult& r : results) {
        if (!r.event_class) continue;
        any_event = true;
        if (*r.event_class == EventClass::Indeterminate) {
            ++st.indeterminate_count;
        } else {
            ++classified;
            if (*r.event_class == EventClass::InA) ++in_a;
        }
    }
    st.has_event = any_event;
    if (classified > 0) st.event_frequency = wilson_interval(in_a, classified);

    // E[exp(M_t - [M]_t/2)] = 1 at every grid time (unit-mean martingale).
    {
        std::vector<std::vector<double>> rows(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) {
            rows[i].resize(len);
            for (std::size_t k = 0; k < len; ++k)
                rows[i][k] = exp_martingale_value(results[i].m_values[k], results[i].qv_values[k]);
        }
        st.martingale_mean = reduce_series(
            results, nullptr, len,
            [&rows, &results](const PathResult& r) -> const std::vector<double>& {
                return rows[static_cast<std::size_t>(&r - results.data())];
            });
    }
    return st;
}

double cluster_norm(const std::vector<double>& y, int n, int d, const std::vector<int>& idx) {
    if (n <= 0 || d <= 0 || y.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d))
        throw DomainError("cluster_norm: state length must be n*d");
    if (idx.empty()) throw BadIndex("cluster_norm: empty index set");
    for (int i : idx)
        if (i < 0 || i >= n) throw BadIndex("cluster_norm: particle index out of range");

    // Ordered pairs: every unordered pair counts twice.
    double acc = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const double* ya = y.data() + static_cast<std::size_t>(idx[a]) * d;
            const double* yb = y.data() + static_cast<std::size_t>(idx[b]) * d;
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                double diff = ya[k] - yb[k];
                r2 += diff * diff;
            }
            acc += 2.0 * r2;
        }
    }
    return std::sqrt(acc);
}

std::pair<double, double> collision_lyapunov(const SystemState& state,
                                             const std::vector<int>& idx, const Kernel& kernel,
                                             double lambda, int n) {
    if (n <= 0 || state.x.size() % static_cast<std::size_t>(n) != 0)
        throw DomainError("collision_lyapunov: state does not factor into n particles");
    int d = static_cast<int>(state.x.size() / static_cast<std::size_t>(n));
    double cx = cluster_norm(state.x, n, d, idx);
    double cv = cluster_norm(state.v, n, d, idx);
    if (!(cx > 0.0))
        throw DomainError("collision_lyapunov: cluster positions coincide");
    double psi_primitive = kernel.primitive(cx);
    double coupling = (lambda / static_cast<double>(n)) * psi_primitive;
    return {cv + coupling, cv - coupling};
}

namespace {

// Adaptive Simpson for kernel tails without a closed form.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

double kernel_tail_integral(const Kernel& kernel, double x) {
    if (!(x > 0.0)) throw DomainError("kernel_tail_integral: lower limit must be positive");
    switch (kernel.family()) {
    case KernelFamily::PowerLaw: {
        double a = kernel.alpha();
        if (!(a > 1.0)) throw Unsupported("kernel_tail_integral: power tail diverges for alpha <= 1");
        return std::pow(x, 1.0 - a) / (a - 1.0);
    }
    case KernelFamily::Regularized: {
        double a = kernel.alpha();
        if (!(a > 1.0))
            throw Unsupported("kernel_tail_integral: regularized tail diverges for alpha <= 1");
        if (a == 2.0) return std::atan2(1.0, x); // pi/2 - atan(x)
        // Split off the exact power-law envelope r^{-a}; the remainder decays
        // like r^{-a-2}, so under the map r = x + u/(1-u) it vanishes at u = 1
        // and the quadrature actually meets its tolerance.
        auto g = [a, x](double u) {
            double om = 1.0 - u;
            if (om <= 0.0) return 0.0;
            double r = x + u / om;
            double rem = std::pow(r, -a) * std::expm1(-0.5 * a * std::log1p(1.0 / (r * r)));
            return rem / (om * om);
        };
        return std::pow(x, 1.0 - a) / (a - 1.0) + adaptive_simpson(g, 0.0, 1.0 - 1e-12, 1e-12);
    }
    default:
        throw Unsupported("kernel_tail_integral: no integrable tail for this family");
    }
}

TwoParticleBound two_particle_lower_bound(const std::vector<PathResult>& results,
                                          const Kernel& kernel, double lambda) {
    if (results.empty()) throw EmptyEnsemble("two_particle_lower_bound: no paths");
    for (const PathResult& r : results)
        if (!r.relative)
            throw WrongScenario("two_particle_lower_bound: needs scalar two-particle paths");
    const std::vector<double>& grid = results.front().sample_times;
    for (const PathResult& r : results)
        if (r.sample_times != grid)
            throw DomainError("two_particle_lower_bound: paths disagree on the sample grid");

    TwoParticleBound out;
    out.times = grid;
    out.n = static_cast<long>(results.size());
    const std::size_t len = grid.size();

    // Event: initial relative velocity already dominates the coupling tail.
    std::vector<unsigned char> mask(results.size(), 0);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const RelativeSeries& rel = *results[i].relative;
        if (rel.x.empty() || rel.x[0] <= 0.0) continue;
        if (rel.v[0] >= lambda * kernel_tail_integral(kernel, rel.x[0])) mask[i] = 1;
    }
    out.mask_count = std::count(mask.begin(), mask.end(), 1);
    if (out.mask_count == 0) {
        out.omitted = true;
        return out;
    }

    std::vector<std::vector<double>> vrows, trows, drows;
    vrows.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        std::vector<double> vr(len, 0.0), tr(len, 0.0), dr(len, 0.0);
        if (mask[i]) {
            const RelativeSeries& rel = *results[i].relative;
            for (std::size_t k = 0; k < len; ++k) {
                vr[k] = rel.v[k];
                // A nonpositive separation voids the bound; surface it as +inf
                // rather than silently skipping the path.
                tr[k] = rel.x[k] > 0.0 ? lambda * kernel_tail_integral(kernel, rel.x[k]) : kInf;
                dr[k] = vr[k] - tr[k];
            }
        }
        vrows.push_back(std::move(vr));
        trows.push_back(std::move(tr));
        drows.push_back(std::move(dr));
    }

    auto masked_reduce = [&](const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                             std::vector<double>& se) {
        mean.assign(len, 0.0);
        se.assign(len, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!mask[i]) continue;
            for (std::size_t k = 0; k < len; ++k) mean[k] += rows[i][k];
        }
        for (std::size_t k = 0; k < len; ++k) mean[k] /= static_cast<double>(out.mask_count);
        if (out.mask_count >= 2) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!mask[i]) continue;
                for (std::size_t k = 0; k < len; ++k) {
                    double d = rows[i][k] - mean[k];
                    se[k] += d * d;
                }
            }
            double scale = 1.0 / (static_cast<double>(out.mask_count - 1) *
                                  static_cast<double>(out.mask_count));
            for (std::size_t k = 0; k < len; ++k) se[k] = std::sqrt(se[k] * scale);
        }
    };
    masked_reduce(vrows, out.mean_v, out.se_v);
    masked_reduce(trows, out.mean_tail, out.se_tail);
    masked_reduce(drows, out.mean_diff, out.se_diff);
    return out;
}

double envelope_base(double t, double a, double alpha, double lambda, double r) {
    if (!(t > 0.0) || !(a > 1.0) || !(alpha > 0.0) || !(alpha < 1.0) || !(lambda > 0.0))
        throw DomainError("envelope: need t > 0, a > 1, alpha in (0,1), lambda > 0");
    if (r < 0.0) throw DomainError("envelope: r must be nonnegative");
    if (r == 0.0) return 0.0;
    double ap = a / (a - 1.0);
    return std::exp(-ap * lambda * t * std::pow(2.0 * r, -alpha));
}

double concave_envelope(double t, double a, double alpha, double lambda, double r) {
    if (!(t > 0.0) || !(a > 1.0) || !(alpha > 0.0) || !(alpha < 1.0) || !(lambda > 0.0))
        throw DomainError("envelope: need t > 0, a > 1, alpha in (0,1), lambda > 0");
    if (r < 0.0) throw DomainError("envelope: r must be nonnegative");
    double ap = a / (a - 1.0);
    double s = alpha * ap * lambda * t;
    double r_star = 0.5 * std::pow(s, 1.0 / alpha);
    if (r <= r_star) return 2.0 * r * std::pow(std::exp(1.0) * s, -1.0 / alpha);
    return envelope_base(t, a, alpha, lambda, r);
}

} // namespace flocksim
