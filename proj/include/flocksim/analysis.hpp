#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flocksim/brownian.hpp"
#include "flocksim/integrator.hpp"
#include "flocksim/kernels.hpp"
#include "flocksim/stats.hpp"

namespace flocksim {

// Exponential martingale E(t) = exp(M_t - [M]_t/2); unit mean at every time.
inline double exp_martingale_value(double m, double qv) { return std::exp(m - 0.5 * qv); }
double exp_martingale(const MartingaleTrack& track, double t);

// Dominating process V(t) = v0_norm * exp(-lambda psi_* t) * E(t), evaluated
// against the same Brownian realization as the trajectory it bounds.
inline double comparison_value(double m, double qv, double psi_star, double lambda,
                               double v0_norm, double t) {
    return v0_norm * std::exp(-lambda * psi_star * t) * exp_martingale_value(m, qv);
}
double comparison_process(const MartingaleTrack& track, double psi_star, double lambda,
                          double v0_norm, double t);

// Truncated exponential functional int_0^{t_trunc} exp(vol W(s) - drift s) ds
// by the trapezoid rule over the path nodes, together with an analytic bound
// on the discarded tail computed from the realized endpoint and a linear
// drift margin c_lil (law-of-iterated-logarithm allowance). The pair lets a
// caller decide whether a classification is truncation-robust.
struct ExpFunctional {
    double value = 0.0;
    double tail_bound = 0.0;
};
ExpFunctional exp_functional(const BrownianPath& path, double drift_coef, double vol_coef,
                             double t_trunc, double c_lil = 0.0);

// Initial-data/noise event under which conditional flocking is proved for
// constant intensity. The event compares
//   G = 4 |x(0)|_p |v(0)|_p I^{1-2/beta} C_beta,   I the exponential
// functional above with drift beta D^2/(2(beta-2)) and vol beta D/(beta-2),
// against 1. The published constant is ambiguous between (2^beta/(q lambda))
// ^{2/beta} and the derivation's (2^{beta+1}/(beta lambda))^{2/beta}; the
// latter is built in and const_factor overrides it.
struct EventAParams {
    double beta = 4.0;
    double q = 2.0;
    double lambda = 1.0;
    double D = 0.5;
    double t_trunc = 0.0;      // <= 0: use 50 / drift_coef()
    double c_lil = 0.0;        // tail margin; must keep drift - vol*c_lil > 0
    double const_factor = 0.0; // <= 0: use the derivation constant

    double drift_coef() const { return beta * D * D / (2.0 * (beta - 2.0)); }
    double vol_coef() const { return beta * D / (beta - 2.0); }
    double constant() const;
    double effective_t_trunc() const;
    void validate() const; // DomainError unless beta > 2, q > 1, lambda > 0, D != 0
};

struct EventEval {
    EventClass cls = EventClass::Indeterminate;
    double g_low = 0.0;  // from the truncated integral
    double g_high = 0.0; // tail-inflated
    double integral = 0.0;
    double tail = 0.0;
};

EventEval event_A_eval(double x0_norm, double v0_norm, const EventAParams& params,
                       const BrownianPath& path);
EventClass event_A(double x0_norm, double v0_norm, const EventAParams& params,
                   const BrownianPath& path);

enum class DecayModel { Exponential, Algebraic };

// Least-squares decay fit: log y against t (Exponential, y ~ C e^{-rate t})
// or against log(1+t) (Algebraic, y ~ C (1+t)^{-rate}).
struct RateFit {
    DecayModel model = DecayModel::Exponential;
    double rate = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;

    bool operator==(const RateFit&) const = default;
};

RateFit fit_decay(const std::vector<double>& times, const std::vector<double>& ys,
                  DecayModel model, double window_lo, double window_hi);

struct SeriesStat {
    std::vector<double> mean;
    std::vector<double> se;

    bool operator==(const SeriesStat&) const = default;
};

struct NamedFit {
    std::string target;
    RateFit fit;

    bool operator==(const NamedFit&) const = default;
};

// Ensemble reduction of PathResults. Reductions run in path-index order, so
// the output is independent of how many workers produced the inputs.
struct EnsembleStats {
    std::vector<double> grid;
    long n_paths = 0;
    std::vector<double> p_list;
    std::vector<SeriesStat> mean_vnorm, mean_xnorm; // indexed like p_list
    bool has_conditional = false;
    long mask_count = 0;
    std::vector<SeriesStat> cond_mean_vnorm, cond_mean_xnorm;
    FreqStat collision_frequency;
    bool has_event = false;
    FreqStat event_frequency; // over classified paths only
    long indeterminate_count = 0;
    SeriesStat martingale_mean;
    std::vector<NamedFit> fits;
    std::uint64_t master_seed = 0;
    std::string scenario_config;

    bool operator==(const EnsembleStats&) const = default;
};

// mask, when given, must have one flag per result; a mask with no true
// entries leaves the conditional series omitted rather than fabricated.
EnsembleStats flocking_metrics(const std::vector<PathResult>& results,
                               const std::vector<unsigned char>* mask = nullptr);

// Pairwise-difference seminorm over an index subset (0-based), counting
// ordered pairs: sqrt(sum_{i,j in idx} |y_i - y_j|^2).
double cluster_norm(const std::vector<double>& y, int n, int d,
                    const std::vector<int>& idx);

// Near-collision diagnostics e_pm = cluster_norm(v) +- (lambda/N) Psi(cluster_norm(x));
// requires a kernel with a closed-form primitive.
std::pair<double, double> collision_lyapunov(const SystemState& state,
                                             const std::vector<int>& idx,
                                             const Kernel& kernel, double lambda, int n);

// Tail mass int_x^inf psi(y) dy of the coupling; closed form for
// PowerLaw(alpha>1) and Regularized(2), quadrature otherwise.
double kernel_tail_integral(const Kernel& kernel, double x);

// Conditional Monte Carlo means of the scalar two-particle system: the
// relative velocity must dominate lambda * tail(x(t)) on the event
// {v(0) >= lambda * tail(x(0))}. Paths outside the event are excluded.
struct TwoParticleBound {
    std::vector<double> times;
    std::vector<double> mean_v, se_v;
    std::vector<double> mean_tail, se_tail;
    std::vector<double> mean_diff, se_diff; // paired v - lambda*tail
    long mask_count = 0;
    long n = 0;
    bool omitted = false; // no path satisfied the event
};

TwoParticleBound two_particle_lower_bound(const std::vector<PathResult>& results,
                                          const Kernel& kernel, double lambda);

// Upper concave envelope of F_t(r) = exp(-a' lambda (2r)^{-alpha} t) with
// a' = a/(a-1): linear through the origin up to the tangency radius
// r* = (alpha a' lambda t)^{1/alpha} / 2, then F itself. Both branches equal
// e^{-1/alpha} at r*.
double concave_envelope(double t, double a, double alpha, double lambda, double r);
double envelope_base(double t, double a, double alpha, double lambda, double r);

} // namespace flocksim
