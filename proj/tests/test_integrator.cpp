#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "flocksim/errors.hpp"
#include "flocksim/integrator.hpp"
#include "flocksim/rng.hpp"

using namespace flocksim;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

SystemState random_state(int n, int d, std::uint64_t key) {
    SystemState st;
    rng::GaussianStream gs{key, 0};
    st.x.resize(static_cast<std::size_t>(n) * d);
    st.v.resize(st.x.size());
    for (double& c : st.x) c = gs.next();
    for (double& c : st.v) c = gs.next();
    st.min_dist = min_pair_distance(st.x, n, d);
    st.vnorm2 = lp_norm(st.v, n, d, 2.0);
    return st;
}

std::vector<double> naive_drift(const SystemState& st, const SystemConfig& cfg,
                                const CutoffKernel& active) {
    const int n = cfg.n, d = cfg.d;
    std::vector<double> out(static_cast<std::size_t>(n) * d, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double dx = st.x[static_cast<std::size_t>(i) * d + k] -
                                  st.x[static_cast<std::size_t>(j) * d + k];
                r2 += dx * dx;
            }
            const double w = (cfg.lambda / n) * active.eval(std::sqrt(r2));
            for (int k = 0; k < d; ++k)
                out[static_cast<std::size_t>(i) * d + k] +=
                    w * (st.v[static_cast<std::size_t>(j) * d + k] -
                         st.v[static_cast<std::size_t>(i) * d + k]);
        }
    return out;
}

} // namespace

TEST_CASE("pairwise drift matches the brute-force double loop") {
    SystemConfig cfg;
    cfg.n = 6;
    cfg.d = 3;
    cfg.lambda = 1.7;
    cfg.kernel = Kernel::regularized(1.0);
    SystemState st = random_state(cfg.n, cfg.d, 11);
    CutoffKernel active{&cfg.kernel, 1e-9};
    std::vector<double> fast = drift(st, cfg, active);
    std::vector<double> slow = naive_drift(st, cfg, active);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    // Antisymmetric accumulation: particle sums vanish to rounding.
    for (int c = 0; c < cfg.d; ++c) {
        double s = 0.0;
        for (int i = 0; i < cfg.n; ++i) s += fast[static_cast<std::size_t>(i) * cfg.d + c];
        CHECK(std::abs(s) < 1e-13);
    }
}

TEST_CASE("equal velocities are a drift fixed point") {
    SystemConfig cfg;
    cfg.n = 4;
    cfg.d = 2;
    cfg.kernel = Kernel::power_law(1.5);
    cfg.noise = NoiseIntensity::constant(0.0);
    SystemState st = random_state(cfg.n, cfg.d, 21);
    for (std::size_t i = 0; i < st.v.size(); i += 2) {
        st.v[i] = 0.3;
        st.v[i + 1] = -1.25;
    }
    st.vnorm2 = lp_norm(st.v, cfg.n, cfg.d, 2.0);
    CutoffKernel active{&cfg.kernel, 1e-9};
    for (double b : drift(st, cfg, active)) CHECK(b == 0.0);
    SystemState next = em_step(st, 0.01, 0.14, cfg, active);
    for (std::size_t i = 0; i < st.v.size(); ++i) CHECK(next.v[i] == st.v[i]);
    for (std::size_t i = 0; i < st.x.size(); ++i)
        CHECK(next.x[i] == doctest::Approx(st.x[i] + st.v[i] * 0.01).epsilon(1e-15));
    CHECK(next.t == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("euler step transports positions with the pre-step velocity") {
    SystemConfig cfg;
    cfg.n = 2;
    cfg.d = 1;
    cfg.kernel = Kernel::constant(1.0);
    cfg.noise = NoiseIntensity::constant(0.5);
    SystemState st;
    st.x = {0.5, -0.5};
    st.v = {1.0, -1.0};
    st.min_dist = 1.0;
    st.vnorm2 = std::sqrt(2.0);
    CutoffKernel active{&cfg.kernel, 1e-6};
    const double dt = 0.1, dW = 0.2;
    SystemState next = em_step(st, dt, dW, cfg, active);
    // b_0 = (1/2)*1*(v_1 - v_0) = -1; v_0' = 1 - 0.1 + 0.5*0.2*1 = 1.0
    CHECK(next.x[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(next.x[1] == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK(next.v[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(next.v[1] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(next.m_now == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(next.w_now == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(next.qv_now == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(next.min_dist == doctest::Approx(1.2).epsilon(1e-15));
    CHECK_THROWS_AS(em_step(st, 0.0, 0.0, cfg, active), DomainError);
}

TEST_CASE("a single particle keeps a geometric velocity and no drift") {
    SystemConfig cfg;
    cfg.n = 1;
    cfg.d = 2;
    cfg.kernel = Kernel::power_law(1.0);
    cfg.noise = NoiseIntensity::constant(0.4);
    SystemState st;
    st.x = {0.0, 0.0};
    st.v = {2.0, -1.0};
    st.min_dist = kInf;
    st.vnorm2 = std::sqrt(5.0);
    CutoffKernel active{&cfg.kernel, 1e-6};
    SystemState next = em_step(st, 0.5, -0.3, cfg, active);
    const double f = 1.0 + 0.4 * (-0.3);
    CHECK(next.v[0] == doctest::Approx(2.0 * f).epsilon(1e-15));
    CHECK(next.v[1] == doctest::Approx(-1.0 * f).epsilon(1e-15));
    CHECK(next.min_dist == kInf);
}

TEST_CASE("overflowing dynamics raise a numerical error") {
    SystemConfig cfg;
    cfg.n = 2;
    cfg.d = 1;
    cfg.lambda = 1e308;
    cfg.kernel = Kernel::constant(1.0);
    cfg.noise = NoiseIntensity::constant(0.0);
    cfg.sampler = parse_sampler("two_particle:1:2");
    StepController ctrl;
    CHECK_THROWS_AS(simulate_path(cfg, ctrl, 1.0, 5, {0.0, 1.0}, {2.0}), NumericalError);
}

TEST_CASE("step controller clamps between dt_min and dt_base") {
    StepController ctrl;
    CHECK(ctrl.dt_eff(kInf, 0.0) == ctrl.dt_base);
    CHECK(ctrl.dt_eff(kInf, kInf) == ctrl.dt_base);
    CHECK(ctrl.dt_eff(1e-9, 0.0) == ctrl.dt_min);
    CHECK(ctrl.dt_eff(0.05, 1.0) == ctrl.dt_base); // CFL suggestion 0.0025 exceeds dt_base
    StepController wide = ctrl;
    wide.dt_base = 0.01;
    CHECK(wide.dt_eff(0.05, 1.0) == doctest::Approx(0.0025).epsilon(1e-15));
}

TEST_CASE("cutoff radii halve down to the collision threshold") {
    StepController ctrl;
    std::vector<double> seq = ctrl.cutoff_sequence();
    REQUIRE(seq.size() == 15);
    CHECK(seq.front() == 1e-2);
    CHECK(seq.back() == 1e-6);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        CHECK(seq[i] > seq[i + 1]);
        if (i + 2 < seq.size()) CHECK(seq[i + 1] == doctest::Approx(0.5 * seq[i]).epsilon(1e-15));
    }
    StepController bad = ctrl;
    bad.cutoff_ratio = 1.0;
    CHECK_THROWS_AS(bad.cutoff_sequence(), ConfigError);
    bad = ctrl;
    bad.collision_threshold = 0.1;
    CHECK_THROWS_AS(bad.cutoff_sequence(), ConfigError);
}

TEST_CASE("samplers produce the documented raw data") {
    std::vector<double> x, v;
    InitialSampler two = parse_sampler("two_particle:1:-4");
    two.sample(9, 2, 1, x, v);
    CHECK(x == std::vector<double>{0.5, -0.5});
    CHECK(v == std::vector<double>{-2.0, 2.0});
    CHECK_THROWS_AS(two.sample(9, 3, 1, x, v), ConfigError);

    InitialSampler cross = parse_sampler("crossing:2:2");
    cross.sample(9, 5, 1, x, v);
    CHECK(x == std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0});
    CHECK(v == std::vector<double>{2.0, 1.0, -0.0, -1.0, -2.0});

    InitialSampler lat = parse_sampler("lattice:1:3");
    lat.sample(9, 3, 1, x, v);
    CHECK(x == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(v == std::vector<double>{3.0, -3.0, 3.0});

    InitialSampler zero = parse_sampler("zero");
    zero.sample(9, 1, 3, x, v);
    CHECK(x == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(v == std::vector<double>{0.0, 0.0, 0.0});
    CHECK_THROWS_AS(zero.sample(9, 2, 1, x, v), ConfigError);

    InitialSampler g = parse_sampler("gauss:1:1");
    std::vector<double> x2, v2;
    g.sample(77, 4, 2, x, v);
    g.sample(77, 4, 2, x2, v2);
    CHECK(x == x2);
    CHECK(v == v2);

    CHECK(parse_sampler("uniform_gauss:1:1").config_string() == "uniform_gauss:1:1");
    CHECK(parse_sampler("two_particle:1:-4").config_string() == "two_particle:1:-4");
    CHECK(parse_sampler("zero").config_string() == "zero");
    CHECK_THROWS_AS(parse_sampler("zero:1"), ConfigError);
    CHECK_THROWS_AS(parse_sampler("gauss:1"), ConfigError);
    CHECK_THROWS_AS(parse_sampler("gauss:0:1"), ConfigError);
    CHECK_THROWS_AS(parse_sampler("warp:1:1"), ConfigError);
}

TEST_CASE("norms, separations, and the centering split") {
    std::vector<double> y{3.0, 4.0, 6.0, 8.0}; // particle norms 5 and 10
    CHECK(lp_norm(y, 2, 2, 2.0) == doctest::Approx(11.180339887498949).epsilon(1e-15));
    CHECK(lp_norm(y, 2, 2, 4.0) == doctest::Approx(10.152715924344653).epsilon(1e-14));
    CHECK(lp_norm(y, 2, 2, kInf) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK_THROWS_AS(lp_norm(y, 2, 2, 1.5), DomainError);

    CHECK(min_pair_distance({0.0, 3.0, 7.0}, 3, 1) == 3.0);
    CHECK(min_pair_distance({0.0, 0.0, 3.0, 4.0}, 2, 2) == 5.0);
    CHECK(min_pair_distance({1.0, 2.0}, 1, 2) == kInf);

    std::vector<double> raw{1.0, 3.0, 5.0}, mean, cent;
    decompose(raw, 3, 1, mean, cent);
    CHECK(mean == std::vector<double>{3.0});
    CHECK(cent == std::vector<double>{-2.0, 0.0, 2.0});

    std::vector<double> xb, vb;
    macro_evolution({1.0, -1.0}, {0.5, 2.0}, 4.0, xb, vb);
    CHECK(xb == std::vector<double>{3.0, 7.0});
    CHECK(vb == std::vector<double>{0.5, 2.0});
    CHECK_THROWS_AS(macro_evolution({0.0}, {0.0}, -1.0, xb, vb), DomainError);
}

TEST_CASE("head-on weak coupling collides, strong coupling turns around") {
    SystemConfig cfg;
    cfg.n = 2;
    cfg.d = 1;
    cfg.lambda = 1.0;
    cfg.noise = NoiseIntensity::constant(0.0);
    cfg.sampler = parse_sampler("two_particle:1:-4");
    StepController ctrl;
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(0.1 * k);

    cfg.kernel = Kernel::power_law(0.5);
    PathResult weak = simulate_path(cfg, ctrl, 1.0, 3, grid, {2.0});
    CHECK(weak.status == PathStatus::Collided);
    REQUIRE(weak.collision.has_value());
    CHECK(weak.collision->i == 0);
    CHECK(weak.collision->j == 1);
    CHECK(weak.collision->time >= 0.2);
    CHECK(weak.collision->time <= 0.6);
    CHECK(weak.min_dist.back() < ctrl.collision_threshold);
    // Frozen tail repeats the collision state.
    REQUIRE(weak.relative.has_value());
    std::size_t last = weak.sample_times.size() - 1;
    CHECK(weak.relative->x[last] == weak.relative->x[last - 1]);
    CHECK(weak.relative->v[last] == weak.relative->v[last - 1]);

    cfg.kernel = Kernel::power_law(1.5);
    PathResult strong = simulate_path(cfg, ctrl, 1.0, 3, grid, {2.0});
    CHECK(strong.status == PathStatus::Completed);
    CHECK_FALSE(strong.collision.has_value());
    for (double md : strong.min_dist) CHECK(md > ctrl.collision_threshold);
    // The closest approach of the exact orbit is 1/9.
    double closest = kInf;
    for (double md : strong.min_dist) closest = std::min(closest, md);
    CHECK(closest == doctest::Approx(1.0 / 9.0).epsilon(0.05));
}

TEST_CASE("initial overlap freezes the trajectory at time zero") {
    SystemConfig cfg;
    cfg.n = 2;
    cfg.d = 1;
    cfg.kernel = Kernel::regularized(1.0);
    cfg.noise = NoiseIntensity::constant(0.0);
    cfg.sampler = parse_sampler("two_particle:1e-9:1");
    StepController ctrl;
    PathResult res = simulate_path(cfg, ctrl, 1.0, 4, {0.0, 0.5, 1.0}, {2.0});
    CHECK(res.status == PathStatus::Collided);
    REQUIRE(res.collision.has_value());
    CHECK(res.collision->time == 0.0);
    CHECK(res.min_dist[0] == doctest::Approx(1e-9).epsilon(1e-12));
}

TEST_CASE("simulation refines a path that is coarser than the base step") {
    SystemConfig cfg;
    cfg.n = 3;
    cfg.d = 1;
    cfg.kernel = Kernel::regularized(1.0);
    cfg.noise = NoiseIntensity::constant(0.3);
    cfg.sampler = parse_sampler("lattice:1:0"); // static particles, exact node count
    StepController ctrl;
    ctrl.dt_base = 0.1;
    BrownianPath path = BrownianPath::sample(1.0, 0.5, 31);
    REQUIRE(path.node_count() == 3);
    PathResult res = simulate_on_path(cfg, ctrl, 1.0, path, 31, {0.0, 1.0}, {2.0});
    CHECK(res.status == PathStatus::Completed);
    CHECK(path.node_count() == 11);
    CHECK(res.min_dist.back() == 1.0);
}

TEST_CASE("trajectory outputs respect conservation and growth budgets") {
    SystemConfig cfg;
    cfg.n = 3;
    cfg.d = 2;
    cfg.lambda = 1.0;
    cfg.kernel = Kernel::power_law(1.2);
    cfg.noise = NoiseIntensity::constant(0.4);
    cfg.sampler = parse_sampler("uniform_gauss:1:1");
    StepController ctrl;
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(0.1 * k);

    long viol = 0, total = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        PathResult r = simulate_path(cfg, ctrl, 1.0, s, grid, {2.0, kInf});
        CHECK(r.max_vsum <= 1e-9);
        CHECK(r.sample_times == grid);
        for (std::size_t pi = 0; pi < r.p_list.size(); ++pi) {
            for (std::size_t k = 0; k < grid.size(); ++k) {
                // Triangle inequality against the running speed integral.
                CHECK(r.xnorm[pi][k] <=
                      r.xnorm[pi][0] + r.vint[pi][k] * (1.0 + 1e-6) + 1e-12);
                if (k > 0) CHECK(r.vint[pi][k] >= r.vint[pi][k - 1]);
            }
        }
        // Pathwise domination by the driving martingale at 5% slack.
        const double v0 = r.vnorm[0][0];
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double bound = v0 * std::exp(r.m_values[k] - 0.5 * r.qv_values[k]);
            ++total;
            if (r.vnorm[0][k] > bound * 1.05) ++viol;
        }
    }
    CHECK(viol <= 1); // the 5% slack absorbs the discretization error
}

TEST_CASE("identical seeds reproduce a trajectory exactly") {
    SystemConfig cfg;
    cfg.n = 4;
    cfg.d = 2;
    cfg.kernel = Kernel::regularized(0.5);
    cfg.noise = NoiseIntensity::power_decay(1.0, 0.75);
    cfg.sampler = parse_sampler("gauss:1:1");
    StepController ctrl;
    std::vector<double> grid{0.0, 0.5, 1.0};
    PathResult a = simulate_path(cfg, ctrl, 1.0, 42, grid, {2.0});
    PathResult b = simulate_path(cfg, ctrl, 1.0, 42, grid, {2.0});
    CHECK(a.vnorm == b.vnorm);
    CHECK(a.xnorm == b.xnorm);
    CHECK(a.m_values == b.m_values);
    PathResult c = simulate_path(cfg, ctrl, 1.0, 43, grid, {2.0});
    CHECK(a.vnorm != c.vnorm);
}

TEST_CASE("simulation rejects malformed requests") {
    SystemConfig cfg;
    cfg.n = 2;
    cfg.d = 1;
    cfg.kernel = Kernel::constant(1.0);
    cfg.sampler = parse_sampler("two_particle:1:1");
    StepController ctrl;
    CHECK_THROWS_AS(simulate_path(cfg, ctrl, 0.0, 1, {0.0}, {2.0}), ConfigError);
    CHECK_THROWS_AS(simulate_path(cfg, ctrl, 1.0, 1, {}, {2.0}), ConfigError);
    CHECK_THROWS_AS(simulate_path(cfg, ctrl, 1.0, 1, {0.0, 2.0}, {2.0}), ConfigError);
    CHECK_THROWS_AS(simulate_path(cfg, ctrl, 1.0, 1, {0.5, 0.25}, {2.0}), ConfigError);
    CHECK_THROWS_AS(simulate_path(cfg, ctrl, 1.0, 1, {0.0, 1.0}, {}), ConfigError);
    CHECK_THROWS_AS(simulate_path(cfg, ctrl, 1.0, 1, {0.0, 1.0}, {1.0}), DomainError);
    BrownianPath short_path = BrownianPath::sample(0.5, 0.1, 1);
    CHECK_THROWS_AS(
        simulate_on_path(cfg, ctrl, 1.0, short_path, 1, {0.0, 1.0}, {2.0}), ConfigError);
}
