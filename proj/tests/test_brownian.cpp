#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "flocksim/brownian.hpp"
#include "flocksim/errors.hpp"
#include "flocksim/noise.hpp"
#include "flocksim/stats.hpp"

using namespace flocksim;

TEST_CASE("uniform sampling covers the horizon with a short last step") {
    BrownianPath p = BrownianPath::sample(1.0, 0.3, 42);
    REQUIRE(p.times.size() == 5);
    CHECK(p.times.front() == 0.0);
    CHECK(p.times[1] == 0.3);
    CHECK(p.times.back() == 1.0);
    CHECK(p.values.front() == 0.0);
    CHECK(p.seed == 42);
    CHECK_THROWS_AS(BrownianPath::sample(1.0, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(BrownianPath::sample(1.0, 2.0, 1), ConfigError);
}

TEST_CASE("sampling is a pure function of grid and seed") {
    std::vector<double> grid{0.0, 0.5, 1.0};
    BrownianPath a = BrownianPath::sample_on(grid, 7);
    BrownianPath b = BrownianPath::sample_on(grid, 7);
    CHECK(a.times == b.times);
    CHECK(a.values == b.values);
    BrownianPath c = BrownianPath::sample_on(grid, 8);
    CHECK(a.values != c.values);
    CHECK(a.times == grid);
}

TEST_CASE("node lookup is exact-match only") {
    BrownianPath p = BrownianPath::sample(1.0, 0.5, 3);
    CHECK(p.find_node(0.5) == 1);
    CHECK(p.value_at(0.0) == 0.0);
    CHECK_THROWS_AS(p.find_node(0.25), GridError);
    CHECK_THROWS_AS(p.find_node(2.0), GridError);
}

TEST_CASE("terminal value matches the standard normal law") {
    std::vector<double> w1;
    w1.reserve(100000);
    for (std::uint64_t s = 0; s < 100000; ++s)
        w1.push_back(BrownianPath::sample(1.0, 1.0, s).values.back());
    MeanStat m = mean_se(w1);
    CHECK(std::abs(m.mean) < 0.01);
    double var = 0.0;
    for (double w : w1) var += (w - m.mean) * (w - m.mean);
    var /= static_cast<double>(w1.size() - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));

    std::vector<double> sub(w1.begin(), w1.begin() + 10000);
    double ks = ks_distance(sub, [](double x) { return normal_cdf(x); });
    CHECK(ks < ks_critical(1e-3, sub.size()));
}

TEST_CASE("successive increments are uncorrelated") {
    BrownianPath p = BrownianPath::sample(1.0, 1e-4, 1234);
    std::vector<double> inc;
    for (std::size_t k = 1; k < p.times.size(); ++k) inc.push_back(p.values[k] - p.values[k - 1]);
    double m = 0.0;
    for (double x : inc) m += x;
    m /= static_cast<double>(inc.size());
    double c0 = 0.0, c1 = 0.0;
    for (std::size_t k = 0; k + 1 < inc.size(); ++k) {
        c0 += (inc[k] - m) * (inc[k] - m);
        c1 += (inc[k] - m) * (inc[k + 1] - m);
    }
    CHECK(std::abs(c1 / c0) < 0.035);
}

TEST_CASE("bridge refinement has the conditional midpoint law") {
    std::vector<double> mids;
    mids.reserve(100000);
    for (std::uint64_t s = 0; s < 100000; ++s) {
        BrownianPath p = BrownianPath::sample(1.0, 1.0, s);
        const double w1 = p.values.back();
        p.refine(0.0, 1.0, 2);
        mids.push_back(p.value_at(0.5) - 0.5 * w1);
    }
    MeanStat m = mean_se(mids);
    CHECK(std::abs(m.mean) < 0.005);
    double var = 0.0;
    for (double x : mids) var += (x - m.mean) * (x - m.mean);
    var /= static_cast<double>(mids.size() - 1);
    CHECK(var == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("refinement preserves existing nodes and ignores call order") {
    BrownianPath base = BrownianPath::sample(1.0, 0.25, 99);
    BrownianPath a = base;
    a.refine(0.0, 0.25, 4);
    a.refine(0.25, 0.5, 4);
    BrownianPath b = base;
    b.refine(0.25, 0.5, 4);
    b.refine(0.0, 0.25, 4);
    CHECK(a.times == b.times);
    CHECK(a.values == b.values);
    for (std::size_t k = 0; k < base.times.size(); ++k)
        CHECK(a.value_at(base.times[k]) == base.values[k]);
    CHECK(a.node_count() == base.node_count() + 6);

    BrownianPath c = refine(base, 0.0, 0.25, 4);
    for (double t : c.times) CHECK(c.value_at(t) == a.value_at(t));
    CHECK(base.node_count() == 5); // the value-returning form copies

    CHECK_THROWS_AS(base.refine(0.0, 0.5, 2), GridError);   // not adjacent
    CHECK_THROWS_AS(base.refine(0.1, 0.25, 2), GridError);  // not a node
    CHECK_THROWS_AS(base.refine(0.0, 0.25, 1), GridError);  // too few parts
}

TEST_CASE("binary dump and load round-trip bit for bit") {
    BrownianPath p = BrownianPath::sample(2.0, 0.17, 5150);
    p.refine(0.0, 0.17, 3);
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    p.dump(ss);
    BrownianPath q = BrownianPath::load(ss);
    CHECK(q.seed == p.seed);
    CHECK(q.times == p.times);
    CHECK(q.values == p.values);
    std::stringstream empty(std::ios::in | std::ios::out | std::ios::binary);
    CHECK_THROWS_AS(BrownianPath::load(empty), IoError);
}

TEST_CASE("stochastic integral matches the closed forms it is built from") {
    BrownianPath p = BrownianPath::sample(1.0, 0.0625, 7);
    NoiseIntensity cst = NoiseIntensity::constant(0.5);
    MartingaleTrack tr = stochastic_integral(p, cst);
    REQUIRE(tr.times == p.times);
    CHECK(tr.m_values.front() == 0.0);
    CHECK(tr.qv_values.front() == 0.0);
    // Constant intensity telescopes: M_T = D W(T) up to summation rounding.
    CHECK(tr.m_values.back() ==
          doctest::Approx(0.5 * p.values.back()).epsilon(1e-13));
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        CHECK(tr.qv_values[k] == cst.quad_variation(tr.times[k]));
    CHECK(tr.find_node(0.0625) == 1);
    CHECK_THROWS_AS(tr.find_node(0.03), GridError);
}

TEST_CASE("refining the grid barely moves the integral") {
    NoiseIntensity cst = NoiseIntensity::constant(0.5);
    NoiseIntensity dec = NoiseIntensity::power_decay(1.0, 0.75);
    double worst_cst = 0.0, worst_dec = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        BrownianPath coarse = BrownianPath::sample(1.0, 0.01, 1000 + s);
        BrownianPath fine = coarse;
        for (std::size_t k = 0; k + 1 < coarse.times.size(); ++k)
            fine.refine(coarse.times[k], coarse.times[k + 1], 4);
        const double mc_c = stochastic_integral(coarse, cst).m_values.back();
        const double mf_c = stochastic_integral(fine, cst).m_values.back();
        worst_cst = std::max(worst_cst, std::abs(mf_c - mc_c));
        const double mc_d = stochastic_integral(coarse, dec).m_values.back();
        const double mf_d = stochastic_integral(fine, dec).m_values.back();
        worst_dec = std::max(worst_dec, std::abs(mf_d - mc_d));
    }
    CHECK(worst_cst < 1e-12);
    CHECK(worst_dec < 0.05);
}
