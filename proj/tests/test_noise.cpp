#include <cmath>
#include <limits>

#include "doctest.h"

#include "flocksim/errors.hpp"
#include "flocksim/noise.hpp"

using namespace flocksim;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("constant intensity has linear quadratic variation") {
    NoiseIntensity n = NoiseIntensity::constant(0.5);
    CHECK(n.at(0.0) == 0.5);
    CHECK(n.at(17.0) == 0.5);
    CHECK(n.quad_variation(4.0) == 1.0);
    CHECK(n.quad_variation(0.0) == 0.0);
    CHECK_FALSE(n.square_integrable());
    CHECK_THROWS_AS(n.quad_variation(kInf), DomainError);
    CHECK_THROWS_AS(n.at(-0.1), DomainError);
}

TEST_CASE("power decay integrates to the closed form") {
    NoiseIntensity n = NoiseIntensity::power_decay(1.0, 0.75);
    CHECK(n.at(0.0) == 1.0);
    CHECK(n.at(3.0) == doctest::Approx(std::pow(4.0, -0.75)).epsilon(1e-15));
    // [M]_t = 2 (1 - (1+t)^{-1/2})
    CHECK(n.quad_variation(3.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(n.square_integrable());
    CHECK(n.quad_variation(kInf) == doctest::Approx(2.0).epsilon(1e-15));

    // gamma = 1/2 is the logarithmic edge case.
    NoiseIntensity h = NoiseIntensity::power_decay(2.0, 0.5);
    CHECK(h.quad_variation(std::exp(1.0) - 1.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK_FALSE(h.square_integrable());
    CHECK_THROWS_AS(h.quad_variation(kInf), DomainError);

    // gamma below 1/2 grows without bound.
    NoiseIntensity s = NoiseIntensity::power_decay(1.0, 0.25);
    CHECK(s.quad_variation(3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_FALSE(s.square_integrable());
}

TEST_CASE("noise config strings round-trip and reject junk") {
    for (const char* spec : {"const:0.5", "powdec:1:0.75", "const:0"}) {
        NoiseIntensity n = parse_noise(spec);
        CHECK(n.config_string() == spec);
    }
    CHECK_THROWS_AS(parse_noise("powdec:1"), ConfigError);
    CHECK_THROWS_AS(parse_noise("powdec:1:0"), ConfigError);
    CHECK_THROWS_AS(parse_noise("powdec:1:-2"), ConfigError);
    CHECK_THROWS_AS(parse_noise("ou:1:1"), ConfigError);
    CHECK_THROWS_AS(parse_noise("const:x"), ConfigError);
}
