#include <cmath>
#include <limits>

#include "doctest.h"

#include "flocksim/errors.hpp"
#include "flocksim/kernels.hpp"

using namespace flocksim;

TEST_CASE("power-law kernel evaluates r^-alpha") {
    Kernel k1 = Kernel::power_law(1.0);
    CHECK(k1.eval(2.0) == 0.5);
    CHECK(k1.eval(0.5) == 2.0);
    Kernel k2 = Kernel::power_law(2.0);
    CHECK(k2.eval(0.5) == 4.0);
    Kernel k15 = Kernel::power_law(1.5);
    CHECK(k15.eval(4.0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(k15.singular_at_zero());
    CHECK(k15.psi_star() == 0.0);
    CHECK_THROWS_AS(k15.eval(0.0), DomainError);
    CHECK_THROWS_AS(k15.eval(-1.0), DomainError);
}

TEST_CASE("regularized kernel is total and finite at zero") {
    Kernel k = Kernel::regularized(1.0);
    CHECK(k.eval(0.0) == 1.0);
    CHECK(k.eval(1.0) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(k.eval(3.0) == doctest::Approx(0.31622776601683794).epsilon(1e-15));
    CHECK_FALSE(k.singular_at_zero());
    Kernel k2 = Kernel::regularized(2.0);
    CHECK(k2.eval(2.0) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("log-power kernel evaluates log1p(r)^-alpha") {
    Kernel k = Kernel::log_power(1.0);
    CHECK(k.eval(std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(k.eval(0.0), DomainError);
    Kernel k2 = Kernel::log_power(2.0);
    CHECK(k2.eval(1.0) == doctest::Approx(2.0813689810056077).epsilon(1e-12));
    CHECK(k2.psi_star() == 0.0);
}

TEST_CASE("constant and shifted kernels carry their floor") {
    Kernel c = Kernel::constant(0.7);
    CHECK(c.eval(0.0) == 0.7);
    CHECK(c.eval(123.0) == 0.7);
    CHECK(c.psi_star() == 0.7);
    CHECK(c.lipschitz_const(1.0) == 0.0);

    Kernel s = Kernel::shifted(Kernel::power_law(1.5), 0.2);
    CHECK(s.eval(1.0) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(s.psi_star() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.singular_at_zero());
    CHECK(s.offset() == 0.2);
    CHECK(s.base().family() == KernelFamily::PowerLaw);
    CHECK_THROWS_AS(Kernel::shifted(s, 0.1), ConfigError);
    CHECK_THROWS_AS(c.base(), DomainError);
}

TEST_CASE("running infimum honors monotone families and the singular origin") {
    Kernel p = Kernel::power_law(1.0);
    CHECK(std::isinf(p.running_inf(0.0)));
    CHECK(p.running_inf(2.0) == 0.5);
    Kernel r = Kernel::regularized(1.0);
    CHECK(r.running_inf(0.0) == 1.0);
    Kernel s = Kernel::shifted(Kernel::power_law(1.5), 0.2);
    CHECK(std::isinf(s.running_inf(0.0)));
    CHECK(s.running_inf(4.0) == doctest::Approx(s.eval(4.0)).epsilon(1e-12));
}

TEST_CASE("primitive has the documented closed forms and refusals") {
    CHECK(Kernel::power_law(2.0).primitive(0.5) == -2.0);
    CHECK(Kernel::power_law(1.5).primitive(4.0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(Kernel::power_law(1.0).primitive(1.0) == 0.0);
    CHECK(Kernel::power_law(1.0).primitive(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    Kernel s = Kernel::shifted(Kernel::power_law(2.0), 0.3);
    CHECK(s.primitive(2.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_THROWS_AS(Kernel::regularized(1.0).primitive(1.0), Unsupported);
    CHECK_THROWS_AS(Kernel::constant(1.0).primitive(1.0), Unsupported);
    CHECK_THROWS_AS(Kernel::log_power(1.0).primitive(1.0), Unsupported);
    CHECK_THROWS_AS(Kernel::power_law(2.0).primitive(0.0), DomainError);
}

TEST_CASE("slope bound is exact for power laws and peak-aware when regularized") {
    Kernel p = Kernel::power_law(1.0);
    CHECK(p.lipschitz_const(2.0) == 0.25);
    Kernel r = Kernel::regularized(1.0);
    // Peak of |psi'| sits at 1/sqrt(2); below it the sup is the peak value.
    CHECK(r.lipschitz_const(0.1) == doctest::Approx(0.3849001794597505).epsilon(1e-12));
    CHECK(r.lipschitz_const(1e-9) == doctest::Approx(0.3849001794597505).epsilon(1e-12));
    CHECK(r.lipschitz_const(2.0) == doctest::Approx(0.17888543819998318).epsilon(1e-12));
    CHECK(r.lipschitz_const(0.1) >= r.lipschitz_const(0.8));
    CHECK(r.lipschitz_const(0.8) >= r.lipschitz_const(2.0));
    Kernel s = Kernel::shifted(Kernel::power_law(1.0), 0.4);
    CHECK(s.lipschitz_const(2.0) == 0.25);
    CHECK_THROWS_AS(p.lipschitz_const(0.0), DomainError);
}

TEST_CASE("kernel config strings round-trip") {
    for (const char* spec : {"power:1.5", "reg:0.5", "log:0.8", "const:1", "shift:power:1.5:0.2"}) {
        Kernel k = parse_kernel(spec);
        CHECK(k.config_string() == spec);
        Kernel again = parse_kernel(k.config_string());
        CHECK(again.config_string() == k.config_string());
    }
    // A leading '+' on the offset is accepted and canonicalized away.
    CHECK(parse_kernel("shift:power:1.5:+0.2").config_string() == "shift:power:1.5:0.2");
    CHECK(parse_kernel("const:0").eval(5.0) == 0.0);
}

TEST_CASE("malformed kernel specs are rejected") {
    CHECK_THROWS_AS(parse_kernel("power"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("power:0"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("power:-1"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("power:1:2"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("gauss:1"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("power:abc"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("shift:power:1.5"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("shift:shift:power:1"), ConfigError);
}

TEST_CASE("cutoff clamps small separations and leaves the rest untouched") {
    Kernel p = Kernel::power_law(1.0);
    CutoffKernel cut{&p, 0.5};
    CHECK(cut.eval(0.25) == 2.0);
    CHECK(cut.eval(0.0) == 2.0); // clamp happens before the singular eval
    CHECK(cut.eval(0.5) == 2.0);
    CHECK(cut.eval(1.0) == 1.0);
    CHECK(cut.eval(4.0) == 0.25);
}
