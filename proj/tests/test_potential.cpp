#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fremond/potential.hpp"
#include "support.hpp"

using namespace fremond;

TEST_CASE("double-well values")
{
    const Potential f = Potential::double_well();
    CHECK(f.eval(1.0, 0) == 0.0);
    CHECK(f.eval(-1.0, 0) == 0.0);
    CHECK(f.eval(1.0, 1) == 0.0);
    CHECK(f.eval(-1.0, 1) == 0.0);
    CHECK(f.eval(0.0, 0) == 1.0);
    CHECK(f.eval(0.0, 2) == -4.0);
    CHECK(f.eval(0.5, 3) == doctest::Approx(12.0));
    CHECK(f.eval(0.3, 2) == doctest::Approx(12 * 0.09 - 4));
    CHECK(f.lambda() == 4.0);
    CHECK(f.is_double_well());
    CHECK(f.describe() == "double_well");
}

TEST_CASE("convex part")
{
    const Potential f = Potential::double_well(4.0);
    CHECK(f.convex(0.0, 0) == 1.0);
    CHECK(f.convex(0.0, 1) == 0.0);
    CHECK(f.convex(0.0, 2) == 4.0);
    CHECK(f.convex(1.0, 0) == doctest::Approx(4.0));
    CHECK(convex_part(f, 1.0, 0) == doctest::Approx(4.0));

    testing::Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double y = rng.uniform(-5, 5);
        CHECK(f.convex(y, 2) - f.eval(y, 2) == doctest::Approx(8.0));
        CHECK(f.convex(y, 0) - 4.0 * y * y - f.eval(y, 0) == doctest::Approx(0.0).epsilon(1e-12).scale(1 + y * y * y * y));
    }
}

TEST_CASE("admissibility of polynomial specs")
{
    CHECK_NOTHROW(Potential::polynomial({0, 0, 0, 0, 1}, 0.0));
    CHECK_NOTHROW(Potential::polynomial({2.0}, 0.0));
    CHECK(Potential::polynomial({1, 0, 3, 0, 0, 0}, 0.0).degree() == 2);
    CHECK_THROWS_AS(Potential::polynomial({0, 0, 0, 1}, 1.0), ValidationFailed);
    CHECK_THROWS_AS(Potential::polynomial({0, 0, 0, 0, -1}, 1.0), ValidationFailed);
    CHECK_THROWS_AS(Potential::polynomial({0, 0.5, 0, 0, 1}, 1.0), ValidationFailed);
    CHECK_THROWS_AS(Potential::double_well(-1.0), ValidationFailed);
    CHECK_THROWS_AS(Potential::double_well().eval(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(Potential::double_well().convex(0.0, 3), std::invalid_argument);
}

TEST_CASE("hypothesis validation")
{
    // Lattice oracle: F'' + 4 = 12 y^2 >= 0 and F' y > 0 at both ends.
    const ValidationReport ok = validate_hypotheses(Potential::double_well(4.0), -10, 10, 10001);
    CHECK(ok.convex_ok());
    CHECK(ok.coercive_ok());
    CHECK(ok.min_convexity == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ok.min_convex_second >= 4.0 - 1e-12);
    CHECK(ok.lower_bound_constant == 0.0);

    CHECK_THROWS_AS(validate_hypotheses(Potential::double_well(1.0), -10, 10, 10001), HypothesisViolation);
    try {
        validate_hypotheses(Potential::double_well(1.0), -10, 10, 10001);
    } catch (const HypothesisViolation& e) {
        CHECK(e.report().min_convexity == doctest::Approx(-3.0));
    }
    const ValidationReport quartic = validate_hypotheses(Potential::polynomial({0, 0, 0, 0, 1}, 0.0), -2, 2, 101);
    CHECK(quartic.convex_ok());
    CHECK(!inspect_hypotheses(Potential::polynomial({1.0}, 0.0), -1, 1, 11).coercive_ok());
}

TEST_CASE("bounded below by the reported constant")
{
    const Potential p = Potential::polynomial({0.3, 0, -3, 0, 0.5}, 9.0);
    const ValidationReport r = inspect_hypotheses(p, -4, 4, 4001);
    CHECK(r.lower_bound_constant == doctest::Approx(4.2).epsilon(1e-4));
    for (int s = 0; s <= 4000; ++s) {
        const double y = -4 + 8.0 * s / 4000;
        CHECK(p.eval(y, 0) >= -r.lower_bound_constant - 1e-12);
    }
}

TEST_CASE("derivatives agree with central differences")
{
    testing::Rng rng(5);
    const Potential specs[] = {Potential::double_well(), Potential::polynomial({0.5, 0, -1, 0, 0.25, 0, 0.1}, 3.0)};
    for (const Potential& p : specs) {
        for (int i = 0; i < 500; ++i) {
            const double y = rng.uniform(-3, 3);
            for (int k = 1; k <= 3; ++k) {
                const double h = 1e-5 * std::max(1.0, std::abs(y));
                const double fd = (p.eval(y + h, k - 1) - p.eval(y - h, k - 1)) / (2 * h);
                const double ex = p.eval(y, k);
                CHECK(std::abs(fd - ex) <= 1e-6 * std::max(1.0, std::abs(ex)));
            }
            const double h = 1e-5;
            const double fd = (p.convex(y + h, 0) - p.convex(y - h, 0)) / (2 * h);
            CHECK(std::abs(fd - p.convex(y, 1)) <= 1e-6 * std::max(1.0, std::abs(p.convex(y, 1))));
        }
    }
}
