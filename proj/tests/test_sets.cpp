#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "pvi/sets.hpp"

namespace {

using namespace pvi;

SpaceSpec make_space(int dim, double p, std::vector<double> w = {}) {
    SpaceSpec s;
    s.dim = dim;
    s.p = p;
    s.weights = std::move(w);
    s.validate();
    return s;
}

// Refutation slack of the projection characterization evaluated at the probe
// xi; for a corrupted projection this is negative by construction.
double slack_at(const SpaceSpec& s, const Vector& x, const Vector& xbar, const Vector& xi) {
    const double d = norm(s, x - xbar);
    return pairing(duality_map(s, x - xbar), x - xi) - d * d;
}

}  // namespace

TEST_CASE("sets: factories reject malformed data") {
    CHECK_THROWS_AS(ConvexSet::box(Vector{1.0}, Vector{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ConvexSet::ball(Vector{0.0, 0.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ConvexSet::halfspace(DualVector{0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("sets: box projection is the componentwise clamp") {
    const SpaceSpec s = make_space(3, 3.0, {1.0, 2.0, 1.0});
    const ConvexSet box = ConvexSet::box(Vector{-1.0, -1.0, -1.0}, Vector{1.0, 1.0, 1.0});
    const Vector x{2.0, -3.0, 0.5};
    const Vector px = project(s, box, x);
    CHECK(px[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(px[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(px[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(distance(s, box, x) == doctest::Approx(2.5712815906582354).epsilon(1e-14));
    CHECK(contains(s, box, px));
    CHECK_FALSE(contains(s, box, x));
    CHECK(distance(s, box, px) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("sets: ball projection is radial") {
    const SpaceSpec s = make_space(2, 3.0);
    const ConvexSet ball = ConvexSet::ball(Vector{1.0, 0.0}, 0.5);
    const Vector x{3.0, 0.0};
    const Vector px = project(s, ball, x);
    CHECK(px[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(px[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(distance(s, ball, x) == doctest::Approx(1.5).epsilon(1e-14));
    const Vector inside{1.1, -0.2};
    CHECK(contains(s, ball, inside));
    const Vector same = project(s, ball, inside);
    CHECK(same[0] == inside[0]);
    CHECK(same[1] == inside[1]);
}

TEST_CASE("sets: halfspace projection closed form") {
    SUBCASE("p = 2") {
        const SpaceSpec s = make_space(2, 2.0);
        const ConvexSet hs = ConvexSet::halfspace(DualVector{0.0, 3.0}, 6.0);
        const Vector px = project(s, hs, Vector{1.0, 5.0});
        CHECK(px[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(px[1] == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("p = 3") {
        const SpaceSpec s = make_space(2, 3.0);
        const ConvexSet hs = ConvexSet::halfspace(DualVector{1.0, 1.0}, 1.0);
        const Vector px = project(s, hs, Vector{2.0, 2.0});
        CHECK(px[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(px[1] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(pairing(hs.as_halfspace().normal, px) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sets: translation commutes with projection") {
    const SpaceSpec s = make_space(2, 1.5);
    const ConvexSet ball = ConvexSet::ball(Vector{0.0, 0.0}, 1.0);
    const Vector shift{0.7, -0.4};
    const ConvexSet moved = ball.translate(shift);
    const Vector x{2.0, 1.0};
    const Vector a = project(s, moved, x + shift);
    const Vector b = project(s, ball, x) + shift;
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-13));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-13));
}

TEST_CASE("sets: bounding boxes") {
    const SpaceSpec s = make_space(2, 3.0, {8.0, 1.0});
    const auto bb = bounding_box(s, ConvexSet::ball(Vector{0.5, -1.0}, 2.0));
    REQUIRE(bb.has_value());
    CHECK(bb->lower[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(bb->upper[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(bb->lower[1] == doctest::Approx(-3.0).epsilon(1e-14));
    CHECK(bb->upper[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(bounding_box(s, ConvexSet::halfspace(DualVector{1.0, 0.0}, 0.0)).has_value());
}

TEST_CASE("sets: samples land inside their set") {
    const SpaceSpec s = make_space(3, 1.5);
    Rng rng(555);
    const ConvexSet sets[] = {
        ConvexSet::box(Vector{-1.0, 0.0, -2.0}, Vector{1.0, 0.5, -1.0}),
        ConvexSet::ball(Vector{0.3, -0.2, 0.1}, 1.2),
        ConvexSet::halfspace(DualVector{1.0, -2.0, 0.5}, 0.7),
    };
    for (const ConvexSet& set : sets)
        for (int k = 0; k < 100; ++k)
            CHECK(contains(s, set, sample_in_set(s, set, rng), 1e-9));
}

TEST_CASE("sets: hausdorff closed rules") {
    const SpaceSpec s2 = make_space(2, 2.0);
    const ConvexSet box = ConvexSet::box(Vector{-1.0, -1.0}, Vector{1.0, 1.0});
    const HausdorffResult shifted = hausdorff(s2, box, box.translate(Vector{0.5, 0.5}));
    CHECK(shifted.exact);
    CHECK(shifted.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));

    const SpaceSpec s1 = make_space(1, 3.0);
    const HausdorffResult nested =
        hausdorff(s1, ConvexSet::box(Vector{-1.0}, Vector{1.0}),
                  ConvexSet::box(Vector{-2.0}, Vector{1.5}));
    CHECK(nested.exact);
    CHECK(nested.value == doctest::Approx(1.0).epsilon(1e-13));

    const HausdorffResult balls =
        hausdorff(s2, ConvexSet::ball(Vector{0.0, 0.0}, 1.0), ConvexSet::ball(Vector{0.0, 0.0}, 1.75));
    CHECK(balls.exact);
    CHECK(balls.value == doctest::Approx(0.75).epsilon(1e-13));

    const ConvexSet h1 = ConvexSet::halfspace(DualVector{0.0, 2.0}, 2.0);
    const ConvexSet h2 = ConvexSet::halfspace(DualVector{0.0, 2.0}, 5.0);
    const HausdorffResult planes = hausdorff(s2, h1, h2);
    CHECK(planes.exact);
    CHECK(planes.value == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("sets: mixed hausdorff is a certified upper bound") {
    const SpaceSpec s = make_space(2, 2.0);
    const ConvexSet box = ConvexSet::box(Vector{-1.0, -1.0}, Vector{1.0, 1.0});
    const ConvexSet ball = ConvexSet::ball(Vector{0.0, 0.0}, 1.0);
    const HausdorffResult hd = hausdorff(s, box, ball);
    CHECK_FALSE(hd.exact);
    CHECK(hd.value >= std::sqrt(2.0) - 1.0 - 1e-9);
    Rng rng(99);
    for (int k = 0; k < 200; ++k) {
        CHECK(distance(s, ball, sample_in_set(s, box, rng)) <= hd.value + 1e-9);
        CHECK(distance(s, box, sample_in_set(s, ball, rng)) <= hd.value + 1e-9);
    }
}

TEST_CASE("sets: inflation realizes the requested hausdorff distance exactly") {
    const SpaceSpec s = make_space(3, 3.0, {2.0, 0.25, 1.0});
    const ConvexSet sets[] = {
        ConvexSet::box(Vector{-1.0, -0.5, 0.0}, Vector{1.0, 0.5, 2.0}),
        ConvexSet::ball(Vector{0.1, 0.2, -0.3}, 1.5),
        ConvexSet::halfspace(DualVector{1.0, 0.5, -1.0}, 0.4),
    };
    for (const ConvexSet& set : sets) {
        for (const double sigma : {1e-4, 1e-2, 0.3}) {
            for (const InflateMode mode : {InflateMode::outward, InflateMode::inward}) {
                const ConvexSet other = inflate(s, set, sigma, mode);
                const HausdorffResult hd = hausdorff(s, set, other);
                CHECK(hd.exact);
                CHECK(hd.value == doctest::Approx(sigma).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(inflate(s, sets[0], 10.0, InflateMode::inward), std::invalid_argument);
    CHECK_THROWS_AS(inflate(s, sets[1], 1.5, InflateMode::inward), std::invalid_argument);
}

TEST_CASE("sets: projection certificate accepts true projections") {
    Rng rng(808);
    for (const double p : {1.5, 2.0, 3.0}) {
        const SpaceSpec s = make_space(3, p);
        const ConvexSet sets[] = {
            ConvexSet::box(Vector{-1.0, -1.0, -1.0}, Vector{1.0, 1.0, 1.0}),
            ConvexSet::ball(Vector{0.2, 0.0, -0.1}, 1.0),
            ConvexSet::halfspace(DualVector{1.0, 1.0, 1.0}, 0.5),
        };
        for (const ConvexSet& set : sets) {
            Vector x = sample_in_set(s, set, rng);
            x[0] += 2.5;
            x[2] -= 1.5;
            const Vector px = project(s, set, x);
            const CertificateReport rep =
                check_projection_certificate(s, set, x, px, 400, 1000 + rng.integer(1000));
            CAPTURE(p);
            CHECK(rep.samples == 400);
            CHECK(rep.min_slack >= -1e-9);
            CHECK(rep.min_support_slack >= -1e-9);
            CHECK(rep.max_identity_drift <= 1e-7);
            const double d = norm(s, x - px);
            CHECK(rep.d == doctest::Approx(d * d).epsilon(1e-10));
        }
    }
}

TEST_CASE("sets: projection certificate refutes a corrupted projection") {
    const SpaceSpec s = make_space(3, 3.0);
    const ConvexSet box = ConvexSet::box(Vector{-1.0, -1.0, -1.0}, Vector{1.0, 1.0, 1.0});
    const Vector x{2.0, 0.3, -0.4};
    const Vector px = project(s, box, x);
    Vector bad = px;
    bad[0] -= 0.05;  // deeper into the box along the projection ray
    const CertificateReport rep = check_projection_certificate(s, box, x, bad, 1000, 77);
    CHECK(rep.min_slack <= -1e-4);
    // The true projection is itself a refuting probe, for any set kind.
    CHECK(slack_at(s, x, bad, px) <= -1e-4);

    const ConvexSet ball = ConvexSet::ball(Vector{0.0, 0.0, 0.0}, 1.0);
    const Vector xb{2.0, 0.0, 0.0};
    const Vector pb = project(s, ball, xb);
    Vector bad_b = pb;
    bad_b[0] -= 0.05;
    CHECK(slack_at(s, xb, bad_b, pb) <= -1e-4);
}

TEST_CASE("sets: projection stability on concentric balls") {
    const SpaceSpec s = make_space(3, 2.0);
    const ModulusProfile profile = build_modulus_profile(s);
    const ConvexSet inner = ConvexSet::ball(Vector{0.0, 0.0, 0.0}, 1.0);
    const ConvexSet outer = ConvexSet::ball(Vector{0.0, 0.0, 0.0}, 1.001);
    const Vector x{2.0, 0.0, 0.0};

    const StabilityReport rep = check_projection_stability(s, profile, inner, outer, x, 0.001);
    CHECK(rep.lhs == doctest::Approx(0.001).epsilon(1e-9));
    CHECK_FALSE(rep.vacuous);
    CHECK(rep.slack >= 0.0);
    CHECK(rep.C == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.C1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.inner == doctest::Approx(4.0 * kJEstimateL * 2.0 * 0.001).epsilon(1e-12));

    // A crude sigma saturates the convexity inverse; the degraded bound still holds.
    const StabilityReport loose = check_projection_stability(s, profile, inner, outer, x, 1.0);
    CHECK(loose.vacuous);
    CHECK(loose.lhs <= loose.rhs + 1e-12);
}
