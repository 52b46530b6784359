#pragma once
// Convex sets with metric projection in the space's own norm.
//
// Primitives: boxes, balls of the ambient norm, and halfspaces
// {xi : <a, xi> <= b}. Translation folds into the primitive's data, so no
// wrapper node exists at projection time.
//
// Projections are exact:
//  * Box: the weighted p-th power of the distance is coordinatewise
//    separable, so the componentwise clamp minimizes it for every p at once.
//  * Ball: the radial point c + R(x - c)/||x - c|| attains the triangle
//    lower bound ||x - xi|| >= ||x - c|| - R; unique by strict convexity.
//  * Halfspace: the optimality condition <J(x - xi*), xi* - xi> >= 0 forces
//    x - xi* = lambda J_*(a); since <a, J_*(lambda a)> = lambda ||a||_*^2 the
//    multiplier is lambda = max(0, <a, x> - b)/||a||_*^2 in closed form, and
//    the active-face residual is verified after the fact.
//
// The projection certificate is the variational characterization
//   xbar = P x  <=>  <J(x - xbar), x - xi> >= ||x - xbar||^2  for all xi,
// together with the support inequality <J(x - xbar), xbar - xi> >= 0 and the
// constant-difference identity between the two pairings.

#include <cstdint>
#include <optional>
#include <variant>

#include "pvi/modulus.hpp"
#include "pvi/rng.hpp"
#include "pvi/space.hpp"

namespace pvi {

struct Box {
    Vector lower, upper;
};

struct BallSet {
    Vector center;
    double radius = 1.0;
};

struct Halfspace {
    DualVector normal;  // a != 0
    double offset = 0.0;
};

class ConvexSet {
  public:
    enum class Kind { box, ball, halfspace };

    // The empty box in dimension zero, so set-carrying aggregates remain
    // default-constructible; real sets come from the factories below.
    ConvexSet() : data_(Box{}) {}

    static ConvexSet box(Vector lower, Vector upper);
    static ConvexSet ball(Vector center, double radius);
    static ConvexSet halfspace(DualVector normal, double offset);

    Kind kind() const;
    std::size_t dim() const;
    ConvexSet translate(const Vector& shift) const;

    const Box& as_box() const { return std::get<Box>(data_); }
    const BallSet& as_ball() const { return std::get<BallSet>(data_); }
    const Halfspace& as_halfspace() const { return std::get<Halfspace>(data_); }

  private:
    explicit ConvexSet(std::variant<Box, BallSet, Halfspace> data) : data_(std::move(data)) {}
    std::variant<Box, BallSet, Halfspace> data_;
};

Vector project(const SpaceSpec& s, const ConvexSet& set, const Vector& x);
double distance(const SpaceSpec& s, const ConvexSet& set, const Vector& x);
bool contains(const SpaceSpec& s, const ConvexSet& set, const Vector& x, double tol = 0.0);

// Axis-aligned bounding box; empty for halfspaces.
std::optional<Box> bounding_box(const SpaceSpec& s, const ConvexSet& set);

// A point of the set: uniform for boxes and balls, anchored tangential spread
// for halfspaces (spread sets the length scale).
Vector sample_in_set(const SpaceSpec& s, const ConvexSet& set, Rng& rng, double spread = 2.0);

// Hausdorff distance. exact=true marks pairs computed by a closed rule
// (box/box, ball/ball, parallel halfspaces, the genuinely infinite mixed
// cases); otherwise value is a certified upper bound.
struct HausdorffResult {
    double value = 0.0;
    bool exact = true;
};
HausdorffResult hausdorff(const SpaceSpec& s, const ConvexSet& a, const ConvexSet& b);

enum class InflateMode { outward, inward };

// A set at Hausdorff distance exactly sigma (boxes: per-coordinate margin
// sigma/(sum_i w_i)^{1/p}; balls: radius +- sigma; halfspaces: offset shift
// sigma ||a||_*). Inward inflation that would empty the set throws.
ConvexSet inflate(const SpaceSpec& s, const ConvexSet& set, double sigma, InflateMode mode);

// Samples xi in the set and reports the worst slack of the three Lemma-style
// projection facts at (x, xbar). Negative min_slack beyond tolerance refutes
// xbar = P x.
struct CertificateReport {
    double min_slack = 0.0;          // <J(x-xbar), x-xi> - ||x-xbar||^2
    double min_support_slack = 0.0;  // <J(x-xbar), xbar-xi>
    double max_identity_drift = 0.0; // |P(xi) - Q(xi) - d| / max(1, d)
    double d = 0.0;                  // ||x - xbar||^2
    int samples = 0;
};
CertificateReport check_projection_certificate(const SpaceSpec& s, const ConvexSet& set,
                                               const Vector& x, const Vector& xbar,
                                               int n_samples, std::uint64_t seed);

// Projection stability under set perturbation:
//   ||P_1 x - P_2 x|| <= C delta^{-1}(4 L C_1 sigma),
//   C  = 2 max{1, ||x - xbar_1||, ||x - xbar_2||},
//   C_1 = 2 max{||x - xbar_1||, ||x - xbar_2||},
// with sigma >= H(set_1, set_2). vacuous=true when delta^{-1} saturates (the
// right side degrades to 2C, which still dominates ||xbar_1 - xbar_2||).
struct StabilityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool vacuous = false;
    double C = 0.0;
    double C1 = 0.0;
    double inner = 0.0;  // 4 L C_1 sigma, the delta^{-1} argument
};
StabilityReport check_projection_stability(const SpaceSpec& s, const ModulusProfile& profile,
                                           const ConvexSet& set1, const ConvexSet& set2,
                                           const Vector& x, double sigma);

}  // namespace pvi
