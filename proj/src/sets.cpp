#include "pvi/sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument("convex set: " + what);
}

double clamp1(double t, double lo, double hi) { return std::min(std::max(t, lo), hi); }

}  // namespace

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
    require(lower.size() >= 1 && lower.size() == upper.size(), "box bounds must match in size");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        require(std::isfinite(lower[i]) && std::isfinite(upper[i]), "box bounds must be finite");
        require(lower[i] <= upper[i], "box needs lower <= upper in every coordinate");
    }
    return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
    require(center.size() >= 1, "ball center must be nonempty");
    for (std::size_t i = 0; i < center.size(); ++i)
        require(std::isfinite(center[i]), "ball center must be finite");
    require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive");
    return ConvexSet(BallSet{std::move(center), radius});
}

ConvexSet ConvexSet::halfspace(DualVector normal, double offset) {
    require(normal.size() >= 1, "halfspace normal must be nonempty");
    double mag = 0.0;
    for (std::size_t i = 0; i < normal.size(); ++i) {
        require(std::isfinite(normal[i]), "halfspace normal must be finite");
        mag = std::max(mag, std::abs(normal[i]));
    }
    require(mag > 0.0, "halfspace normal must be nonzero");
    require(std::isfinite(offset), "halfspace offset must be finite");
    return ConvexSet(Halfspace{std::move(normal), offset});
}

ConvexSet::Kind ConvexSet::kind() const {
    if (std::holds_alternative<Box>(data_)) return Kind::box;
    if (std::holds_alternative<BallSet>(data_)) return Kind::ball;
    return Kind::halfspace;
}

std::size_t ConvexSet::dim() const {
    switch (kind()) {
        case Kind::box: return as_box().lower.size();
        case Kind::ball: return as_ball().center.size();
        default: return as_halfspace().normal.size();
    }
}

ConvexSet ConvexSet::translate(const Vector& shift) const {
    require(shift.size() == dim(), "translate shift has wrong dimension");
    switch (kind()) {
        case Kind::box: {
            Box b = as_box();
            b.lower += shift;
            b.upper += shift;
            return ConvexSet(std::move(b));
        }
        case Kind::ball: {
            BallSet b = as_ball();
            b.center += shift;
            return ConvexSet(std::move(b));
        }
        default: {
            Halfspace h = as_halfspace();
            // {<a, xi> <= b} + s = {<a, xi> <= b + <a, s>}
            h.offset += pairing(h.normal, shift);
            return ConvexSet(std::move(h));
        }
    }
}

Vector project(const SpaceSpec& s, const ConvexSet& set, const Vector& x) {
    require(x.size() == set.dim() && static_cast<int>(x.size()) == s.dim,
            "projection argument has wrong dimension");
    switch (set.kind()) {
        case ConvexSet::Kind::box: {
            const Box& b = set.as_box();
            Vector out = x;
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = clamp1(x[i], b.lower[i], b.upper[i]);
            return out;
        }
        case ConvexSet::Kind::ball: {
            const BallSet& b = set.as_ball();
            Vector r = x;
            r -= b.center;
            const double n = norm(s, r);
            if (n <= b.radius) return x;
            r *= b.radius / n;
            r += b.center;
            return r;
        }
        default: {
            const Halfspace& h = set.as_halfspace();
            const double viol = pairing(h.normal, x) - h.offset;
            if (viol <= 0.0) return x;
            const double na = dual_norm(s, h.normal);
            const double lambda = viol / (na * na);
            Vector step = duality_map_inverse(s, h.normal);
            step *= lambda;
            Vector out = x;
            out -= step;
            // xi* must land on the active face.
            const double resid = std::abs(pairing(h.normal, out) - h.offset);
            const double scale = std::max({1.0, std::abs(h.offset), na * norm(s, x)});
            if (resid > 1e-10 * scale)
                throw std::runtime_error("halfspace projection residual " + std::to_string(resid) +
                                         " exceeds tolerance");
            return out;
        }
    }
}

double distance(const SpaceSpec& s, const ConvexSet& set, const Vector& x) {
    switch (set.kind()) {
        case ConvexSet::Kind::box: {
            Vector d = x;
            d -= project(s, set, x);
            return norm(s, d);
        }
        case ConvexSet::Kind::ball: {
            const BallSet& b = set.as_ball();
            Vector r = x;
            r -= b.center;
            return std::max(0.0, norm(s, r) - b.radius);
        }
        default: {
            const Halfspace& h = set.as_halfspace();
            const double viol = pairing(h.normal, x) - h.offset;
            return std::max(0.0, viol / dual_norm(s, h.normal));
        }
    }
}

bool contains(const SpaceSpec& s, const ConvexSet& set, const Vector& x, double tol) {
    return distance(s, set, x) <= tol;
}

std::optional<Box> bounding_box(const SpaceSpec& s, const ConvexSet& set) {
    switch (set.kind()) {
        case ConvexSet::Kind::box: return set.as_box();
        case ConvexSet::Kind::ball: {
            const BallSet& b = set.as_ball();
            Vector lo = b.center, hi = b.center;
            for (std::size_t i = 0; i < lo.size(); ++i) {
                // |x_i - c_i| <= R w_i^{-1/p} on the ball, attained on the axis.
                const double r = b.radius * std::pow(s.weight(i), -1.0 / s.p);
                lo[i] -= r;
                hi[i] += r;
            }
            return Box{std::move(lo), std::move(hi)};
        }
        default: return std::nullopt;
    }
}

Vector sample_in_set(const SpaceSpec& s, const ConvexSet& set, Rng& rng, double spread) {
    switch (set.kind()) {
        case ConvexSet::Kind::box: {
            const Box& b = set.as_box();
            Vector out(b.lower.size());
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = rng.uniform(b.lower[i], b.upper[i]);
            return out;
        }
        case ConvexSet::Kind::ball: {
            const BallSet& b = set.as_ball();
            Vector out = sample_ball(s, b.radius, rng);
            out += b.center;
            return out;
        }
        default: {
            const Halfspace& h = set.as_halfspace();
            const double na = dual_norm(s, h.normal);
            Vector axis = duality_map_inverse(s, h.normal);  // <a, axis> = ||a||_*^2
            // Anchor on the face, spread tangentially, then push inward.
            Vector out = axis;
            out *= h.offset / (na * na);
            Vector g(out.size());
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = spread * rng.normal();
            out += g;
            const double over = pairing(h.normal, out) - h.offset;
            const double push = (std::max(0.0, over) + rng.uniform() * spread * na) / (na * na);
            Vector in = axis;
            in *= push;
            out -= in;
            return out;
        }
    }
}

namespace {

double interval_gap(double t, double lo, double hi) {
    if (t < lo) return lo - t;
    if (t > hi) return t - hi;
    return 0.0;
}

// sup_{x in A} dist(x, B) for two boxes: separable, attained at endpoints.
double box_one_sided(const SpaceSpec& s, const Box& a, const Box& b) {
    Vector gaps(a.lower.size());
    for (std::size_t i = 0; i < gaps.size(); ++i)
        gaps[i] = std::max(interval_gap(a.lower[i], b.lower[i], b.upper[i]),
                           interval_gap(a.upper[i], b.lower[i], b.upper[i]));
    return norm(s, gaps);
}

// max_{x in box} ||x - c||: coordinatewise extreme endpoints.
double box_farthest_from(const SpaceSpec& s, const Box& b, const Vector& c) {
    Vector far(b.lower.size());
    for (std::size_t i = 0; i < far.size(); ++i)
        far[i] = std::max(std::abs(b.lower[i] - c[i]), std::abs(b.upper[i] - c[i]));
    return norm(s, far);
}

}  // namespace

HausdorffResult hausdorff(const SpaceSpec& s, const ConvexSet& a, const ConvexSet& b) {
    require(a.dim() == b.dim(), "hausdorff: dimension mismatch");
    using K = ConvexSet::Kind;
    const K ka = a.kind(), kb = b.kind();

    if (ka == K::box && kb == K::box) {
        const double ab = box_one_sided(s, a.as_box(), b.as_box());
        const double ba = box_one_sided(s, b.as_box(), a.as_box());
        return {std::max(ab, ba), true};
    }
    if (ka == K::ball && kb == K::ball) {
        const BallSet& p = a.as_ball();
        const BallSet& q = b.as_ball();
        Vector d = p.center;
        d -= q.center;
        return {norm(s, d) + std::abs(p.radius - q.radius), true};
    }
    if (ka == K::halfspace && kb == K::halfspace) {
        const Halfspace& p = a.as_halfspace();
        const Halfspace& q = b.as_halfspace();
        const double np = dual_norm(s, p.normal), nq = dual_norm(s, q.normal);
        bool parallel = true;
        for (std::size_t i = 0; i < p.normal.size() && parallel; ++i)
            parallel = std::abs(p.normal[i] / np - q.normal[i] / nq) <= 1e-12;
        if (parallel) return {std::abs(p.offset / np - q.offset / nq), true};
        return {kInf, true};  // non-parallel halfspaces truly diverge
    }
    if (ka == K::halfspace || kb == K::halfspace) {
        return {kInf, true};  // a halfspace is unbounded, the other set is not
    }

    // Box/ball mix: the sup over the box is exact (vertex extremes); the sup
    // over the ball is covered by the triangle bound dist(c, box) + R.
    const bool a_is_box = (ka == K::box);
    const Box& box = a_is_box ? a.as_box() : b.as_box();
    const BallSet& ball = a_is_box ? b.as_ball() : a.as_ball();
    const double from_box = std::max(0.0, box_farthest_from(s, box, ball.center) - ball.radius);
    const double from_ball =
        distance(s, ConvexSet::box(box.lower, box.upper), ball.center) + ball.radius;
    return {std::max(from_box, from_ball), false};
}

ConvexSet inflate(const SpaceSpec& s, const ConvexSet& set, double sigma, InflateMode mode) {
    require(sigma >= 0.0 && std::isfinite(sigma), "inflate: sigma must be >= 0");
    const double sign = (mode == InflateMode::outward) ? 1.0 : -1.0;
    switch (set.kind()) {
        case ConvexSet::Kind::box: {
            const Box& b = set.as_box();
            double wsum = 0.0;
            for (std::size_t i = 0; i < b.lower.size(); ++i) wsum += s.weight(i);
            const double t = sign * sigma / std::pow(wsum, 1.0 / s.p);
            Vector lo = b.lower, hi = b.upper;
            for (std::size_t i = 0; i < lo.size(); ++i) {
                lo[i] -= t;
                hi[i] += t;
                require(lo[i] <= hi[i], "inflate: inward margin empties the box");
            }
            return ConvexSet::box(std::move(lo), std::move(hi));
        }
        case ConvexSet::Kind::ball: {
            const BallSet& b = set.as_ball();
            const double r = b.radius + sign * sigma;
            require(r > 0.0, "inflate: inward margin empties the ball");
            return ConvexSet::ball(b.center, r);
        }
        default: {
            const Halfspace& h = set.as_halfspace();
            return ConvexSet::halfspace(h.normal,
                                        h.offset + sign * sigma * dual_norm(s, h.normal));
        }
    }
}

CertificateReport check_projection_certificate(const SpaceSpec& s, const ConvexSet& set,
                                               const Vector& x, const Vector& xbar,
                                               int n_samples, std::uint64_t seed) {
    require(n_samples >= 1, "certificate: need at least one sample");
    Rng rng = Rng(seed).fork(31);

    Vector r = x;
    r -= xbar;
    const DualVector j = duality_map(s, r);
    const double d = pairing(j, r);  // ||x - xbar||^2 by the J identities

    CertificateReport rep;
    rep.d = d;
    rep.samples = n_samples;
    rep.min_slack = std::numeric_limits<double>::infinity();
    rep.min_support_slack = std::numeric_limits<double>::infinity();
    rep.max_identity_drift = 0.0;

    const double spread = std::max(1.0, 2.0 * norm(s, r));
    for (int t = 0; t < n_samples; ++t) {
        Vector xi;
        const double mode = rng.uniform();
        if (mode < 0.50) {
            xi = sample_in_set(s, set, rng, spread);
        } else if (mode < 0.75) {
            // Boundary flavor: project an exterior point.
            Vector far(x.size());
            for (std::size_t i = 0; i < far.size(); ++i)
                far[i] = x[i] + spread * 3.0 * rng.normal();
            xi = project(s, set, far);
        } else {
            // Local cloud around the candidate projection.
            Vector near = xbar;
            for (std::size_t i = 0; i < near.size(); ++i)
                near[i] += 0.3 * spread * rng.normal();
            xi = project(s, set, near);
        }

        Vector dx = x;
        dx -= xi;
        Vector dbar = xbar;
        dbar -= xi;
        const double P = pairing(j, dx);
        const double Q = pairing(j, dbar);
        rep.min_slack = std::min(rep.min_slack, P - d);
        rep.min_support_slack = std::min(rep.min_support_slack, Q);
        rep.max_identity_drift =
            std::max(rep.max_identity_drift, std::abs(P - Q - d) / std::max(1.0, d));
    }
    return rep;
}

StabilityReport check_projection_stability(const SpaceSpec& s, const ModulusProfile& profile,
                                           const ConvexSet& set1, const ConvexSet& set2,
                                           const Vector& x, double sigma) {
    require(sigma >= 0.0, "stability: sigma must be >= 0");
    const Vector p1 = project(s, set1, x);
    const Vector p2 = project(s, set2, x);
    Vector d12 = p1;
    d12 -= p2;
    Vector r1 = x, r2 = x;
    r1 -= p1;
    r2 -= p2;
    const double n1 = norm(s, r1), n2 = norm(s, r2);

    StabilityReport rep;
    rep.lhs = norm(s, d12);
    rep.C = 2.0 * std::max({1.0, n1, n2});
    rep.C1 = 2.0 * std::max(n1, n2);
    rep.inner = 4.0 * kJEstimateL * rep.C1 * sigma;
    const auto inv = profile.delta_inverse(rep.inner);
    rep.vacuous = inv.saturated;
    rep.rhs = rep.C * inv.value;  // saturation degrades to 2C >= ||p1 - p2||
    rep.slack = rep.rhs - rep.lhs;
    return rep;
}

}  // namespace pvi
