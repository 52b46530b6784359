#include "pvi/space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pvi {

void SpaceSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("space: dim must be >= 1, got " + std::to_string(dim));
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("space: p must lie in (1, inf), got " + std::to_string(p));
    if (!weights.empty()) {
        if (static_cast<int>(weights.size()) != dim)
            throw std::invalid_argument("space: weight list length != dim");
        for (double w : weights)
            if (!(w > 0.0) || !std::isfinite(w))
                throw std::invalid_argument("space: weights must be positive and finite");
    }
}

bool SpaceSpec::unit_weights() const {
    for (double w : weights)
        if (w != 1.0) return false;
    return true;
}

SpaceSpec SpaceSpec::dual() const {
    SpaceSpec d;
    d.dim = dim;
    d.p = q();
    if (!weights.empty() && !unit_weights()) {
        d.weights.resize(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i)
            d.weights[i] = std::pow(weights[i], 1.0 - q());
    }
    return d;
}

namespace {

double weighted_p_norm(const std::vector<double>& v, double p, const SpaceSpec& s) {
    // Scale by the largest magnitude so intermediate powers stay in range.
    double top = 0.0;
    for (double t : v) top = std::max(top, std::abs(t));
    if (top == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        acc += s.weight(i) * std::pow(std::abs(v[i]) / top, p);
    return top * std::pow(acc, 1.0 / p);
}

}  // namespace

double norm(const SpaceSpec& s, const Vector& x) {
    return weighted_p_norm(x.v, s.p, s);
}

double dual_norm(const SpaceSpec& s, const DualVector& y) {
    const SpaceSpec d = s.dual();
    double top = 0.0;
    for (double t : y.v) top = std::max(top, std::abs(t));
    if (top == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < y.v.size(); ++i)
        acc += d.weight(i) * std::pow(std::abs(y.v[i]) / top, d.p);
    return top * std::pow(acc, 1.0 / d.p);
}

double pairing(const DualVector& y, const Vector& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.v.size(); ++i) acc += y.v[i] * x.v[i];
    return acc;
}

DualVector duality_map(const SpaceSpec& s, const Vector& x) {
    DualVector y(x.size());
    const double nx = norm(s, x);
    if (nx == 0.0) return y;
    // p == 2, unit weights: exact identity, no pow round-off.
    if (s.p == 2.0 && s.unit_weights()) {
        y.v = x.v;
        return y;
    }
    const double scale = std::pow(nx, 2.0 - s.p);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i];
        y[i] = t == 0.0 ? 0.0 : scale * s.weight(i) * t * std::pow(std::abs(t), s.p - 2.0);
    }
    return y;
}

Vector duality_map_inverse(const SpaceSpec& s, const DualVector& y) {
    const SpaceSpec d = s.dual();
    Vector x(y.size());
    const double ny = dual_norm(s, y);
    if (ny == 0.0) return x;
    if (d.p == 2.0 && d.unit_weights()) {
        x.v = y.v;
        return x;
    }
    const double scale = std::pow(ny, 2.0 - d.p);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = y[i];
        x[i] = t == 0.0 ? 0.0 : scale * d.weight(i) * t * std::pow(std::abs(t), d.p - 2.0);
    }
    return x;
}

double norm2(const Vector& x) {
    double acc = 0.0;
    for (double t : x.v) acc += t * t;
    return std::sqrt(acc);
}

double dot(const Vector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

Vector as_primal_direction(const DualVector& y) {
    return Vector(y.v);
}

DualVector as_dual(const Vector& x) {
    return DualVector(x.v);
}

Vector sample_sphere(const SpaceSpec& s, Rng& rng) {
    Vector x(static_cast<std::size_t>(s.dim));
    for (;;) {
        for (int i = 0; i < s.dim; ++i)
            x[static_cast<std::size_t>(i)] =
                rng.generalized_normal(s.p) * std::pow(s.weight(static_cast<std::size_t>(i)), -1.0 / s.p);
        const double n = norm(s, x);
        if (n > 1e-12) {
            x *= 1.0 / n;
            return x;
        }
    }
}

Vector sample_ball(const SpaceSpec& s, double r, Rng& rng) {
    Vector x = sample_sphere(s, rng);
    const double u = rng.uniform();
    x *= r * std::pow(u, 1.0 / static_cast<double>(s.dim));
    return x;
}

}  // namespace pvi
