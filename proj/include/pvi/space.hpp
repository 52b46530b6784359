#pragma once
// Finite-dimensional weighted l^p geometry.
//
// The primal space is R^n under ||x|| = (sum_i w_i |x_i|^p)^{1/p} with
// 1 < p < inf and w_i > 0. Its dual carries exponent q = p/(p-1) and weights
// w_i^{1-q}; the pairing is the plain coordinate dot product. With that
// convention Hoelder's inequality |<y, x>| <= ||y||_* ||x|| is tight and the
// dual of the dual is the original space ((1-q)(1-p) = 1).
//
// The normalized duality mapping J : B -> B* is the gradient of ||.||^2 / 2:
//
//     (Jx)_i = ||x||^{2-p} w_i x_i |x_i|^{p-2},   J(0) = 0,
//
// so <Jx, x> = ||x||^2 and ||Jx||_* = ||x||. Its inverse is the duality
// mapping of the dual space read backwards. For p = 2 with unit weights J is
// the identity; in dimension 1 it is the identity for every p.

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "pvi/rng.hpp"

namespace pvi {

// Strong typedef: primal vectors and dual (functional) vectors share storage
// layout but must not be mixed in arithmetic.
template <class Tag>
struct Coords {
    std::vector<double> v;

    Coords() = default;
    explicit Coords(std::size_t n) : v(n, 0.0) {}
    Coords(std::initializer_list<double> init) : v(init) {}
    explicit Coords(std::vector<double> init) : v(std::move(init)) {}

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    Coords& operator+=(const Coords& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    Coords& operator-=(const Coords& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
        return *this;
    }
    Coords& operator*=(double s) {
        for (double& t : v) t *= s;
        return *this;
    }
    friend Coords operator+(Coords a, const Coords& b) { return a += b; }
    friend Coords operator-(Coords a, const Coords& b) { return a -= b; }
    friend Coords operator*(double s, Coords a) { return a *= s; }
    friend bool operator==(const Coords& a, const Coords& b) { return a.v == b.v; }
};

using Vector = Coords<struct PrimalTag>;
using DualVector = Coords<struct DualTag>;

struct SpaceSpec {
    int dim = 0;
    double p = 2.0;
    std::vector<double> weights;  // empty means all ones

    // Throws std::invalid_argument unless dim >= 1, 1 < p < inf, and the
    // weight list (when present) has dim positive entries.
    void validate() const;

    double q() const { return p / (p - 1.0); }
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
    bool unit_weights() const;

    // The dual space: exponent q, weights w^{1-q}.
    SpaceSpec dual() const;
};

double norm(const SpaceSpec& s, const Vector& x);
double dual_norm(const SpaceSpec& s, const DualVector& y);

// <y, x> = sum_i y_i x_i; the space enters only through the norms.
double pairing(const DualVector& y, const Vector& x);

DualVector duality_map(const SpaceSpec& s, const Vector& x);
Vector duality_map_inverse(const SpaceSpec& s, const DualVector& y);

// Euclidean helpers for the reference oracle, independent of p.
double norm2(const Vector& x);
double dot(const Vector& a, const Vector& b);

// Coordinates of a dual vector reused as a primal direction (the gradient
// step in the coordinate frame; legitimate because the pairing is the plain
// dot product).
Vector as_primal_direction(const DualVector& y);
DualVector as_dual(const Vector& x);

// Uniform samples on the unit sphere (cone measure) and in the ball of
// radius r, both in the space's own norm. Weighted case handled by the
// substitution z_i = w_i^{1/p} x_i.
Vector sample_sphere(const SpaceSpec& s, Rng& rng);
Vector sample_ball(const SpaceSpec& s, double r, Rng& rng);

}  // namespace pvi
