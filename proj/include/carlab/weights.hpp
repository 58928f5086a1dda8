#pragma once

// Carleman weight functions phi with exact symbolic gradient and Hessian.
// Three families cover everything used downstream: linear phases rho.x,
// the quadratic paraboloid sign*x_n + |x'|^2 - sign*c^2, and general
// x-only polynomials (convexified weights land here).

#include <carlab/polysym.hpp>

#include <string>
#include <utility>
#include <vector>

namespace carlab {

struct Box {
    std::vector<std::pair<double, double>> iv;  // closed per-axis intervals

    Box() = default;
    explicit Box(std::vector<std::pair<double, double>> v) : iv(std::move(v)) {}
    static Box cube(int dim, double lo, double hi) {
        return Box(std::vector<std::pair<double, double>>(dim, {lo, hi}));
    }
    int dim() const { return (int)iv.size(); }
    bool contains(const Box& inner) const;
};

enum class WeightKind { Linear, QuadraticParaboloid, GeneralPoly };

struct SupResult {
    double value = 0.0;
    double resolution = 0.0;  // spacing of the final sampling pass
};

class Weight {
  public:
    static Weight linear(std::vector<Rat> rho);
    static Weight paraboloid(int dim, int sign, const Rat& c);
    static Weight general(PolySymbol phi);
    // phi + ctilde*|x'|^2, the bent variant used near curved hypersurfaces
    static Weight bent(const Weight& base, const Rat& ctilde = Rat(1));

    int dim() const { return phi_.dim(); }
    WeightKind kind() const { return kind_; }
    const PolySymbol& phi() const { return phi_; }
    const std::vector<PolySymbol>& gradient() const { return grad_; }
    const std::vector<std::vector<PolySymbol>>& hessian() const { return hess_; }
    bool gradient_is_zero() const;

    Weight convexify(const Rat& h, const Rat& eps) const;

    double phi_at(std::span<const double> x) const;
    SupResult sup_on_box(const Box& box, int samples_per_axis = 64) const;

    // Round-trips through parse_weight_spec.
    std::string describe() const;

  private:
    Weight(WeightKind kind, PolySymbol phi, std::string spec);

    WeightKind kind_;
    PolySymbol phi_;
    std::string spec_;
    std::vector<PolySymbol> grad_;
    std::vector<std::vector<PolySymbol>> hess_;
};

// Grammar: `linear rho=(0,0,1)` | `parab n=2 sign=- c=0.5` | `poly n=2 "x1^2"`,
// optionally followed by `convexify h=<rat> eps=<rat>`.
Weight parse_weight_spec(const std::string& spec);

}  // namespace carlab
