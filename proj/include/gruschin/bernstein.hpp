#pragma once

#include <functional>
#include <limits>
#include <string>
#include <variant>

namespace gruschin {

// Subordinator law descriptors. A Bernstein function
//   phi(u) = theta*u + int_(0,inf) (1 - exp(-u x)) nu(dx)
// is identified by its drift theta and Levy measure nu.

struct StableKind {
    double alpha; // in (0,1)
    double c;     // > 0, Levy density c x^{-1-alpha} on (0,inf)
};

struct TruncatedStableKind {
    double beta; // in (0,1)
    double c;    // > 0, Levy density c x^{-1-beta} on (0,1)
};

// Levy density c exp(-rho^{1/beta} x) x^{-1-beta} on (0,inf), which gives the
// exponent c beta^{-1} Gamma(1-beta) [(u + rho^{1/beta})^beta - rho].
struct RelativisticStableKind {
    double beta; // in (0,1)
    double c;    // > 0
    double rho;  // > 0
    double tempering_rate() const;
};

struct PureDriftKind {
    double theta; // >= 0, empty Levy measure
};

struct CustomKind {
    double theta; // >= 0
    std::function<double(double)> levy_density;
    double support_lo = 0.0;
    double support_hi = std::numeric_limits<double>::infinity();
};

class BernsteinFunction {
public:
    using Kind = std::variant<StableKind, TruncatedStableKind, RelativisticStableKind,
                              PureDriftKind, CustomKind>;

    static BernsteinFunction stable(double alpha, double c);
    static BernsteinFunction truncated_stable(double beta, double c);
    static BernsteinFunction relativistic_stable(double beta, double c, double rho);
    static BernsteinFunction pure_drift(double theta);
    // Checks int (1 ^ x) nu(dx) < inf numerically; rejects a divergent density
    // with a diagnostic naming the divergent region.
    static BernsteinFunction custom(double theta, std::function<double(double)> levy_density,
                                    double support_lo, double support_hi);

    // phi(u) for u > 0. Closed form for Stable, RelativisticStable and
    // PureDrift; adaptive quadrature otherwise (relative error <= 1e-8).
    double evaluate(double u) const;

    // phi(u) by direct quadrature of the Levy integral for every kind; the
    // cross-check route for the closed forms.
    double evaluate_by_quadrature(double u, double rel_tol = 1e-10) const;

    double drift() const;

    // Levy density at x (0 outside the support).
    double levy_density(double x) const;

    // int x nu(dx); infinity for Stable.
    double levy_mean() const;
    bool has_finite_mean() const;

    // phi'(0+) = theta + int x nu(dx); the subordinator mean rate.
    double mean_rate() const { return drift() + levy_mean(); }

    const Kind& kind() const { return kind_; }
    std::string kind_name() const;

private:
    explicit BernsteinFunction(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

} // namespace gruschin
