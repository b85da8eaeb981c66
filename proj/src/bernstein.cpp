#include "gruschin/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace gruschin {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// (1 - exp(-u x)) free of cancellation for small u x.
inline double one_minus_exp(double ux) { return -std::expm1(-ux); }

// int_a^b (1 - e^{-u x}) nu(x) dx, a < b, nu possibly singular at a. The
// quadrature abscissae can round onto the singular endpoint; the integrand
// is zeroed there (the double-exponential weight is negligible anyway).
double levy_piece(const std::function<double(double)>& nu, double u, double a, double b) {
    if (!(b > a)) return 0.0;
    auto f = [&](double x) {
        if (x <= 1e-30) return 0.0;
        return one_minus_exp(u * x) * nu(x);
    };
    if (std::isinf(b)) {
        boost::math::quadrature::exp_sinh<double> integrator;
        auto shifted = [&](double x) { return f(a + x); };
        return integrator.integrate(shifted, 1e-10);
    }
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, a, b, 1e-10);
}

double levy_integral(const std::function<double(double)>& nu, double u, double lo, double hi) {
    // Split at 1/u: below it the integrand behaves like u*x*nu(x), above it
    // saturates toward nu(x).
    double split = std::clamp(1.0 / u, lo, hi);
    double v = 0.0;
    if (split > lo) v += levy_piece(nu, u, lo, split);
    if (hi > split) v += levy_piece(nu, u, split, hi);
    return v;
}

// Probes int (1 ^ x) nu(dx) over dyadic blocks. Throws with the divergent
// region named if the blocks fail to decay.
void check_integrability(const std::function<double(double)>& nu, double lo, double hi) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto block = [&](double a, double b, bool weight_x) {
        auto f = [&](double x) {
            if (x <= 1e-30) return 0.0;
            return weight_x ? x * nu(x) : nu(x);
        };
        return integrator.integrate(f, a, b, 1e-9);
    };

    auto diagnose = [](const std::string& region) {
        std::ostringstream os;
        os << "custom Levy density is not integrable against (1 ^ x): divergence " << region;
        throw std::invalid_argument(os.str());
    };

    if (lo < 1.0) {
        double total = 0.0, prev = -1.0;
        double b = std::min(1.0, hi);
        for (int k = 0; k < 60 && b > lo; ++k) {
            double a = std::max(lo, b / 2.0);
            double cur = block(a, b, true);
            if (!std::isfinite(cur) || total > 1e12) diagnose("near x = 0+");
            total += cur;
            // A convergent integral has geometrically decaying blocks; a
            // borderline x^{-2} density keeps them flat.
            if (k > 20 && prev > 0.0 && cur > 0.95 * prev && cur > 1e-10 * (1.0 + total))
                diagnose("near x = 0+");
            prev = cur;
            b = a;
        }
    }
    if (hi > 1.0) {
        double total = 0.0, prev = -1.0;
        double a = std::max(1.0, lo);
        for (int k = 0; k < 60 && a < hi; ++k) {
            double b = std::min(hi, a * 2.0);
            double cur = block(a, b, false);
            if (!std::isfinite(cur) || total > 1e12) diagnose("in the tail x -> inf");
            total += cur;
            if (k > 20 && prev > 0.0 && cur > 0.95 * prev && cur > 1e-10 * (1.0 + total))
                diagnose("in the tail x -> inf");
            prev = cur;
            a = b;
        }
    }
}

} // namespace

double RelativisticStableKind::tempering_rate() const { return std::pow(rho, 1.0 / beta); }

BernsteinFunction BernsteinFunction::stable(double alpha, double c) {
    require(alpha > 0.0 && alpha < 1.0, "stable: alpha must lie in (0,1)");
    require(c > 0.0, "stable: c must be positive");
    return BernsteinFunction(StableKind{alpha, c});
}

BernsteinFunction BernsteinFunction::truncated_stable(double beta, double c) {
    require(beta > 0.0 && beta < 1.0, "truncated_stable: beta must lie in (0,1)");
    require(c > 0.0, "truncated_stable: c must be positive");
    return BernsteinFunction(TruncatedStableKind{beta, c});
}

BernsteinFunction BernsteinFunction::relativistic_stable(double beta, double c, double rho) {
    require(beta > 0.0 && beta < 1.0, "relativistic_stable: beta must lie in (0,1)");
    require(c > 0.0, "relativistic_stable: c must be positive");
    require(rho > 0.0, "relativistic_stable: rho must be positive");
    return BernsteinFunction(RelativisticStableKind{beta, c, rho});
}

BernsteinFunction BernsteinFunction::pure_drift(double theta) {
    require(theta >= 0.0, "pure_drift: theta must be non-negative");
    return BernsteinFunction(PureDriftKind{theta});
}

BernsteinFunction BernsteinFunction::custom(double theta, std::function<double(double)> levy_density,
                                            double support_lo, double support_hi) {
    require(theta >= 0.0, "custom: theta must be non-negative");
    require(levy_density != nullptr, "custom: levy_density required");
    require(support_lo >= 0.0 && support_hi > support_lo, "custom: invalid support bounds");
    check_integrability(levy_density, support_lo, support_hi);
    return BernsteinFunction(CustomKind{theta, std::move(levy_density), support_lo, support_hi});
}

double BernsteinFunction::evaluate(double u) const {
    require(u > 0.0, "evaluate: u must be positive");
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StableKind>) {
                return k.c * std::tgamma(1.0 - k.alpha) / k.alpha * std::pow(u, k.alpha);
            } else if constexpr (std::is_same_v<K, RelativisticStableKind>) {
                double q = k.tempering_rate();
                return k.c / k.beta * std::tgamma(1.0 - k.beta) *
                       (std::pow(u + q, k.beta) - k.rho);
            } else if constexpr (std::is_same_v<K, PureDriftKind>) {
                return k.theta * u;
            } else if constexpr (std::is_same_v<K, TruncatedStableKind>) {
                auto nu = [&](double x) { return k.c * std::pow(x, -1.0 - k.beta); };
                return levy_integral(nu, u, 0.0, 1.0);
            } else {
                return k.theta * u + levy_integral(k.levy_density, u, k.support_lo, k.support_hi);
            }
        },
        kind_);
}

double BernsteinFunction::evaluate_by_quadrature(double u, double /*rel_tol*/) const {
    require(u > 0.0, "evaluate_by_quadrature: u must be positive");
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    if (const auto* t = std::get_if<TruncatedStableKind>(&kind_)) {
        (void)t;
        hi = 1.0;
    } else if (const auto* c = std::get_if<CustomKind>(&kind_)) {
        lo = c->support_lo;
        hi = c->support_hi;
    } else if (std::holds_alternative<PureDriftKind>(kind_)) {
        return drift() * u;
    }
    auto nu = [&](double x) { return levy_density(x); };
    return drift() * u + levy_integral(nu, u, lo, hi);
}

double BernsteinFunction::drift() const {
    if (const auto* p = std::get_if<PureDriftKind>(&kind_)) return p->theta;
    if (const auto* c = std::get_if<CustomKind>(&kind_)) return c->theta;
    return 0.0;
}

double BernsteinFunction::levy_density(double x) const {
    if (x <= 0.0) return 0.0;
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StableKind>) {
                return k.c * std::pow(x, -1.0 - k.alpha);
            } else if constexpr (std::is_same_v<K, TruncatedStableKind>) {
                return x < 1.0 ? k.c * std::pow(x, -1.0 - k.beta) : 0.0;
            } else if constexpr (std::is_same_v<K, RelativisticStableKind>) {
                return k.c * std::exp(-k.tempering_rate() * x) * std::pow(x, -1.0 - k.beta);
            } else if constexpr (std::is_same_v<K, PureDriftKind>) {
                return 0.0;
            } else {
                return (x > k.support_lo && x < k.support_hi) ? k.levy_density(x) : 0.0;
            }
        },
        kind_);
}

double BernsteinFunction::levy_mean() const {
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StableKind>) {
                return std::numeric_limits<double>::infinity();
            } else if constexpr (std::is_same_v<K, TruncatedStableKind>) {
                return k.c / (1.0 - k.beta);
            } else if constexpr (std::is_same_v<K, RelativisticStableKind>) {
                // int x nu(dx) = c Gamma(1-beta) q^{beta-1}
                double q = k.tempering_rate();
                return k.c * std::tgamma(1.0 - k.beta) * std::pow(q, k.beta - 1.0);
            } else if constexpr (std::is_same_v<K, PureDriftKind>) {
                return 0.0;
            } else {
                boost::math::quadrature::tanh_sinh<double> ts;
                auto f = [&](double x) { return x * k.levy_density(x); };
                if (std::isinf(k.support_hi)) {
                    boost::math::quadrature::exp_sinh<double> es;
                    auto shifted = [&](double x) { return f(k.support_lo + x); };
                    return es.integrate(shifted, 1e-10);
                }
                return ts.integrate(f, k.support_lo, k.support_hi, 1e-10);
            }
        },
        kind_);
}

bool BernsteinFunction::has_finite_mean() const { return std::isfinite(levy_mean()); }

std::string BernsteinFunction::kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, StableKind>) return "stable";
            else if constexpr (std::is_same_v<K, TruncatedStableKind>) return "truncated_stable";
            else if constexpr (std::is_same_v<K, RelativisticStableKind>) return "relativistic_stable";
            else if constexpr (std::is_same_v<K, PureDriftKind>) return "pure_drift";
            else return "custom";
        },
        kind_);
}

} // namespace gruschin
