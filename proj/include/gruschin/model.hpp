#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace gruschin {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct StatePoint {
    Vector x1; // first component, R^m
    Vector x2; // second component, R^d
};

// Time-indexed m x m diffusion matrix; identity or a piecewise-constant
// table (value mats[i] on [times[i], times[i+1]), cadlag).
class SigmaSpec {
public:
    static SigmaSpec identity();
    static SigmaSpec table(std::vector<double> times, std::vector<Matrix> mats);

    bool is_identity() const { return identity_; }
    Matrix at(double t, int m) const;
    // Largest operator norm of sigma_t^{-1}; throws if singular.
    double inverse_norm(double t, int m) const;

private:
    bool identity_ = true;
    std::vector<double> times_;
    std::vector<Matrix> mats_;
};

// Scalar function of time, constant or piecewise-constant cadlag table,
// with an exact integral (used for lambda_t, k(t) and K(s,t)).
class ScalarTimeFn {
public:
    static ScalarTimeFn constant(double v);
    static ScalarTimeFn table(std::vector<double> times, std::vector<double> values);

    double at(double t) const;
    double integral(double s, double t) const;
    bool is_constant() const { return times_.empty(); }

private:
    double constant_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

class DriftSpec {
public:
    using Fn = std::function<Vector(double, const Vector&)>;

    static DriftSpec zero();
    static DriftSpec linear(double coef);                // b(t,z) = coef * z
    static DriftSpec ou(double rate, Vector target);     // b(t,z) = rate (target - z)
    static DriftSpec custom(Fn fn);

    Vector at(double t, const Vector& z) const;
    bool is_zero() const { return kind_ == Kind::Zero; }

private:
    enum class Kind { Zero, Linear, Ou, Custom } kind_ = Kind::Zero;
    double coef_ = 0.0;
    Vector target_;
    Fn fn_;
};

// The SDE coefficient set plus its hypotheses:
//   (H1) sigma_t invertible with ||sigma_t^{-1}|| <= lambda_t, lambda non-decreasing;
//   (H2) <b(t,x)-b(t,y), x-y> <= k(t) |x-y|^2.
// Both are checked at construction (grid check for (H1), randomized spot
// check for (H2)); a failing model is rejected.
class GruschinModel {
public:
    GruschinModel(int m, int d, double l, SigmaSpec sigma, ScalarTimeFn lambda, DriftSpec b,
                  ScalarTimeFn k, double t_max_check = 2.0);

    int m() const { return m_; }
    int d() const { return d_; }
    double l() const { return l_; }

    Matrix sigma(double t) const { return sigma_.at(t, m_); }
    bool sigma_is_identity() const { return sigma_.is_identity(); }
    double lambda(double t) const { return lambda_.at(t); }
    Vector b(double t, const Vector& z) const { return b_.at(t, z); }
    bool drift_is_zero() const { return b_.is_zero(); }
    double k(double t) const { return k_.at(t); }
    double K(double s, double t) const { return k_.integral(s, t); }

    double diffusion_coefficient(const Vector& x1) const; // |x1|^l

private:
    int m_, d_;
    double l_;
    SigmaSpec sigma_;
    ScalarTimeFn lambda_;
    DriftSpec b_;
    ScalarTimeFn k_;
};

} // namespace gruschin
