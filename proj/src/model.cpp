#include "gruschin/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gruschin/rng.hpp"

namespace gruschin {

namespace {

std::size_t table_cell(const std::vector<double>& times, double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

} // namespace

SigmaSpec SigmaSpec::identity() { return SigmaSpec{}; }

SigmaSpec SigmaSpec::table(std::vector<double> times, std::vector<Matrix> mats) {
    if (times.size() != mats.size() || times.empty())
        throw std::invalid_argument("SigmaSpec::table: times and matrices must align");
    if (times.front() != 0.0) throw std::invalid_argument("SigmaSpec::table: first knot must be 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("SigmaSpec::table: knots must increase");
    const Eigen::Index m = mats.front().rows();
    for (const Matrix& s : mats)
        if (s.rows() != m || s.cols() != m)
            throw std::invalid_argument("SigmaSpec::table: matrices must be square, same size");
    SigmaSpec spec;
    spec.identity_ = false;
    spec.times_ = std::move(times);
    spec.mats_ = std::move(mats);
    return spec;
}

Matrix SigmaSpec::at(double t, int m) const {
    if (identity_) return Matrix::Identity(m, m);
    return mats_[table_cell(times_, t)];
}

double SigmaSpec::inverse_norm(double t, int m) const {
    if (identity_) return 1.0;
    Matrix s = at(t, m);
    Eigen::JacobiSVD<Matrix> svd(s);
    double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0)) throw std::invalid_argument("sigma_t is singular on the check grid");
    return 1.0 / smin;
}

ScalarTimeFn ScalarTimeFn::constant(double v) {
    ScalarTimeFn f;
    f.constant_ = v;
    return f;
}

ScalarTimeFn ScalarTimeFn::table(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.empty())
        throw std::invalid_argument("ScalarTimeFn::table: times and values must align");
    if (times.front() != 0.0) throw std::invalid_argument("ScalarTimeFn::table: first knot must be 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("ScalarTimeFn::table: knots must increase");
    ScalarTimeFn f;
    f.times_ = std::move(times);
    f.values_ = std::move(values);
    return f;
}

double ScalarTimeFn::at(double t) const {
    if (times_.empty()) return constant_;
    return values_[table_cell(times_, t)];
}

double ScalarTimeFn::integral(double s, double t) const {
    if (s > t) throw std::invalid_argument("ScalarTimeFn::integral: s > t");
    if (times_.empty()) return constant_ * (t - s);
    double total = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        double lo = std::max(s, times_[i]);
        double hi = i + 1 < times_.size() ? std::min(t, times_[i + 1]) : t;
        if (hi > lo) total += values_[i] * (hi - lo);
    }
    return total;
}

DriftSpec DriftSpec::zero() { return DriftSpec{}; }

DriftSpec DriftSpec::linear(double coef) {
    DriftSpec d;
    d.kind_ = Kind::Linear;
    d.coef_ = coef;
    return d;
}

DriftSpec DriftSpec::ou(double rate, Vector target) {
    if (rate < 0.0) throw std::invalid_argument("DriftSpec::ou: rate must be >= 0");
    DriftSpec d;
    d.kind_ = Kind::Ou;
    d.coef_ = rate;
    d.target_ = std::move(target);
    return d;
}

DriftSpec DriftSpec::custom(Fn fn) {
    if (!fn) throw std::invalid_argument("DriftSpec::custom: empty function");
    DriftSpec d;
    d.kind_ = Kind::Custom;
    d.fn_ = std::move(fn);
    return d;
}

Vector DriftSpec::at(double t, const Vector& z) const {
    switch (kind_) {
        case Kind::Zero: return Vector::Zero(z.size());
        case Kind::Linear: return coef_ * z;
        case Kind::Ou: return coef_ * (target_ - z);
        case Kind::Custom: return fn_(t, z);
    }
    return Vector::Zero(z.size());
}

GruschinModel::GruschinModel(int m, int d, double l, SigmaSpec sigma, ScalarTimeFn lambda,
                             DriftSpec b, ScalarTimeFn k, double t_max_check)
    : m_(m), d_(d), l_(l), sigma_(std::move(sigma)), lambda_(std::move(lambda)),
      b_(std::move(b)), k_(std::move(k)) {
    if (m_ < 1 || d_ < 1) throw std::invalid_argument("GruschinModel: m and d must be >= 1");
    if (!(l_ > 0.0)) throw std::invalid_argument("GruschinModel: l must be positive");
    if (!(t_max_check > 0.0)) throw std::invalid_argument("GruschinModel: t_max_check must be positive");

    // (H1) on a grid: invertibility, ||sigma^{-1}|| <= lambda, lambda non-decreasing.
    const int n_grid = 64;
    double prev_lambda = -1.0;
    for (int i = 0; i <= n_grid; ++i) {
        double t = t_max_check * i / n_grid;
        double lam = lambda_.at(t);
        if (!(lam > 0.0)) throw std::invalid_argument("(H1) violated: lambda must be positive");
        if (lam + 1e-12 < prev_lambda)
            throw std::invalid_argument("(H1) violated: lambda must be non-decreasing");
        prev_lambda = lam;
        double inv_norm = sigma_.inverse_norm(t, m_);
        if (inv_norm > lam * (1.0 + 1e-9)) {
            std::ostringstream os;
            os << "(H1) violated at t = " << t << ": ||sigma^-1|| = " << inv_norm
               << " exceeds lambda = " << lam;
            throw std::invalid_argument(os.str());
        }
    }

    // (H2) spot check on random (t, x, y) triples.
    Rng rng(0x5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, t_max_check);
    for (int trial = 0; trial < 64; ++trial) {
        double t = ut(rng);
        Vector z1(d_), z2(d_);
        for (int j = 0; j < d_; ++j) {
            z1[j] = 3.0 * gauss(rng);
            z2[j] = 3.0 * gauss(rng);
        }
        Vector diff = z1 - z2;
        double lhs = (b_.at(t, z1) - b_.at(t, z2)).dot(diff);
        double rhs = k_.at(t) * diff.squaredNorm();
        if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) {
            std::ostringstream os;
            os << "(H2) violated at t = " << t << ": <b(t,x)-b(t,y), x-y> = " << lhs
               << " exceeds k(t)|x-y|^2 = " << rhs;
            throw std::invalid_argument(os.str());
        }
    }
}

double GruschinModel::diffusion_coefficient(const Vector& x1) const {
    return std::pow(x1.norm(), l_);
}

} // namespace gruschin
