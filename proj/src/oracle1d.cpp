#include "homodefect/oracle1d.hpp"

#include <cmath>

namespace homodefect {

namespace {

// 7-point Gauss-Legendre nodes/weights on [-1,1]
constexpr double kGx[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                           0.0,
                           0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
constexpr double kGw[7] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                           0.4179591836734694,
                           0.3818300505051189, 0.2797053914892766, 0.1294849661688697};

}  // namespace

double gauss7(const std::function<double(double)>& fn, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += kGw[i] * fn(mid + half * kGx[i]);
    return s * half;
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> fn, double x0, double x1,
                                       int min_panels, double rel_tol)
    : fn_(std::move(fn)), x0_(x0), x1_(x1) {
    if (!(x1 > x0)) throw ConfigError("CumulativeIntegral: empty interval");
    int n = std::max(min_panels, 32);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int pass = 0; pass < 16; ++pass) {
        dx_ = (x1_ - x0_) / n;
        prefix_.assign(std::size_t(n) + 1, 0.0);
        for (int i = 0; i < n; ++i)
            prefix_[std::size_t(i) + 1] =
                prefix_[std::size_t(i)] + gauss7(fn_, x0_ + i * dx_, x0_ + (i + 1) * dx_);
        const double tot = prefix_.back();
        if (pass > 0 && std::abs(tot - prev) <= rel_tol * (1.0 + std::abs(tot))) return;
        prev = tot;
        n *= 2;
    }
}

double CumulativeIntegral::operator()(double x) const {
    if (x <= x0_) return 0.0;
    if (x >= x1_) return prefix_.back();
    const double s = (x - x0_) / dx_;
    const int i = std::min(int(std::floor(s)), int(prefix_.size()) - 2);
    const double xp = x0_ + i * dx_;
    return prefix_[std::size_t(i)] + gauss7(fn_, xp, x);
}

double exact_astar_1d(const CoefficientSpec& spec) {
    if (!(spec.periodic_at({0, 0, 0}) > 0)) throw ConfigError("a_per must be positive");
    auto inv = [&](double y) { return 1.0 / spec.periodic_at({y, 0, 0}); };
    CumulativeIntegral ci(inv, 0.0, 1.0, 64, 1e-12);
    return 1.0 / ci.total();
}

OracleCorrector1D::OracleCorrector1D(const CoefficientSpec& spec, double ymax, double rel_tol)
    : spec_(spec), ymax_(std::max(ymax, 1.0)) {
    astar_ = exact_astar_1d(spec);
    auto per_integrand = [this](double y) { return astar_ / spec_.periodic_at({y, 0, 0}) - 1.0; };
    cell_ = CumulativeIntegral(per_integrand, 0.0, 1.0, 64, rel_tol);
    // cell mean of the primitive, subtracted so mean(w_per) = 0
    const int m = 2048;
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += cell_((i + 0.5) / m);
    mean_ = s / m;
    auto tilde_integrand = [this](double y) {
        const Point p{y, 0, 0};
        const double ap = spec_.periodic_at(p);
        return astar_ * (1.0 / (ap + spec_.defect_at(p)) - 1.0 / ap);
    };
    const int panels = std::max(64, int(2 * ymax_ * 32));
    tilde_ = CumulativeIntegral(tilde_integrand, -ymax_, ymax_, panels, rel_tol);
    tilde_at0_ = tilde_(0.0);
}

double OracleCorrector1D::w_per(double y) const { return cell_(frac(y)) - mean_; }
double OracleCorrector1D::w_per_prime(double y) const {
    return astar_ / spec_.periodic_at({frac(y), 0, 0}) - 1.0;
}
double OracleCorrector1D::w_tilde(double y) const { return tilde_(y) - tilde_at0_; }
double OracleCorrector1D::w_tilde_prime(double y) const {
    const Point p{y, 0, 0};
    const double ap = spec_.periodic_at(p);
    return astar_ * (1.0 / (ap + spec_.defect_at(p)) - 1.0 / ap);
}

std::pair<double, double> exact_corrector_1d(const CoefficientSpec& spec, double y) {
    if (spec.dim != 1) throw ConfigError("exact_corrector_1d: spec must be 1D");
    OracleCorrector1D oc(spec, std::abs(y) + 1.0);
    return {oc.w_per(y), oc.w_tilde(y)};
}

OracleSolution1D::OracleSolution1D(const CoefficientSpec& spec, double eps, const SourceSpec& f,
                                   double lo, double hi)
    : spec_(spec), eps_(eps) {
    astar_ = exact_astar_1d(spec);
    auto src = [&, f](double x) { return f.eval({x, 0, 0}, 1); };
    fsrc_ = CumulativeIntegral(src, lo, hi, 256, 1e-12);
    auto coef = [this](double x) { return coefficient(x); };
    const int panels = eps_ > 0 ? std::max(256, int((hi - lo) / eps_ * 32)) : 256;
    ainv_ = CumulativeIntegral([&, coef](double x) { return 1.0 / coef(x); }, lo, hi, panels, 1e-11);
    g_ = CumulativeIntegral([this, coef](double x) { return fsrc_(x) / coef(x); }, lo, hi, panels,
                            1e-11);
    c_ = g_.total() / ainv_.total();
}

double OracleSolution1D::coefficient(double x) const {
    if (eps_ <= 0.0) return astar_;
    return spec_.eval({x / eps_, 0, 0});
}

double OracleSolution1D::u(double x) const { return c_ * ainv_(x) - g_(x); }
double OracleSolution1D::du(double x) const { return (c_ - fsrc_(x)) / coefficient(x); }

NormsRecord oracle_remainder_norms(const CoefficientSpec& spec, double eps, const SourceSpec& f,
                                   bool periodic_only, double omega_halfwidth,
                                   double omega1_halfwidth, const std::vector<double>& p_list) {
    if (spec.dim != 1) throw ConfigError("oracle_remainder_norms: 1D only");
    const double L = omega_halfwidth;
    OracleSolution1D ue(spec, eps, f, -L, L);
    OracleSolution1D us(spec, 0.0, f, -L, L);
    OracleCorrector1D oc(spec, L / eps + 1.0);
    const double astar = oc.astar();

    const int m = std::max(8192, int(2 * L / eps * 64));
    const double dx = 2.0 * L / m;
    NormsRecord out;
    double acc2_R = 0.0, acc2_diff = 0.0, acc2_grad1 = 0.0;
    std::vector<double> accp(p_list.size(), 0.0);
    for (int i = 0; i < m; ++i) {
        const double x = -L + (i + 0.5) * dx;
        const double y = x / eps;
        const double wv = periodic_only ? oc.w_per(y) : oc.w(y);
        const double wp = periodic_only ? oc.w_per_prime(y) : oc.w_prime(y);
        const double dus = us.du(x);
        const double d2us = -f.eval({x, 0, 0}, 1) / astar;
        const double R = ue.u(x) - us.u(x) - eps * wv * dus;
        const double dR = ue.du(x) - dus - wp * dus - eps * wv * d2us;
        const double diff = ue.u(x) - us.u(x);
        acc2_R += R * R * dx;
        acc2_diff += diff * diff * dx;
        out.linf_diff = std::max(out.linf_diff, std::abs(diff));
        for (std::size_t q = 0; q < p_list.size(); ++q)
            accp[q] += std::pow(std::abs(R), p_list[q]) * dx;
        if (std::abs(x) <= omega1_halfwidth) {
            acc2_grad1 += dR * dR * dx;
            out.linf_grad_R_1 = std::max(out.linf_grad_R_1, std::abs(dR));
        }
    }
    out.l2_R = std::sqrt(acc2_R);
    out.l2_diff = std::sqrt(acc2_diff);
    out.l2_grad_R_1 = std::sqrt(acc2_grad1);
    for (std::size_t q = 0; q < p_list.size(); ++q)
        out.lp_R.emplace_back(p_list[q], std::pow(accp[q], 1.0 / p_list[q]));
    return out;
}

}  // namespace homodefect
