#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "homodefect/coefficients.hpp"
#include "homodefect/norms.hpp"
#include "homodefect/sources.hpp"

namespace homodefect {

// Cached antiderivative F(x) = int_{x0}^{x} fn, composite 7-point
// Gauss-Legendre per panel, panel count doubled until the endpoint value
// is stable. Panels never drop below min_panels (>= 32 per period of the
// fastest oscillation of the integrand, supplied by the caller).
class CumulativeIntegral {
  public:
    CumulativeIntegral() = default;
    CumulativeIntegral(std::function<double(double)> fn, double x0, double x1,
                       int min_panels, double rel_tol = 1e-11);
    double operator()(double x) const;
    double total() const { return prefix_.back(); }
    double lo() const { return x0_; }
    double hi() const { return x1_; }

  private:
    std::function<double(double)> fn_;
    double x0_ = 0.0, x1_ = 1.0, dx_ = 1.0;
    std::vector<double> prefix_;
};

double gauss7(const std::function<double(double)>& fn, double a, double b);

// Harmonic mean of a_per over the unit cell, adaptive to relative 1e-10.
double exact_astar_1d(const CoefficientSpec& spec);

// Closed-form 1D corrector machinery: the flux a(1+w') is constant, so
// w' = astar/a - 1, split as w_per' = astar/a_per - 1 and
// w~' = astar (1/a - 1/a_per).
class OracleCorrector1D {
  public:
    OracleCorrector1D(const CoefficientSpec& spec, double ymax, double rel_tol = 1e-10);
    double astar() const { return astar_; }
    double w_per(double y) const;        // zero cell mean
    double w_per_prime(double y) const;
    double w_tilde(double y) const;      // gauge w~(0) = 0
    double w_tilde_prime(double y) const;
    double w(double y) const { return w_per(y) + w_tilde(y); }
    double w_prime(double y) const { return w_per_prime(y) + w_tilde_prime(y); }
    double ymax() const { return ymax_; }

  private:
    CoefficientSpec spec_;
    double astar_ = 0.0, ymax_ = 0.0, mean_ = 0.0;
    CumulativeIntegral cell_;     // int_0^y (astar/a_per - 1) on [0,1]
    CumulativeIntegral tilde_;    // int_{-ymax}^y astar (1/a - 1/a_per)
    double tilde_at0_ = 0.0;
};

// (w_per(y), w~(y)) for a 1D spec; convenience wrapper.
std::pair<double, double> exact_corrector_1d(const CoefficientSpec& spec, double y);

// Exact 1D Dirichlet solution by quadrature: a(x/eps) u' = c - F with
// F(x) = int_{lo}^x f, c fixed by u(hi) = 0.
class OracleSolution1D {
  public:
    // eps = 0 requests the homogenized problem (constant coefficient astar)
    OracleSolution1D(const CoefficientSpec& spec, double eps, const SourceSpec& f,
                     double lo = -1.0, double hi = 1.0);
    double u(double x) const;
    double du(double x) const;
    double flux_constant() const { return c_; }
    double source_antiderivative(double x) const { return fsrc_(x); }
    double coefficient(double x) const;

  private:
    CoefficientSpec spec_;
    double eps_ = 0.0, astar_ = 0.0, c_ = 0.0;
    CumulativeIntegral fsrc_;   // int f
    CumulativeIntegral ainv_;   // int 1/a(t/eps)
    CumulativeIntegral g_;      // int F/a(t/eps)
};

// Assembles R_eps from the exact pieces and evaluates the remainder norm
// channels by midpoint quadrature; periodic_only swaps w for w_per.
NormsRecord oracle_remainder_norms(const CoefficientSpec& spec, double eps,
                                   const SourceSpec& f, bool periodic_only,
                                   double omega_halfwidth = 1.0,
                                   double omega1_halfwidth = 0.5,
                                   const std::vector<double>& p_list = {});

}  // namespace homodefect
