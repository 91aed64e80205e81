#pragma once

#include <string>

#include "homodefect/common.hpp"

namespace homodefect {

// Closed library of analytic prototypes. All periodic parts are 1-periodic
// in every axis; evaluation reduces the argument to [0,1)^d so period
// shifts are bit-identical.
enum class PeriodicKind { constant, sin_product, checkerboard, laminate };
enum class DefectKind { none, gaussian, power, bump };

struct PeriodicPart {
    PeriodicKind kind = PeriodicKind::constant;
    double base = 1.0;   // constant value / offset
    double amp = 0.0;    // oscillation amplitude (sin_product, checkerboard)
    double v0 = 1.0;     // laminate phase values
    double v1 = 1.0;
    double sharpness = 4.0;  // checkerboard / laminate smoothing
    int axis = 0;            // laminate variation axis
};

struct DefectPart {
    DefectKind kind = DefectKind::none;
    double amplitude = 0.0;
    Point center{0, 0, 0};
    double width = 1.0;  // gaussian width / bump support radius
    double s = 2.0;      // power-law decay exponent
};

struct CoefficientSpec {
    int dim = 1;
    PeriodicPart periodic;
    DefectPart defect;
    double r = 2.0;      // defect integrability exponent, in (1,inf), r != dim
    double mu = 4.0;     // claimed ellipticity constant
    double alpha = 1.0;  // Hoelder exponent, metadata only

    double periodic_at(const Point& y) const;
    double defect_at(const Point& y) const;
    double eval(const Point& y) const { return periodic_at(y) + defect_at(y); }
    bool has_defect() const { return defect.kind != DefectKind::none && defect.amplitude != 0.0; }

    void validate() const;  // structural checks (r range, s*r > d, ...)
    std::string canonical_json() const;  // deterministic serialization (cache keys)
};

CoefficientSpec parse_coefficient_spec(const std::string& json_text);

struct EllipticityReport {
    double min_per = 0.0, max_per = 0.0;
    double min_full = 0.0, max_full = 0.0;
    bool pass = false;
};

// Samples a_per and a_per + a~ on the lattice of [-box_radius, box_radius]^d.
// Throws ValidationFailed (with the violating point) when a value leaves
// [1/mu, mu].
EllipticityReport validate_ellipticity(const CoefficientSpec& spec, int sample_resolution,
                                       double box_radius);

// Composite midpoint quadrature of |a~|^r over [-box_radius, box_radius]^d,
// to the power 1/r.
double lr_norm_estimate(const CoefficientSpec& spec, double box_radius, int resolution);

}  // namespace homodefect
