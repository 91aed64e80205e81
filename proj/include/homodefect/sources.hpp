#pragma once

#include <string>

#include "homodefect/common.hpp"

namespace homodefect {

// Analytic right-hand-side library; every member is C^inf so the same
// source serves both the L2 and Hoelder-regularity channels.
enum class SourceKind { one, gaussian, cos_product };

struct SourceSpec {
    SourceKind kind = SourceKind::one;
    double amplitude = 1.0;
    double width = 0.5;          // gaussian only
    Point center{0, 0, 0};       // gaussian only; off-center breaks the mirror
                                 // symmetry that makes grad u* vanish at 0

    double eval(const Point& x, int dim) const {
        switch (kind) {
            case SourceKind::one:
                return amplitude;
            case SourceKind::gaussian: {
                double rr = 0.0;
                for (int k = 0; k < dim; ++k)
                    rr += (x[k] - center[k]) * (x[k] - center[k]);
                return amplitude * std::exp(-rr / (width * width));
            }
            case SourceKind::cos_product: {
                double p = 1.0;
                for (int k = 0; k < dim; ++k) p *= std::cos(1.5707963267948966 * x[k]);
                return amplitude * p;
            }
        }
        throw ConfigError("unknown source kind");
    }
};

inline SourceSpec parse_source(const std::string& tag) {
    SourceSpec s;
    if (tag == "one") s.kind = SourceKind::one;
    else if (tag == "gaussian") s.kind = SourceKind::gaussian;
    else if (tag == "cos_product") s.kind = SourceKind::cos_product;
    else throw ConfigError("unknown source tag: " + tag);
    return s;
}

inline std::string source_tag(const SourceSpec& s) {
    switch (s.kind) {
        case SourceKind::one: return "one";
        case SourceKind::gaussian: return "gaussian";
        case SourceKind::cos_product: return "cos_product";
    }
    return "?";
}

}  // namespace homodefect
