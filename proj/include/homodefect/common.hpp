#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace homodefect {

// Points are zero-padded to 3 components; only the first `dim` are meaningful.
using Point = std::array<double, 3>;

inline Point make_point(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

inline double sup_norm(const Point& p, int dim) {
    double m = 0.0;
    for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(p[k]));
    return m;
}

inline double euclid_norm(const Point& p, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += p[k] * p[k];
    return std::sqrt(s);
}

// Reduce to [0,1) exactly; used so periodic evaluations are bit-identical
// across period shifts.
inline double frac(double y) {
    double f = y - std::floor(y);
    if (f >= 1.0) f = 0.0;
    return f;
}

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error { using Error::Error; };
struct ValidationFailed : Error {
    Point where{};
    double value = 0.0;
    ValidationFailed(const std::string& msg, Point w, double v)
        : Error(msg), where(w), value(v) {}
};
struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct EmptySubdomain : Error { using Error::Error; };
struct NoConvergence : Error {
    long iterations = 0;
    double residual = 0.0;
    NoConvergence(const std::string& msg, long it, double res)
        : Error(msg), iterations(it), residual(res) {}
};
struct ResolutionTooCoarse : Error { using Error::Error; };
struct TruncationTooSmall : Error { using Error::Error; };
struct DefectNotCentered : Error { using Error::Error; };
struct InsufficientRadii : Error { using Error::Error; };
struct InsufficientPoints : Error { using Error::Error; };
struct NonPositiveValue : Error { using Error::Error; };
struct CriticalExponent : Error { using Error::Error; };
struct DegenerateOscillation : Error { using Error::Error; };

// FNV-1a, used for content-addressed corrector cache keys.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace homodefect
