// Uniform tensor grids, trapezoid quadrature, discrete Fourier evaluation, and
// log-space complex accumulation. Everything downstream builds on these types.
#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace gevlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Endpoint-inclusive uniform tensor grid in 1, 2, or 4 dimensions.
struct Grid {
    int dims = 0;
    std::vector<double> center;
    std::vector<double> half_width;
    std::vector<int> points;
    std::vector<double> spacing;  // 2*half_width/(points-1), derived

    std::size_t node_count() const;
    double coord(int axis, int index) const {
        return center[axis] - half_width[axis] + spacing[axis] * index;
    }
    // Product of spacings: the volume of one interior cell.
    double cell() const;
    // Trapezoid weight for one axis index (1/2 at the two endpoints).
    double axis_weight(int axis, int index) const {
        return (index == 0 || index == points[axis] - 1) ? 0.5 : 1.0;
    }
    // Decomposes a flat row-major node index into per-axis indices.
    void unflatten(std::size_t flat, int* idx) const;
    std::size_t flatten(const int* idx) const;
    // Combined trapezoid weight of a node times the cell volume.
    double quad_weight(const int* idx) const;
};

Grid make_grid(const std::vector<double>& center,
               const std::vector<double>& half_width,
               const std::vector<int>& points_per_axis);

struct SampledField {
    Grid grid;
    std::vector<cplx> values;
};

// Complex number stored as (log magnitude, phase). log_mag = -inf encodes 0.
// Needed because remainder magnitudes like exp(-c h^{-1/s}) underflow doubles.
struct LogComplex {
    double log_mag;
    double phase;  // in (-pi, pi]

    static LogComplex zero();
    static LogComplex from(cplx z);
    static LogComplex from_polar(double log_mag, double phase);
    cplx to_complex() const;
    bool is_zero() const;
};

LogComplex log_mul(const LogComplex& a, const LogComplex& b);
// Multiply by a plain complex factor (magnitude folded into log space).
LogComplex log_mul(const LogComplex& a, cplx b);
// Scale the magnitude by exp(dlog).
LogComplex log_scale(const LogComplex& a, double dlog);

// Running log-space sum: tracks the max exponent and a rescaled complex sum.
// Deterministic for a fixed insertion order.
struct LogAccumulator {
    double max_log;
    cplx scaled;

    LogAccumulator();
    void add(const LogComplex& term);
    void add(double log_mag, double phase);
    void add_scaled(const LogComplex& term, double extra_log, double extra_phase);
    LogComplex result() const;
};

LogComplex log_sum(const std::vector<LogComplex>& terms);

// Tensor trapezoid rule over the grid box; exact for per-axis affine integrands.
cplx quad(const SampledField& field);

// Trapezoid approximation of the transform  u_hat(xi) = Int e^{-i y.xi} u(y) dy.
cplx fourier_eval(const SampledField& field, const std::vector<double>& xi);

double wrap_phase(double phi);

}  // namespace gevlab
