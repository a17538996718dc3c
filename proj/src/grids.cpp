#include "gevlab/grids.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gevlab {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double wrap_phase(double phi) {
    if (!std::isfinite(phi)) return 0.0;
    // Reduce to (-pi, pi]. remainder() returns values in [-pi, pi].
    double r = std::remainder(phi, 2.0 * M_PI);
    if (r <= -M_PI) r += 2.0 * M_PI;
    return r;
}

std::size_t Grid::node_count() const {
    std::size_t n = 1;
    for (int p : points) n *= static_cast<std::size_t>(p);
    return n;
}

double Grid::cell() const {
    double c = 1.0;
    for (int a = 0; a < dims; ++a) c *= spacing[a];
    return c;
}

void Grid::unflatten(std::size_t flat, int* idx) const {
    for (int a = dims - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % static_cast<std::size_t>(points[a]));
        flat /= static_cast<std::size_t>(points[a]);
    }
}

std::size_t Grid::flatten(const int* idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dims; ++a)
        flat = flat * static_cast<std::size_t>(points[a]) + static_cast<std::size_t>(idx[a]);
    return flat;
}

double Grid::quad_weight(const int* idx) const {
    double w = cell();
    for (int a = 0; a < dims; ++a) w *= axis_weight(a, idx[a]);
    return w;
}

Grid make_grid(const std::vector<double>& center,
               const std::vector<double>& half_width,
               const std::vector<int>& points_per_axis) {
    const std::size_t d = center.size();
    if (half_width.size() != d || points_per_axis.size() != d)
        throw std::invalid_argument("make_grid: axis count mismatch");
    if (d != 1 && d != 2 && d != 4)
        throw std::invalid_argument("make_grid: dims must be 1, 2, or 4");
    Grid g;
    g.dims = static_cast<int>(d);
    g.center = center;
    g.half_width = half_width;
    g.points = points_per_axis;
    g.spacing.resize(d);
    for (std::size_t a = 0; a < d; ++a) {
        if (points_per_axis[a] < 3)
            throw std::invalid_argument("make_grid: fewer than 3 points per axis");
        if (half_width[a] <= 0.0)
            throw std::invalid_argument("make_grid: nonpositive half width");
        g.spacing[a] = 2.0 * half_width[a] / (points_per_axis[a] - 1);
    }
    return g;
}

LogComplex LogComplex::zero() { return LogComplex{kNegInf, 0.0}; }

LogComplex LogComplex::from(cplx z) {
    double m = std::abs(z);
    if (m == 0.0) return zero();
    return LogComplex{std::log(m), std::arg(z)};
}

LogComplex LogComplex::from_polar(double log_mag, double phase) {
    return LogComplex{log_mag, wrap_phase(phase)};
}

cplx LogComplex::to_complex() const {
    if (is_zero()) return {0.0, 0.0};
    return std::polar(std::exp(log_mag), phase);
}

bool LogComplex::is_zero() const { return log_mag == kNegInf; }

LogComplex log_mul(const LogComplex& a, const LogComplex& b) {
    if (a.is_zero() || b.is_zero()) return LogComplex::zero();
    return LogComplex{a.log_mag + b.log_mag, wrap_phase(a.phase + b.phase)};
}

LogComplex log_mul(const LogComplex& a, cplx b) {
    return log_mul(a, LogComplex::from(b));
}

LogComplex log_scale(const LogComplex& a, double dlog) {
    if (a.is_zero()) return a;
    return LogComplex{a.log_mag + dlog, a.phase};
}

LogAccumulator::LogAccumulator() : max_log(kNegInf), scaled(0.0, 0.0) {}

void LogAccumulator::add(const LogComplex& term) { add(term.log_mag, term.phase); }

void LogAccumulator::add(double log_mag, double phase) {
    if (log_mag == kNegInf) return;
    if (log_mag > max_log) {
        if (max_log != kNegInf) scaled *= std::exp(max_log - log_mag);
        max_log = log_mag;
    }
    scaled += std::polar(std::exp(log_mag - max_log), phase);
}

void LogAccumulator::add_scaled(const LogComplex& term, double extra_log, double extra_phase) {
    if (term.is_zero()) return;
    add(term.log_mag + extra_log, term.phase + extra_phase);
}

LogComplex LogAccumulator::result() const {
    if (max_log == kNegInf) return LogComplex::zero();
    double m = std::abs(scaled);
    if (m == 0.0) return LogComplex::zero();
    return LogComplex{max_log + std::log(m), std::arg(scaled)};
}

LogComplex log_sum(const std::vector<LogComplex>& terms) {
    LogAccumulator acc;
    for (const auto& t : terms) acc.add(t);
    return acc.result();
}

cplx quad(const SampledField& field) {
    const Grid& g = field.grid;
    const std::size_t n = g.node_count();
    int idx[4] = {0, 0, 0, 0};
    cplx sum(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g.unflatten(i, idx);
        double w = 1.0;
        for (int a = 0; a < g.dims; ++a) w *= g.axis_weight(a, idx[a]);
        sum += w * field.values[i];
    }
    return sum * g.cell();
}

cplx fourier_eval(const SampledField& field, const std::vector<double>& xi) {
    const Grid& g = field.grid;
    if (static_cast<int>(xi.size()) != g.dims)
        throw std::invalid_argument("fourier_eval: xi dimension mismatch");
    const std::size_t n = g.node_count();
    int idx[4] = {0, 0, 0, 0};
    cplx sum(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g.unflatten(i, idx);
        double w = 1.0, dot = 0.0;
        for (int a = 0; a < g.dims; ++a) {
            w *= g.axis_weight(a, idx[a]);
            dot += g.coord(a, idx[a]) * xi[a];
        }
        sum += w * field.values[i] * std::polar(1.0, -dot);
    }
    return sum * g.cell();
}

}  // namespace gevlab
