#include "gevlab/fits.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gevlab {

FitLine linfit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("linfit: need >= 2 paired points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("linfit: degenerate abscissa");
    FitLine f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.slope * x[i] + f.intercept);
        rss += r * r;
    }
    f.rms = std::sqrt(rss / n);
    return f;
}

namespace {

// Residual of the inner linear problem at a fixed power; fills (a, c) with the
// minimizing (log_prefactor, c).
double stretched_rss(const std::vector<double>& x, const std::vector<double>& y,
                     double power, double* a_out, double* c_out) {
    const std::size_t n = x.size();
    // Regressor u = x^power; model y = a - c*u.
    double su = 0, sy = 0, suu = 0, suy = 0;
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = std::pow(x[i], power);
        su += u[i];
        sy += y[i];
        suu += u[i] * u[i];
        suy += u[i] * y[i];
    }
    const double den = n * suu - su * su;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    const double c = -(n * suy - su * sy) / den;
    const double a = (sy + c * su) / n;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (a - c * u[i]);
        rss += r * r;
    }
    if (a_out) *a_out = a;
    if (c_out) *c_out = c;
    return rss;
}

// Three-regressor variant [1, log x, x^power]; solves the 3x3 normal
// equations by elimination.
double stretched_alg_rss(const std::vector<double>& x,
                         const std::vector<double>& y, double power,
                         double* a_out, double* beta_out, double* c_out) {
    const std::size_t n = x.size();
    double m[3][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
    std::vector<double> lx(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(x[i]);
        u[i] = std::pow(x[i], power);
        const double r[3] = {1.0, lx[i], u[i]};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) m[a][b] += r[a] * r[b];
            m[a][3] += r[a] * y[i];
        }
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (m[piv][col] == 0.0) return std::numeric_limits<double>::infinity();
        for (int k = 0; k < 4; ++k) std::swap(m[col][k], m[piv][k]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
        }
    }
    const double a = m[0][3] / m[0][0];
    const double beta = -m[1][3] / m[1][1];
    const double c = -m[2][3] / m[2][2];
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (a - beta * lx[i] - c * u[i]);
        rss += r * r;
    }
    if (a_out) *a_out = a;
    if (beta_out) *beta_out = beta;
    if (c_out) *c_out = c;
    return rss;
}

}  // namespace

StretchedFit fit_stretched(const std::vector<double>& x, const std::vector<double>& y,
                           double pow_lo, double pow_hi) {
    if (x.size() != y.size() || x.size() < 4)
        throw std::invalid_argument("fit_stretched: need >= 4 paired points");
    if (!(pow_lo < pow_hi)) throw std::invalid_argument("fit_stretched: empty power range");
    const int kScan = 160;
    double best_p = pow_lo, best_rss = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kScan; ++k) {
        double p = pow_lo + (pow_hi - pow_lo) * k / kScan;
        double rss = stretched_rss(x, y, p, nullptr, nullptr);
        if (rss < best_rss) {
            best_rss = rss;
            best_p = p;
        }
    }
    const double step = (pow_hi - pow_lo) / kScan;
    double lo = std::max(pow_lo, best_p - step);
    double hi = std::min(pow_hi, best_p + step);
    double p_star = golden_min(
        [&](double p) { return stretched_rss(x, y, p, nullptr, nullptr); }, lo, hi, 1e-10);

    StretchedFit f;
    f.power = p_star;
    double rss = stretched_rss(x, y, p_star, &f.log_prefactor, &f.c);
    f.rms = std::sqrt(rss / x.size());
    return f;
}

StretchedFit fit_stretched_alg(const std::vector<double>& x,
                               const std::vector<double>& y, double pow_lo,
                               double pow_hi) {
    if (x.size() != y.size() || x.size() < 5)
        throw std::invalid_argument("fit_stretched_alg: need >= 5 paired points");
    if (!(pow_lo < pow_hi))
        throw std::invalid_argument("fit_stretched_alg: empty power range");
    const int kScan = 160;
    double best_p = pow_lo, best_rss = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kScan; ++k) {
        double p = pow_lo + (pow_hi - pow_lo) * k / kScan;
        double rss = stretched_alg_rss(x, y, p, nullptr, nullptr, nullptr);
        if (rss < best_rss) {
            best_rss = rss;
            best_p = p;
        }
    }
    const double step = (pow_hi - pow_lo) / kScan;
    double lo = std::max(pow_lo, best_p - step);
    double hi = std::min(pow_hi, best_p + step);
    double p_star = golden_min(
        [&](double p) {
            return stretched_alg_rss(x, y, p, nullptr, nullptr, nullptr);
        },
        lo, hi, 1e-10);

    StretchedFit f;
    f.power = p_star;
    double rss = stretched_alg_rss(x, y, p_star, &f.log_prefactor,
                                   &f.alg_power, &f.c);
    f.rms = std::sqrt(rss / x.size());
    return f;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol) {
    if (!(lo < hi)) throw std::invalid_argument("golden_min: empty interval");
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

std::uint64_t SplitMix64::raw(std::uint64_t i) const {
    std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ULL;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

double SplitMix64::uniform(std::uint64_t i) const {
    return static_cast<double>(raw(i) >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(std::uint64_t i, double a, double b) const {
    return a + (b - a) * uniform(i);
}

}  // namespace gevlab
