#include "gevlab/gevrey.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "gevlab/fits.hpp"

namespace gevlab {

namespace {

// log(sin x / x) = -sum_n zeta(2n) x^{2n} / (n pi^{2n}); coefficients for
// n = 1..5, accurate to ~1e-9 for |x| <= 0.65.
constexpr double kLogSincCoef[5] = {1.0 / 6.0, 1.0 / 180.0, 1.0 / 2835.0,
                                    1.0 / 37800.0, 1.0 / 467775.0};
constexpr double kSeriesArg = 0.65;

// Tail sum_{k > K} k^{-m} by Euler-Maclaurin; needs K >= 12 for ~1e-10.
double zeta_tail(double m, double K) {
    double t = std::pow(K, 1.0 - m) / (m - 1.0);
    t -= 0.5 * std::pow(K, -m);
    t += m / 12.0 * std::pow(K, -m - 1.0);
    t -= m * (m + 1.0) * (m + 2.0) / 720.0 * std::pow(K, -m - 3.0);
    return t;
}

}  // namespace

LogComplex BoxChain::hat1(double xi) const {
    xi = std::fabs(xi);
    if (xi == 0.0) return LogComplex{0.0, 0.0};
    const double x = a * xi;  // k-th factor argument is x / k^s
    int k_exact = static_cast<int>(std::ceil(std::pow(x / kSeriesArg, 1.0 / s)));
    k_exact = std::max(k_exact, 12);
    double log_mag = 0.0;
    int sign = 1;
    for (int k = 1; k <= k_exact; ++k) {
        const double arg = x / std::pow(static_cast<double>(k), s);
        const double f = std::sin(arg) / arg;
        if (f == 0.0) return LogComplex::zero();
        if (f < 0.0) sign = -sign;
        log_mag += std::log(std::fabs(f));
    }
    // Factors beyond k_exact have argument below kSeriesArg; sum the log-sinc
    // series over k with zeta tails.
    const double K = static_cast<double>(k_exact);
    double x2n = x * x;
    for (int n = 1; n <= 5; ++n) {
        log_mag -= kLogSincCoef[n - 1] * x2n * zeta_tail(2.0 * n * s, K);
        x2n *= x * x;
    }
    return LogComplex{log_mag, sign > 0 ? 0.0 : kPi};
}

std::shared_ptr<const BoxChain> make_box_chain(double a, double s) {
    if (!(s > 1.0) || !(a > 0.0))
        throw std::invalid_argument("box chain needs s > 1 and a > 0");
    auto chain = std::make_shared<BoxChain>();
    chain->a = a;
    chain->s = s;
    double z = 0.0;
    for (int k = 1; k <= 200; ++k) z += std::pow(static_cast<double>(k), -s);
    chain->zeta = z + zeta_tail(s, 200.0);
    chain->c_env = 0.0;

    // Measure the envelope constant: bin log|hat1| over a log-spaced scan,
    // keep per-bin maxima (the transform oscillates through sinc zeros), and
    // regress against xi^{1/s}.
    double xi_hi = 1.0;
    while (xi_hi < 1e8 && chain->hat1(xi_hi).log_mag > -230.0) xi_hi *= 2.0;
    const int n_scan = 600, n_bin = 40;
    const double l_lo = std::log(2.0), l_hi = std::log(xi_hi);
    std::vector<double> bx(n_bin, 0.0), by(n_bin, -kInf);
    for (int i = 0; i < n_scan; ++i) {
        const double xi =
            std::exp(l_lo + (l_hi - l_lo) * i / static_cast<double>(n_scan - 1));
        const double lm = chain->hat1(xi).log_mag;
        int b = static_cast<int>((std::log(xi) - l_lo) / (l_hi - l_lo) * n_bin);
        b = std::clamp(b, 0, n_bin - 1);
        if (lm > by[b]) {
            by[b] = lm;
            bx[b] = std::pow(xi, 1.0 / s);
        }
    }
    std::vector<double> fx, fy;
    for (int b = 0; b < n_bin; ++b)
        if (by[b] > -kInf && by[b] < -2.0) {
            fx.push_back(bx[b]);
            fy.push_back(by[b]);
        }
    const FitLine line = linfit(fx, fy);
    chain->c_env = -line.slope;
    return chain;
}

GevreyFunction box_chain_function(double a, double s, const Grid& grid) {
    auto chain = make_box_chain(a, s);
    const double A = chain->support_half();
    double l_max = 0.0;
    for (int ax = 0; ax < grid.dims; ++ax)
        l_max = std::max(l_max, grid.half_width[ax]);

    // 1-d samples by inverse cosine transform of the signed hat1; the alias
    // spacing keeps periodic images clear of support + sample range.
    const double d_xi = std::min(0.08, kPi / (2.0 * A + l_max + 1.0));
    const double xi_top = std::pow(40.0 / std::max(chain->c_env, 0.1), s);
    const int n_xi = static_cast<int>(xi_top / d_xi) + 1;
    std::vector<double> hat(n_xi + 1);
    for (int j = 0; j <= n_xi; ++j) {
        const LogComplex v = chain->hat1(j * d_xi);
        hat[j] = std::exp(v.log_mag) * std::cos(v.phase);
    }
    auto eval1 = [&](double x) -> double {
        if (std::fabs(x) >= A) return 0.0;
        double acc = 0.5 * hat[0];
        for (int j = 1; j < n_xi; ++j) acc += hat[j] * std::cos(x * j * d_xi);
        acc += 0.5 * hat[n_xi] * std::cos(x * n_xi * d_xi);
        return acc * d_xi / kPi;
    };

    GevreyFunction u;
    u.order_s = s;
    u.support_radius = A * std::sqrt(static_cast<double>(grid.dims));
    u.has_decay_constants = true;
    u.decay_C = 1.0 / a;
    u.chain = chain;
    u.field.grid = grid;
    u.field.values.resize(grid.node_count());
    std::vector<std::vector<double>> axis_vals(grid.dims);
    for (int ax = 0; ax < grid.dims; ++ax) {
        if (std::fabs(grid.center[ax]) > 1e-14)
            throw std::invalid_argument("box chain grid must be centered at 0");
        axis_vals[ax].resize(grid.points[ax]);
        for (int i = 0; i < grid.points[ax]; ++i)
            axis_vals[ax][i] = eval1(grid.coord(ax, i));
    }
    double peak = 0.0;
    int idx[2] = {0, 0};
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        grid.unflatten(f, idx);
        double v = 1.0;
        for (int ax = 0; ax < grid.dims; ++ax) v *= axis_vals[ax][idx[ax]];
        u.field.values[f] = v;
        peak = std::max(peak, std::fabs(v));
    }
    u.decay_A = peak;
    return u;
}

double bump_value(double s, double radius, double r2) {
    const double w = (radius * radius - r2) / (radius * radius);
    if (w <= 0.0) return 0.0;
    const double f = std::pow(w, -1.0 / (s - 1.0));
    if (f > 700.0) return 0.0;
    return std::exp(-f);
}

void bump_derivs(double s, double radius, double x1, double x2, double* b,
                 double grad[2], double hess[3]) {
    const double R2 = radius * radius;
    const double w = (R2 - x1 * x1 - x2 * x2) / R2;
    const double beta = 1.0 / (s - 1.0);
    *b = grad[0] = grad[1] = hess[0] = hess[1] = hess[2] = 0.0;
    if (w <= 0.0) return;
    const double f = std::pow(w, -beta);
    if (f > 600.0) return;
    const double v = std::exp(-f);
    const double wb1 = std::pow(w, -beta - 1.0), wb2 = std::pow(w, -beta - 2.0);
    const double c = 2.0 * beta / R2;
    const double f1 = c * x1 * wb1, f2 = c * x2 * wb1;
    const double f11 = c * (wb1 + (beta + 1.0) * 2.0 * x1 * x1 * wb2 / R2);
    const double f22 = c * (wb1 + (beta + 1.0) * 2.0 * x2 * x2 * wb2 / R2);
    const double f12 = c * (beta + 1.0) * 2.0 * x1 * x2 * wb2 / R2;
    *b = v;
    grad[0] = -v * f1;
    grad[1] = -v * f2;
    hess[0] = v * (f1 * f1 - f11);
    hess[1] = v * (f1 * f2 - f12);
    hess[2] = v * (f2 * f2 - f22);
}

GevreyFunction gevrey_bump(double s, double radius, const Grid& grid) {
    if (!(s > 1.0)) throw std::invalid_argument("gevrey_bump needs s > 1");
    for (int ax = 0; ax < grid.dims; ++ax)
        if (radius > grid.half_width[ax])
            throw std::invalid_argument("bump support exceeds the grid box");
    GevreyFunction u;
    u.order_s = s;
    u.support_radius = radius;
    u.field.grid = grid;
    u.field.values.resize(grid.node_count());
    int idx[2] = {0, 0};
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        grid.unflatten(f, idx);
        double r2 = 0.0;
        for (int ax = 0; ax < grid.dims; ++ax) {
            const double d = grid.coord(ax, idx[ax]) - grid.center[ax];
            r2 += d * d;
        }
        u.field.values[f] = bump_value(s, radius, r2);
    }
    return u;
}

DecayFit fourier_decay_fit(const GevreyFunction& u, double xi_max) {
    const double xi_min = 0.25;
    if (xi_max < 8.0 * xi_min)
        throw std::invalid_argument("fourier_decay_fit window too small");

    // Transform magnitude along the first axis. Sampled inputs collapse the
    // second axis by quadrature once, so each xi costs one 1-d sum; chain
    // inputs use the exact product transform (second factor is 1 at xi2 = 0).
    std::vector<double> line_mass;
    const Grid& g = u.field.grid;
    if (!u.chain) {
        line_mass.assign(g.points[0], 0.0);
        if (g.dims == 1) {
            for (int i = 0; i < g.points[0]; ++i)
                line_mass[i] = std::real(u.field.values[i]) * g.axis_weight(0, i) *
                               g.spacing[0];
        } else {
            int idx[2];
            for (std::size_t f = 0; f < g.node_count(); ++f) {
                g.unflatten(f, idx);
                line_mass[idx[0]] += std::real(u.field.values[f]) *
                                     g.axis_weight(0, idx[0]) * g.spacing[0] *
                                     g.axis_weight(1, idx[1]) * g.spacing[1];
            }
        }
    }
    auto log_hat = [&](double xi) -> double {
        if (u.chain) return u.chain->hat1(xi).log_mag;
        cplx acc = 0.0;
        for (int i = 0; i < g.points[0]; ++i) {
            const double x = g.coord(0, i);
            acc += line_mass[i] * std::exp(cplx(0.0, -x * xi));
        }
        return std::log(std::abs(acc));
    };

    const double log_peak = log_hat(0.0);
    const double floor_log =
        u.chain ? log_peak - 250.0 * std::log(10.0) : log_peak + std::log(1e-12);
    const int n_scan = 600, n_bin = 48;
    const double l_lo = std::log(xi_min), l_hi = std::log(xi_max);
    std::vector<double> bx(n_bin, 0.0), by(n_bin, -kInf);
    for (int i = 0; i < n_scan; ++i) {
        const double xi =
            std::exp(l_lo + (l_hi - l_lo) * i / static_cast<double>(n_scan - 1));
        const double lm = log_hat(xi);
        int b = static_cast<int>((std::log(xi) - l_lo) / (l_hi - l_lo) * n_bin);
        b = std::clamp(b, 0, n_bin - 1);
        if (lm > by[b]) {
            by[b] = lm;
            bx[b] = xi;
        }
    }
    std::vector<double> fx, fy;
    for (int b = 0; b < n_bin; ++b) {
        if (by[b] <= -kInf || by[b] > log_peak - std::log(100.0) ||
            by[b] < floor_log)
            continue;
        fx.push_back(bx[b]);
        fy.push_back(by[b]);
    }
    if (fx.size() < 8)
        throw std::runtime_error("fourier_decay_fit: too few usable bins");

    const StretchedFit sf = fit_stretched(fx, fy, 0.05, 2.8);
    DecayFit fit;
    fit.exponent = sf.power;
    fit.log_prefactor = sf.log_prefactor;
    fit.c = sf.c;
    fit.rms_residual = sf.rms;
    fit.window_min = fx.front();
    fit.window_max = fx.back();
    fit.out_of_family = sf.power > 1.2 || sf.c <= 0.0;
    return fit;
}

namespace {

// Sup-norms of d^k u along one axis by periodic spectral differentiation.
// The duplicated endpoint sample is dropped; modes below the roundoff floor
// are zeroed before being amplified by xi^k.
void axis_derivative_sups(const std::vector<double>& samples, double spacing,
                          int k_max, std::vector<double>& sup) {
    const int M = static_cast<int>(samples.size());
    const double period = spacing * M;
    std::vector<cplx> hat(M, 0.0);
    std::vector<double> xi(M);
    for (int m = 0; m < M; ++m) {
        const int mm = m <= M / 2 ? m : m - M;
        xi[m] = 2.0 * kPi * mm / period;
        cplx acc = 0.0;
        for (int j = 0; j < M; ++j)
            acc += samples[j] *
                   std::exp(cplx(0.0, -2.0 * kPi * m * j / static_cast<double>(M)));
        hat[m] = acc * spacing;
    }
    double peak = 0.0;
    for (int m = 0; m < M; ++m) peak = std::max(peak, std::abs(hat[m]));
    for (int m = 0; m < M; ++m)
        if (std::abs(hat[m]) < 1e-13 * peak) hat[m] = 0.0;

    std::vector<cplx> cur = hat;
    for (int k = 0; k <= k_max; ++k) {
        for (int j = 0; j < M; ++j) {
            cplx acc = 0.0;
            for (int m = 0; m < M; ++m)
                acc += cur[m] *
                       std::exp(cplx(0.0, 2.0 * kPi * m * j / static_cast<double>(M)));
            sup[k] = std::max(sup[k], std::abs(acc) / period);
        }
        for (int m = 0; m < M; ++m) cur[m] *= cplx(0.0, xi[m]);
    }
}

}  // namespace

GrowthProbe derivative_growth_probe(const GevreyFunction& u, int k_max,
                                    double s_probe) {
    const Grid& g = u.field.grid;
    k_max = std::min(k_max, 30);
    const double s = s_probe > 1.0 ? s_probe : u.order_s;
    std::vector<double> sup(k_max + 1, 0.0);

    if (g.dims == 1) {
        std::vector<double> line(g.points[0] - 1);
        for (size_t j = 0; j < line.size(); ++j)
            line[j] = std::real(u.field.values[j]);
        axis_derivative_sups(line, g.spacing[0], k_max, sup);
    } else {
        for (int ax = 0; ax < 2; ++ax) {
            const int na = g.points[ax], nb = g.points[1 - ax];
            std::vector<double> line(na - 1);
            int idx[2];
            for (int ib = 0; ib < nb; ++ib) {
                for (int ia = 0; ia + 1 < na; ++ia) {
                    idx[ax] = ia;
                    idx[1 - ax] = ib;
                    line[ia] = std::real(u.field.values[g.flatten(idx)]);
                }
                axis_derivative_sups(line, g.spacing[ax], k_max, sup);
            }
        }
    }

    GrowthProbe probe;
    // Sharp drops in successive log-ratios signal a cancellation floor rather
    // than genuine decay of the derivative family.
    for (int k = 2; k < k_max; ++k) {
        if (sup[k - 1] <= 0.0 || sup[k] <= 0.0 || sup[k + 1] <= 0.0) continue;
        const double r1 = std::log(sup[k] / sup[k - 1]);
        const double r2 = std::log(sup[k + 1] / sup[k]);
        if (r2 < r1 - 3.0) probe.noise_limited = true;
    }

    auto feasible = [&](double A, double C) {
        for (int k = 0; k <= k_max; ++k) {
            if (sup[k] <= 0.0) continue;
            if (std::log(sup[k]) >
                std::log(A) + k * std::log(C) + s * std::lgamma(k + 1.0))
                return false;
        }
        return true;
    };
    double best_A = 0.0, best_C = 0.0;
    bool found = false;
    for (int j = -16; j <= 40 && !found; ++j) {
        const double C = std::pow(2.0, 0.5 * j);
        for (int i = -6; i <= 20; ++i) {
            const double A = std::pow(2.0, static_cast<double>(i));
            if (feasible(A, C)) {
                best_A = A;
                best_C = C;
                found = true;
                break;
            }
        }
    }
    probe.found = found;
    probe.A = best_A;
    probe.C = best_C;
    if (!found) {
        const double A = std::pow(2.0, 20.0), C = std::pow(2.0, 20.0);
        for (int k = 0; k <= k_max; ++k) {
            if (sup[k] > 0.0 &&
                std::log(sup[k]) >
                    std::log(A) + k * std::log(C) + s * std::lgamma(k + 1.0)) {
                probe.first_violation_k = k;
                break;
            }
        }
    }
    return probe;
}

}  // namespace gevlab
