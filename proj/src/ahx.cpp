#include "gevlab/ahx.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gevlab/fits.hpp"

namespace gevlab {

namespace {

// One-sided Gevrey edge profile exp(-t^{-beta}) and its derivative; both are
// exactly 0 for t <= 0 and saturate smoothly toward t = 1.
double edge(double t, double beta) {
    if (t <= 0.0) return 0.0;
    const double f = std::pow(t, -beta);
    return f > 700.0 ? 0.0 : std::exp(-f);
}

double edge_prime(double t, double beta) {
    const double p = edge(t, beta);
    if (p == 0.0) return 0.0;
    return p * beta * std::pow(t, -beta - 1.0);
}

}  // namespace

double cutoff_psi(const CutoffConfig& cfg, double r) {
    if (r <= cfg.plateau_end) return 1.0;
    if (r >= cfg.support_end) return 0.0;
    const double beta = 1.0 / (cfg.profile_order - 1.0);
    const double u = (r - cfg.plateau_end) / (cfg.support_end - cfg.plateau_end);
    const double a = edge(u, beta), b = edge(1.0 - u, beta);
    return b / (a + b);
}

double cutoff_psi_prime(const CutoffConfig& cfg, double r) {
    if (r <= cfg.plateau_end || r >= cfg.support_end) return 0.0;
    const double beta = 1.0 / (cfg.profile_order - 1.0);
    const double w = cfg.support_end - cfg.plateau_end;
    const double u = (r - cfg.plateau_end) / w;
    const double a = edge(u, beta), b = edge(1.0 - u, beta);
    const double d = a + b;
    return -(edge_prime(1.0 - u, beta) * a + b * edge_prime(u, beta)) / (d * d * w);
}

CutoffConfig default_cutoff(const GevreyFunction& u, const DecayFit& fit) {
    if (!(fit.c > 0.0))
        throw std::invalid_argument("default_cutoff needs a positive decay constant");
    CutoffConfig cfg;
    cfg.support_end = 0.5 / fit.c;
    cfg.plateau_end = 0.8 * cfg.support_end;
    cfg.profile_order = u.order_s;
    return cfg;
}

AHExtension mather_extend(const GevreyFunction& u, const CutoffConfig& cutoff,
                          const Grid& xi_grid) {
    if (u.dims() != 2 || xi_grid.dims != 2)
        throw std::invalid_argument("mather_extend expects d = 2 base and grid");
    if (!(cutoff.plateau_end > 0.0) || !(cutoff.support_end > cutoff.plateau_end))
        throw std::invalid_argument("invalid cutoff config");

    const double edge_xi = std::min(xi_grid.half_width[0], xi_grid.half_width[1]);
    const DecayFit fit = fourier_decay_fit(u, edge_xi);
    const double want = 1.0 / u.order_s;
    if (std::fabs(fit.exponent - want) > 0.25 * want)
        throw std::runtime_error("mather_extend: transform decay inconsistent with the stated order");
    // The fitted envelope at the grid edge must be below the restriction
    // tolerance so the truncated inversion reproduces u on the real points.
    const double log_peak = fit.log_prefactor;
    const double log_edge = fit.log_prefactor - fit.c * std::pow(edge_xi, fit.exponent);
    if (log_edge > log_peak + std::log(1e-10))
        throw std::runtime_error("mather_extend: frequency grid too small for the transform window");

    AHExtension ext;
    ext.base = u;
    ext.cutoff = cutoff;
    ext.xi_grid = xi_grid;
    ext.s = u.order_s;
    const std::size_t n = xi_grid.node_count();
    ext.uhat.grid = xi_grid;
    ext.uhat.values.assign(n, 0.0);
    ext.uhat_log.assign(n, LogComplex::zero());
    ext.xi_norm_pow.assign(n, 0.0);

    const Grid& g = u.field.grid;
    int idx[2];
    if (u.chain) {
        std::vector<std::vector<LogComplex>> axis_hat(2);
        for (int ax = 0; ax < 2; ++ax) {
            axis_hat[ax].resize(xi_grid.points[ax]);
            for (int i = 0; i < xi_grid.points[ax]; ++i)
                axis_hat[ax][i] = u.chain->hat1(xi_grid.coord(ax, i));
        }
        for (std::size_t f = 0; f < n; ++f) {
            xi_grid.unflatten(f, idx);
            ext.uhat_log[f] = log_mul(axis_hat[0][idx[0]], axis_hat[1][idx[1]]);
        }
    } else {
        // Row-column discrete transform of the samples (the grid is modest and
        // this runs once per extension).
        const int nx0 = g.points[0], nx1 = g.points[1];
        const int nq0 = xi_grid.points[0], nq1 = xi_grid.points[1];
        std::vector<cplx> stage(static_cast<std::size_t>(nx0) * nq1, 0.0);
        for (int i0 = 0; i0 < nx0; ++i0) {
            for (int j1 = 0; j1 < nq1; ++j1) {
                const double xi1 = xi_grid.coord(1, j1);
                cplx acc = 0.0;
                for (int i1 = 0; i1 < nx1; ++i1) {
                    idx[0] = i0;
                    idx[1] = i1;
                    const double x1 = g.coord(1, i1);
                    acc += u.field.values[g.flatten(idx)] * g.axis_weight(1, i1) *
                           std::exp(cplx(0.0, -x1 * xi1));
                }
                stage[static_cast<std::size_t>(i0) * nq1 + j1] =
                    acc * g.spacing[1];
            }
        }
        for (int j0 = 0; j0 < nq0; ++j0) {
            const double xi0 = xi_grid.coord(0, j0);
            for (int j1 = 0; j1 < nq1; ++j1) {
                cplx acc = 0.0;
                for (int i0 = 0; i0 < nx0; ++i0) {
                    const double x0 = g.coord(0, i0);
                    acc += stage[static_cast<std::size_t>(i0) * nq1 + j1] *
                           g.axis_weight(0, i0) * std::exp(cplx(0.0, -x0 * xi0));
                }
                idx[0] = j0;
                idx[1] = j1;
                ext.uhat_log[xi_grid.flatten(idx)] =
                    LogComplex::from(acc * g.spacing[0]);
            }
        }
    }
    const double alpha = ext.alpha();
    for (std::size_t f = 0; f < n; ++f) {
        xi_grid.unflatten(f, idx);
        const double x0 = xi_grid.coord(0, idx[0]), x1 = xi_grid.coord(1, idx[1]);
        ext.xi_norm_pow[f] = std::pow(std::hypot(x0, x1), alpha);
        ext.uhat.values[f] = ext.uhat_log[f].to_complex();
    }
    return ext;
}

namespace {

// Shared quadrature core: mode 0 integrates psi * uhat * e^{i x.xi - y.xi},
// mode 1 swaps psi for psi', mode 2 uses (psi_a - psi_b) with a second config.
LogComplex tube_quad(const AHExtension& ext, const std::array<double, 2>& x,
                     const std::array<double, 2>& y, int mode,
                     const CutoffConfig* other) {
    const Grid& q = ext.xi_grid;
    const double ay = std::hypot(y[0], y[1]);
    LogAccumulator acc;
    int idx[2];
    for (std::size_t f = 0; f < q.node_count(); ++f) {
        if (ext.uhat_log[f].is_zero()) continue;
        const double r = ay * ext.xi_norm_pow[f];
        double cut;
        if (mode == 0)
            cut = cutoff_psi(ext.cutoff, r);
        else if (mode == 1)
            cut = cutoff_psi_prime(ext.cutoff, r);
        else
            cut = cutoff_psi(ext.cutoff, r) - cutoff_psi(*other, r);
        if (cut == 0.0) continue;
        q.unflatten(f, idx);
        const double xi0 = q.coord(0, idx[0]), xi1 = q.coord(1, idx[1]);
        const double damp = -(y[0] * xi0 + y[1] * xi1);
        const double phase = x[0] * xi0 + x[1] * xi1;
        const double w = q.quad_weight(idx) * std::fabs(cut);
        acc.add_scaled(ext.uhat_log[f], damp + std::log(w),
                       phase + (cut < 0.0 ? kPi : 0.0));
    }
    return log_scale(acc.result(), -2.0 * std::log(2.0 * kPi));
}

}  // namespace

cplx extension_eval(const AHExtension& ext, const std::array<double, 2>& x,
                    const std::array<double, 2>& y) {
    return tube_quad(ext, x, y, 0, nullptr).to_complex();
}

LogComplex dbar_log(const AHExtension& ext, const std::array<double, 2>& x,
                    const std::array<double, 2>& y, int j) {
    const double ay = std::hypot(y[0], y[1]);
    if (ay == 0.0) return LogComplex::zero();
    const LogComplex core = tube_quad(ext, x, y, 1, nullptr);
    return log_mul(core, cplx(0.0, 1.0) * (y[j] / (2.0 * ay)));
}

cplx dbar(const AHExtension& ext, const std::array<cplx, 2>& z, int j) {
    const std::array<double, 2> x = {z[0].real(), z[1].real()};
    const std::array<double, 2> y = {z[0].imag(), z[1].imag()};
    return dbar_log(ext, x, y, j).to_complex();
}

DecayFit dbar_decay_fit(const AHExtension& ext,
                        const std::array<double, 2>& base_point,
                        const std::array<double, 2>& direction,
                        const std::vector<double>& t_list) {
    if (t_list.size() < 8)
        throw std::invalid_argument("dbar_decay_fit needs at least 8 t values");
    std::vector<double> fx, fy;
    for (double t : t_list) {
        const std::array<double, 2> y = {t * direction[0], t * direction[1]};
        const LogComplex d0 = dbar_log(ext, base_point, y, 0);
        const LogComplex d1 = dbar_log(ext, base_point, y, 1);
        const double lo = std::min(d0.log_mag, d1.log_mag);
        const double hi = std::max(d0.log_mag, d1.log_mag);
        if (hi <= -kInf) continue;
        const double lm = hi + 0.5 * std::log1p(std::exp(2.0 * (lo - hi)));
        fx.push_back(1.0 / t);
        fy.push_back(lm);
    }
    if (fx.size() < 5)
        throw std::runtime_error("dbar_decay_fit: magnitudes at the log floor");
    const StretchedFit sf = fit_stretched(fx, fy, 0.2, 4.0);
    DecayFit fit;
    fit.exponent = sf.power;
    fit.log_prefactor = sf.log_prefactor;
    fit.c = sf.c;
    fit.rms_residual = sf.rms;
    fit.window_min = 1.0 / fx.back();
    fit.window_max = 1.0 / fx.front();
    return fit;
}

DecayFit extension_difference_decay(const AHExtension& ext1,
                                    const AHExtension& ext2,
                                    const std::array<double, 2>& base_point,
                                    const std::array<double, 2>& direction,
                                    const std::vector<double>& t_list) {
    if (ext1.base.field.values != ext2.base.field.values)
        throw std::invalid_argument("extensions must share the base function");
    if (ext1.xi_grid.points != ext2.xi_grid.points ||
        ext1.xi_grid.half_width != ext2.xi_grid.half_width)
        throw std::invalid_argument("extensions must share the frequency grid");
    const CutoffConfig &c1 = ext1.cutoff, &c2 = ext2.cutoff;
    if (c1.plateau_end == c2.plateau_end && c1.support_end == c2.support_end &&
        c1.profile_order == c2.profile_order)
        throw std::runtime_error("identical cutoffs: difference is at the noise floor");

    std::vector<double> fx, fy;
    for (double t : t_list) {
        const std::array<double, 2> y = {t * direction[0], t * direction[1]};
        const LogComplex d = tube_quad(ext1, base_point, y, 2, &c2);
        if (d.is_zero()) continue;
        fx.push_back(1.0 / t);
        fy.push_back(d.log_mag);
    }
    if (fx.size() < 5)
        throw std::runtime_error("extension_difference_decay: difference at the log floor");
    const StretchedFit sf = fit_stretched(fx, fy, 0.2, 4.0);
    DecayFit fit;
    fit.exponent = sf.power;
    fit.log_prefactor = sf.log_prefactor;
    fit.c = sf.c;
    fit.rms_residual = sf.rms;
    fit.window_min = 1.0 / fx.back();
    fit.window_max = 1.0 / fx.front();
    return fit;
}

std::pair<double, double> carleman_check(const SampledField& v,
                                         const SampledField& phi,
                                         const SampledField& dbar_v) {
    const Grid& g = v.grid;
    if (g.dims != 2 || phi.grid.points != g.points ||
        dbar_v.grid.points != g.points)
        throw std::invalid_argument("carleman_check expects three fields on one 2-d grid");

    double vmax = 0.0;
    for (const cplx& z : v.values) vmax = std::max(vmax, std::abs(z));
    const int n0 = g.points[0], n1 = g.points[1];
    int idx[2];
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1) {
            if (i0 > 0 && i0 < n0 - 1 && i1 > 0 && i1 < n1 - 1) continue;
            idx[0] = i0;
            idx[1] = i1;
            if (std::abs(v.values[g.flatten(idx)]) > 1e-12 * vmax)
                throw std::invalid_argument("carleman_check: v does not vanish at the boundary");
        }

    // d^2 phi / dz dzbar = Laplacian / 4 by the 5-point stencil.
    double lhs2 = 0.0, rhs2 = 0.0;
    const double h0 = g.spacing[0], h1 = g.spacing[1];
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1) {
            idx[0] = i0;
            idx[1] = i1;
            const std::size_t f = g.flatten(idx);
            const double w = g.quad_weight(idx);
            const double ph = std::real(phi.values[f]);
            rhs2 += std::exp(2.0 * ph) * std::norm(dbar_v.values[f]) * w;
            if (i0 == 0 || i0 == n0 - 1 || i1 == 0 || i1 == n1 - 1) continue;
            int ie[2] = {i0 + 1, i1}, iw[2] = {i0 - 1, i1};
            int in[2] = {i0, i1 + 1}, is[2] = {i0, i1 - 1};
            const double lap =
                (std::real(phi.values[g.flatten(ie)]) +
                 std::real(phi.values[g.flatten(iw)]) - 2.0 * ph) /
                    (h0 * h0) +
                (std::real(phi.values[g.flatten(in)]) +
                 std::real(phi.values[g.flatten(is)]) - 2.0 * ph) /
                    (h1 * h1);
            if (std::abs(v.values[f]) > 1e-12 * vmax && lap <= 0.0)
                throw std::invalid_argument("carleman_check: phi not strictly subharmonic");
            lhs2 += 2.0 * std::exp(2.0 * ph) * std::max(lap, 0.0) / 4.0 *
                    std::norm(v.values[f]) * w;
        }
    return {std::sqrt(lhs2), std::sqrt(rhs2)};
}

}  // namespace gevlab
