// Scale optimization closed forms, kernel assembly along contour families,
// operator matrices, Schur bounds, and the streaming contour-motion sweeps.
#include "gevlab/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "gevlab/fits.hpp"

namespace gevlab {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLog2Pi = 1.83787706640934548356;
constexpr cplx kI(0.0, 1.0);

cplx ipow(cplx z, int n) {
    cplx r = 1.0;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}

// Entire symbols are polynomials in the holomorphic pair
// (w1 - i w2)/sqrt(2), (w1 + i w2)/sqrt(2); on the straightened real set the
// first factor equals the midpoint and the second its conjugate.
cplx poly_eval(const std::vector<PolyTerm>& terms, cplx w1, cplx w2) {
    if (terms.empty()) return 1.0;
    cplx a = (w1 - kI * w2) * kSqrtHalf;
    cplx b = (w1 + kI * w2) * kSqrtHalf;
    cplx sum = 0.0;
    for (const PolyTerm& t : terms) sum += t.coeff * ipow(a, t.p) * ipow(b, t.q);
    return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Closed forms.

double g_sigma(const GSigmaModel& m, double sigma) {
    return m.big_c / m.h * sigma * sigma +
           m.c1 * std::pow(sigma, -1.0 / (m.s - 1.0));
}

std::pair<double, double> sigma_min(const GSigmaModel& m) {
    if (m.big_c <= 0.0 || m.c1 <= 0.0 || m.h <= 0.0 || m.s <= 1.0)
        throw std::invalid_argument(
            "sigma_min: constants must be positive with s > 1");
    double beta = (m.s - 1.0) / (2.0 * m.s - 1.0);
    double sigma = std::pow(m.c1 * m.h / (2.0 * m.big_c * (m.s - 1.0)), beta);
    return {sigma, g_sigma(m, sigma)};
}

double omega_choice(double s, double h, double c0) {
    if (s <= 1.0 || h <= 0.0 || c0 <= 0.0)
        throw std::invalid_argument("omega_choice: need s > 1, h > 0, c0 > 0");
    double omega = std::pow(h, 1.0 - 1.0 / s) / c0;
    GSigmaModel ref;
    ref.big_c = 1.0;
    ref.c1 = 0.5;
    ref.h = h;
    ref.s = s;
    if (omega >= sigma_min(ref).first)
        throw std::runtime_error(
            "omega_choice: cap radius does not sit below the optimal scale at "
            "this h");
    return omega;
}

RateFit rate_fit(const std::vector<double>& h_list,
                 const std::vector<double>& log_norms) {
    if (h_list.size() != log_norms.size())
        throw std::invalid_argument("rate_fit: length mismatch");
    if (h_list.size() < 5)
        throw std::invalid_argument("rate_fit: need at least five sweep points");
    std::vector<double> xs, ys;
    double h_min = h_list[0], h_max = h_list[0];
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        if (h_list[i] <= 0.0)
            throw std::invalid_argument("rate_fit: h must be positive");
        if (!(log_norms[i] < -2.0))
            throw std::invalid_argument(
                "rate_fit: sweep point is not decaying (log norm >= -2)");
        xs.push_back(std::log(1.0 / h_list[i]));
        ys.push_back(std::log(-log_norms[i]));
        h_min = std::min(h_min, h_list[i]);
        h_max = std::max(h_max, h_list[i]);
    }
    FitLine line = linfit(xs, ys);
    RateFit out;
    out.exponent = line.slope;
    out.log_c = line.intercept;
    out.rms_residual = line.rms;
    out.h_min = h_min;
    out.h_max = h_max;
    return out;
}

// ---------------------------------------------------------------------------
// Symbols.

double Extension1D::u1_real(double p) const {
    double ap = std::abs(p);
    if (real_tab.empty() || ap >= support) return 0.0;
    double u = ap / real_dx;
    std::size_t i = static_cast<std::size_t>(u);
    if (i + 1 >= real_tab.size()) return real_tab.back();
    double f = u - static_cast<double>(i);
    return real_tab[i] * (1.0 - f) + real_tab[i + 1] * f;
}

Extension1D make_extension1d(double a, double s) {
    Extension1D ext;
    ext.chain = make_box_chain(a, s);
    ext.alpha = (s - 1.0) / s;
    ext.support = ext.chain->support_half();
    ext.cutoff.support_end = 0.5 / ext.chain->c_env;
    ext.cutoff.plateau_end = 0.8 * ext.cutoff.support_end;
    ext.cutoff.profile_order = s;

    // Restriction to the real line by a cosine transform of the exact hat.
    double d_xi = std::min(0.08, kPi / (2.0 * ext.support + 2.0));
    double xi_top = 4.0;
    while (ext.chain->hat1(xi_top).log_mag > -40.0 && xi_top < 1.0e7)
        xi_top *= 2.0;
    std::vector<double> xs, vals;
    for (double xi = 0.0; xi <= xi_top; xi += d_xi) {
        LogComplex hv = ext.chain->hat1(xi);
        double v = hv.is_zero() ? 0.0
                                : std::exp(hv.log_mag) * std::cos(hv.phase);
        xs.push_back(xi);
        vals.push_back(v);
    }
    int n_tab = 4097;
    ext.real_dx = ext.support / (n_tab - 1);
    ext.real_tab.resize(n_tab);
    for (int i = 0; i < n_tab; ++i) {
        double x = i * ext.real_dx;
        double sum = 0.5 * vals[0];
        for (std::size_t j = 1; j < vals.size(); ++j)
            sum += vals[j] * std::cos(x * xs[j]);
        ext.real_tab[i] = sum * d_xi / kPi;
    }

    // Dense tables for the direct window evaluation: signed hat values and
    // xi^alpha on a fixed fine lattice. The 55-nat trim bounds how far a
    // window reaches as q shrinks, which caps the lattice length; points past
    // the cap fall back to direct hat evaluation.
    ext.tab_dxi = 0.00625;
    double xi_cap = 1.05 * std::pow(55.0 / (0.9 * ext.chain->c_env), s);
    std::size_t n_win = static_cast<std::size_t>(xi_cap / ext.tab_dxi) + 1;
    if (n_win > 2000000) n_win = 2000000;
    ext.hat_tab.resize(n_win);
    ext.pow_tab.resize(n_win);
    for (std::size_t j = 0; j < n_win; ++j) {
        double xi = (j + 0.5) * ext.tab_dxi;
        LogComplex hv = ext.chain->hat1(xi);
        ext.hat_tab[j] =
            hv.is_zero() ? 0.0 : std::exp(hv.log_mag) * std::cos(hv.phase);
        ext.pow_tab[j] = std::pow(xi, ext.alpha);
    }
    return ext;
}

ContourSymbol symbol_one() {
    ContourSymbol s;
    s.kind = ContourSymbol::Kind::entire;
    s.poly = {{0, 0, 1.0}};
    return s;
}

ContourSymbol symbol_poly(std::vector<PolyTerm> terms) {
    for (const PolyTerm& t : terms)
        if (t.p < 0 || t.q < 0)
            throw std::invalid_argument("symbol_poly: negative power");
    ContourSymbol s;
    s.kind = ContourSymbol::Kind::entire;
    s.poly = std::move(terms);
    return s;
}

ContourSymbol symbol_chain(double a, double s, std::vector<PolyTerm> prefactor) {
    for (const PolyTerm& t : prefactor)
        if (t.p < 0 || t.q < 0)
            throw std::invalid_argument("symbol_chain: negative power");
    ContourSymbol sym;
    sym.kind = ContourSymbol::Kind::chain;
    sym.axis = make_extension1d(a, s);
    sym.poly = std::move(prefactor);
    return sym;
}

ContourSymbol symbol_mather(const AHExtension* ext) {
    if (ext == nullptr)
        throw std::invalid_argument("symbol_mather: null extension");
    if (ext->base.dims() != 2)
        throw std::invalid_argument("symbol_mather: extension base must be 2-d");
    ContourSymbol s;
    s.kind = ContourSymbol::Kind::mather;
    s.mather = ext;
    return s;
}

namespace {

// Right end of the inversion window that still matters: the integrand
// exponent q xi - c xi^{1/s}, relative to its peak over the window, falls
// below -55 well before the nominal cutoff when q is small. The exponent is
// convex so the relevant crossing sits on its decreasing branch.
double window_trim(double c_env, double s, double aq, double lo, double hi) {
    auto dfun = [&](double xi) {
        return aq * xi - c_env * std::pow(xi, 1.0 / s);
    };
    double peak = std::max(dfun(lo), dfun(hi));
    if (dfun(hi) >= peak - 55.0) return hi;
    double a = lo, b = hi;
    for (int i = 0; i < 40; ++i) {
        double m = 0.5 * (a + b);
        if (dfun(m) >= peak - 55.0)
            a = m;
        else
            b = m;
    }
    return b;
}

// One axis of the chain symbol at w = p + iq: the extension value, or its
// derivative in conj(w), by direct summation of the cutoff inversion window.
LogComplex chain_axis_point(const Extension1D& ax, double p, double q,
                            bool deriv) {
    if (q == 0.0)
        return deriv ? LogComplex::zero() : LogComplex::from(ax.u1_real(p));
    double aq = std::abs(q);
    const CutoffConfig& cfg = ax.cutoff;
    double xi_s = std::pow(cfg.support_end / aq, 1.0 / ax.alpha);
    double xi_lo = deriv ? std::pow(cfg.plateau_end / aq, 1.0 / ax.alpha) : 0.0;
    xi_s = window_trim(0.9 * ax.chain->c_env, ax.chain->s, aq, xi_lo, xi_s);

    // Integration lattice: an odd multiple of the table lattice so every node
    // lands on a tabulated point. The step resolves the oscillation in p and
    // the cutoff transition at once.
    double want = std::min(0.025, kPi / (2.0 * (std::abs(p) + ax.support + 8.0)));
    long mult = static_cast<long>(want / ax.tab_dxi);
    if (mult < 1) mult = 1;
    if (mult % 2 == 0) --mult;
    double dxi = mult * ax.tab_dxi;
    if ((xi_s - xi_lo) / dxi > 4.0e6)
        throw std::runtime_error(
            "chain symbol: point too close to the real set for direct "
            "window evaluation");
    long k_lo = xi_lo <= 0.0
                    ? 0
                    : static_cast<long>(std::ceil(xi_lo / dxi - 0.5));
    if (k_lo < 0) k_lo = 0;
    long k_hi = static_cast<long>(std::ceil(xi_s / dxi - 0.5)) - 1;
    if (k_hi < k_lo) return LogComplex::zero();

    // Both xi signs of the inversion, paired through the hat's evenness, with
    // rotor recurrences instead of per-node exponentials. The trim keeps all
    // magnitudes inside plain double range.
    double xi0 = (k_lo + 0.5) * dxi;
    cplx pos = std::exp(cplx(-q, p) * xi0);
    cplx neg = std::exp(cplx(q, -p) * xi0);
    const cplx pos_step = std::exp(cplx(-q, p) * dxi);
    const cplx neg_step = std::exp(cplx(q, -p) * dxi);
    const long tab_n = static_cast<long>(ax.hat_tab.size());
    cplx sum = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) {
        long j = k * mult + (mult - 1) / 2;
        double hv, xp;
        if (j < tab_n) {
            hv = ax.hat_tab[static_cast<std::size_t>(j)];
            xp = ax.pow_tab[static_cast<std::size_t>(j)];
        } else {
            double xi = (k + 0.5) * dxi;
            LogComplex lhv = ax.chain->hat1(xi);
            hv = lhv.is_zero() ? 0.0
                               : std::exp(lhv.log_mag) * std::cos(lhv.phase);
            xp = std::pow(xi, ax.alpha);
        }
        if (hv != 0.0) {
            double arg = aq * xp;
            double w = deriv ? cutoff_psi_prime(cfg, arg) * 0.5 * xp
                             : cutoff_psi(cfg, arg);
            if (w != 0.0) sum += (hv * w) * (pos + neg);
        }
        pos *= pos_step;
        neg *= neg_step;
    }
    sum *= dxi / (2.0 * kPi);
    if (deriv) sum *= cplx(0.0, q > 0.0 ? 1.0 : -1.0);
    return LogComplex::from(sum);
}

}  // namespace

LogComplex symbol_value(const ContourSymbol& sym, cplx w1, cplx w2) {
    switch (sym.kind) {
        case ContourSymbol::Kind::entire:
            return LogComplex::from(poly_eval(sym.poly, w1, w2));
        case ContourSymbol::Kind::chain: {
            LogComplex v1 =
                chain_axis_point(sym.axis, w1.real(), w1.imag(), false);
            LogComplex v2 =
                chain_axis_point(sym.axis, w2.real(), w2.imag(), false);
            LogComplex v = log_mul(v1, v2);
            if (!sym.poly.empty()) v = log_mul(v, poly_eval(sym.poly, w1, w2));
            return v;
        }
        case ContourSymbol::Kind::mather:
            return LogComplex::from(extension_eval(
                *sym.mather, {w1.real(), w2.real()}, {w1.imag(), w2.imag()}));
    }
    return LogComplex::zero();
}

void symbol_dbars(const ContourSymbol& sym, cplx w1, cplx w2, LogComplex* d1,
                  LogComplex* d2) {
    switch (sym.kind) {
        case ContourSymbol::Kind::entire:
            *d1 = LogComplex::zero();
            *d2 = LogComplex::zero();
            return;
        case ContourSymbol::Kind::chain: {
            LogComplex u1 =
                chain_axis_point(sym.axis, w1.real(), w1.imag(), false);
            LogComplex u2 =
                chain_axis_point(sym.axis, w2.real(), w2.imag(), false);
            LogComplex g1 =
                chain_axis_point(sym.axis, w1.real(), w1.imag(), true);
            LogComplex g2 =
                chain_axis_point(sym.axis, w2.real(), w2.imag(), true);
            *d1 = log_mul(g1, u2);
            *d2 = log_mul(u1, g2);
            if (!sym.poly.empty()) {
                cplx pf = poly_eval(sym.poly, w1, w2);
                *d1 = log_mul(*d1, pf);
                *d2 = log_mul(*d2, pf);
            }
            return;
        }
        case ContourSymbol::Kind::mather: {
            std::array<cplx, 2> z{w1, w2};
            *d1 = LogComplex::from(dbar(*sym.mather, z, 0));
            *d2 = LogComplex::from(dbar(*sym.mather, z, 1));
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Materialized kernels.

KernelMatrix effective_kernel(const ContourSpec& spec, const ContourSymbol& sym,
                              double h, const Grid& grid_x,
                              const Grid& grid_y) {
    if (h <= 0.0) throw std::invalid_argument("effective_kernel: h <= 0");
    if (grid_x.dims != 2 || grid_y.dims != 2)
        throw std::invalid_argument("effective_kernel: grids must be 2-d");
    double lim = std::sqrt(h) / 4.0;
    for (const Grid* g : {&grid_x, &grid_y})
        for (int ax = 0; ax < 2; ++ax)
            if (g->spacing[ax] > lim * (1.0 + 1e-12))
                throw std::runtime_error(
                    "effective_kernel: grid spacing exceeds sqrt(h)/4");
    KernelMatrix km;
    km.grid_x = grid_x;
    km.grid_y = grid_y;
    km.h = h;
    km.spec = spec;
    std::size_t nx = grid_x.node_count(), ny = grid_y.node_count();
    km.entries.resize(nx * ny);
    double log_norm = -std::log(2.0 * kPi * h);
    int ix[2], iy[2];
    for (std::size_t fx = 0; fx < nx; ++fx) {
        grid_x.unflatten(fx, ix);
        cplx x(grid_x.coord(0, ix[0]), grid_x.coord(1, ix[1]));
        double phi_x = phi(spec.weight, x);
        for (std::size_t fy = 0; fy < ny; ++fy) {
            grid_y.unflatten(fy, iy);
            cplx y(grid_y.coord(0, iy[0]), grid_y.coord(1, iy[1]));
            ThetaJet jet = contour_jet(spec, x, y, h);
            auto w = kappa(0.5 * (x + y), jet.theta);
            LogComplex val = symbol_value(sym, w.first, w.second);
            if (val.is_zero()) {
                km.entries[fx * ny + fy] = LogComplex::zero();
                continue;
            }
            LogComplex e = log_mul(val, 2.0 * kI * jet.theta_ybar);
            cplx ex = kI * (x - y) * jet.theta;
            double phi_y = phi(spec.weight, y);
            e.log_mag += log_norm + (ex.real() + phi_y - phi_x) / h +
                         std::log(grid_y.quad_weight(iy));
            e.phase = wrap_phase(e.phase + ex.imag() / h);
            km.entries[fx * ny + fy] = e;
        }
    }
    return km;
}

std::vector<std::vector<cplx>> operator_matrix(const KernelMatrix& kernel,
                                               const BasisSpec& basis) {
    const Grid& gx = kernel.grid_x;
    const Grid& gy = kernel.grid_y;
    double need = 2.5 * std::sqrt(kernel.h * (basis.k_max + 1));
    for (const Grid* g : {&gx, &gy})
        for (int ax = 0; ax < 2; ++ax)
            if (g->half_width[ax] < need)
                throw std::invalid_argument(
                    "operator_matrix: grid box too small for the basis tails");
    int n = basis.k_max + 1;
    std::size_t nx = gx.node_count(), ny = gy.node_count();

    // Normalized weighted basis samples: e_k(y) exp(-Phi(y)/h) / norm_k. The
    // kernel entries already carry the y quadrature weight.
    std::vector<cplx> ey(ny * n), ex(nx * n);
    int idx[2];
    for (std::size_t fy = 0; fy < ny; ++fy) {
        gy.unflatten(fy, idx);
        cplx y(gy.coord(0, idx[0]), gy.coord(1, idx[1]));
        double wq = std::exp(-phi(kernel.spec.weight, y) / kernel.h);
        cplx p = 1.0;
        for (int k = 0; k < n; ++k) {
            ey[fy * n + k] = p * wq / basis.norms[k];
            p *= y;
        }
    }
    std::vector<double> wx(nx);
    for (std::size_t fx = 0; fx < nx; ++fx) {
        gx.unflatten(fx, idx);
        cplx x(gx.coord(0, idx[0]), gx.coord(1, idx[1]));
        double wq = std::exp(-phi(kernel.spec.weight, x) / kernel.h);
        wx[fx] = gx.quad_weight(idx);
        cplx p = 1.0;
        for (int k = 0; k < n; ++k) {
            ex[fx * n + k] = p * wq / basis.norms[k];
            p *= x;
        }
    }

    std::vector<std::vector<cplx>> m(n, std::vector<cplx>(n, 0.0));
    std::vector<cplx> b(n);
    for (std::size_t fx = 0; fx < nx; ++fx) {
        std::fill(b.begin(), b.end(), cplx(0.0));
        const LogComplex* row = &kernel.entries[fx * ny];
        for (std::size_t fy = 0; fy < ny; ++fy) {
            const LogComplex& e = row[fy];
            if (e.is_zero()) continue;
            if (e.log_mag > 700.0)
                throw std::overflow_error(
                    "operator_matrix: kernel entry exceeds the double range");
            cplx kv = e.to_complex();
            for (int k = 0; k < n; ++k) b[k] += kv * ey[fy * n + k];
        }
        for (int j = 0; j < n; ++j) {
            cplx cj = std::conj(ex[fx * n + j]) * wx[fx];
            for (int k = 0; k < n; ++k) m[j][k] += cj * b[k];
        }
    }
    return m;
}

LogComplex schur_bound(const KernelMatrix& kernel) {
    std::size_t nx = kernel.grid_x.node_count();
    std::size_t ny = kernel.grid_y.node_count();
    // Entries carry the y quadrature weight, so row sums are already integrals
    // in y; column sums need the weight swapped for the x one.
    std::vector<double> lwx(nx), lwy(ny);
    int idx[2];
    for (std::size_t fx = 0; fx < nx; ++fx) {
        kernel.grid_x.unflatten(fx, idx);
        lwx[fx] = std::log(kernel.grid_x.quad_weight(idx));
    }
    for (std::size_t fy = 0; fy < ny; ++fy) {
        kernel.grid_y.unflatten(fy, idx);
        lwy[fy] = std::log(kernel.grid_y.quad_weight(idx));
    }
    std::vector<LogAccumulator> col(ny);
    double row_sup = -kInf;
    for (std::size_t fx = 0; fx < nx; ++fx) {
        LogAccumulator row;
        for (std::size_t fy = 0; fy < ny; ++fy) {
            const LogComplex& e = kernel.entries[fx * ny + fy];
            if (e.is_zero()) continue;
            row.add(e.log_mag, 0.0);
            col[fy].add(e.log_mag + lwx[fx] - lwy[fy], 0.0);
        }
        row_sup = std::max(row_sup, row.result().log_mag);
    }
    double col_sup = -kInf;
    for (std::size_t fy = 0; fy < ny; ++fy)
        col_sup = std::max(col_sup, col[fy].result().log_mag);
    if (row_sup == -kInf || col_sup == -kInf) return LogComplex::zero();
    return LogComplex::from_polar(0.5 * (row_sup + col_sup), 0.0);
}

// ---------------------------------------------------------------------------
// Streaming sweeps.

namespace {

struct PolarZ {
    std::vector<cplx> node;
    std::vector<double> cell;
    std::vector<std::size_t> row_order;  // ascending y = x - z, lexicographic
    std::vector<std::size_t> col_order;  // ascending x = y + z, lexicographic
};

PolarZ make_polar(const SweepLayout& lay) {
    PolarZ pz;
    int nr = lay.z_radial, na = lay.z_angular;
    double g = std::log(lay.z_r_max / lay.z_r_min) / nr;
    double dphi = 2.0 * kPi / na;
    double wr = 2.0 * std::sinh(0.5 * g);
    for (int i = 0; i < nr; ++i) {
        double r = lay.z_r_min * std::exp(g * (i + 0.5));
        for (int j = 0; j < na; ++j) {
            double ph = dphi * (j + 0.5);
            pz.node.push_back(r * cplx(std::cos(ph), std::sin(ph)));
            pz.cell.push_back(r * r * wr * dphi);
        }
    }
    std::size_t nz = pz.node.size();
    pz.row_order.resize(nz);
    pz.col_order.resize(nz);
    for (std::size_t i = 0; i < nz; ++i) pz.row_order[i] = pz.col_order[i] = i;
    auto lex = [&pz](std::size_t a, std::size_t b, double sgn) {
        double ar = sgn * pz.node[a].real(), br = sgn * pz.node[b].real();
        if (ar != br) return ar < br;
        double ai = sgn * pz.node[a].imag(), bi = sgn * pz.node[b].imag();
        if (ai != bi) return ai < bi;
        return a < b;
    };
    std::sort(pz.row_order.begin(), pz.row_order.end(),
              [&](std::size_t a, std::size_t b) { return lex(a, b, -1.0); });
    std::sort(pz.col_order.begin(), pz.col_order.end(),
              [&](std::size_t a, std::size_t b) { return lex(a, b, 1.0); });
    return pz;
}

bool has_defo(const Weight& w) {
    return w.deformation && w.deformation->amplitude != 0.0;
}

bool weight_matches(const Weight& a, const Weight& b) {
    if (a.hermitian_coeff != b.hermitian_coeff) return false;
    if (has_defo(a) != has_defo(b)) return false;
    if (!has_defo(a)) return true;
    const Deformation& da = *a.deformation;
    const Deformation& db = *b.deformation;
    return da.amplitude == db.amplitude && da.length_scale == db.length_scale &&
           da.d0 == db.d0;
}

bool mixed_family(ContourKind k) {
    return k == ContourKind::mixed || k == ContourKind::mixed_h_half;
}

struct Homotopy {
    enum class Kind { tilt, cap, weight } kind = Kind::tilt;
    ContourSpec to;
    double t_target = 1.0;
    double cap_from = 0.0, cap_to = 0.0;
};

Homotopy classify(const ContourSpec& from, const ContourSpec& to, double h) {
    Homotopy ho;
    ho.to = to;
    if (from.kind == ContourKind::flat && to.kind != ContourKind::flat) {
        if (!weight_matches(from.weight, to.weight))
            throw std::invalid_argument(
                "stokes_remainder: tilt moves need matching weights");
        if (to.t <= 0.0)
            throw std::invalid_argument(
                "stokes_remainder: target tilt must be positive");
        ho.kind = Homotopy::Kind::tilt;
        ho.t_target = to.t;
        return ho;
    }
    if (mixed_family(from.kind) && mixed_family(to.kind)) {
        if (weight_matches(from.weight, to.weight) && from.t == to.t) {
            ho.cap_from = contour_cap(from, h);
            ho.cap_to = contour_cap(to, h);
            if (ho.cap_from <= 0.0 || ho.cap_to <= 0.0)
                throw std::invalid_argument(
                    "stokes_remainder: cap radii must be positive");
            if (ho.cap_from == ho.cap_to)
                throw std::invalid_argument(
                    "stokes_remainder: contours are identical");
            ho.kind = Homotopy::Kind::cap;
            return ho;
        }
        if (from.kind == to.kind && from.omega == to.omega && from.t == to.t &&
            !has_defo(from.weight) && has_defo(to.weight)) {
            ho.kind = Homotopy::Kind::weight;
            return ho;
        }
    }
    throw std::invalid_argument("stokes_remainder: unsupported homotopy pair");
}

ContourSpec slice_spec(const Homotopy& ho, double tau) {
    ContourSpec sp = ho.to;
    switch (ho.kind) {
        case Homotopy::Kind::tilt:
            sp.t = tau * ho.t_target;
            break;
        case Homotopy::Kind::cap:
            sp.kind = ContourKind::mixed;
            sp.omega = ho.cap_from + tau * (ho.cap_to - ho.cap_from);
            break;
        case Homotopy::Kind::weight: {
            Deformation& d = *sp.weight.deformation;
            d.amplitude *= tau;
            d.d0 *= tau;
            d.d1 *= tau;
            d.d2 *= tau;
            break;
        }
    }
    return sp;
}

// Velocity of the contour in tau at relative position z (and midpoint mid for
// weight moves, where the contour follows the deformation gradient).
cplx theta_dot(const Homotopy& ho, double tau, double h, cplx mid, cplx z) {
    switch (ho.kind) {
        case Homotopy::Kind::tilt: {
            cplx f = ho.to.kind == ContourKind::analytic
                         ? std::conj(z)
                         : f_omega(z, contour_cap(ho.to, h));
            return kI * ho.t_target * f;
        }
        case Homotopy::Kind::cap: {
            double cap = ho.cap_from + tau * (ho.cap_to - ho.cap_from);
            double az = std::abs(z);
            if (az <= cap) return 0.0;
            return kI * ho.to.t * (ho.cap_to - ho.cap_from) * std::conj(z) / az;
        }
        case Homotopy::Kind::weight:
            return -2.0 * kI * defo_dx(*ho.to.weight.deformation, mid);
    }
    return 0.0;
}

// Upper bound on the log magnitude of one axis transform at |Im w| = q.
// deriv restricts to the cutoff transition annulus. The 0.97 leaves room for
// the fitted envelope constant to be slightly optimistic.
double env_axis(const Extension1D& ax, double q, bool deriv) {
    double aq = std::abs(q);
    if (aq == 0.0) return deriv ? -kInf : 0.5;
    double s = ax.chain->s;
    double ce = 0.97 * ax.chain->c_env;
    double xi_s = std::pow(ax.cutoff.support_end / aq, 1.0 / ax.alpha);
    double xi_lo = deriv ? std::pow(ax.cutoff.plateau_end / aq, 1.0 / ax.alpha)
                         : std::min(1.0, xi_s);
    auto gfun = [&](double xi) {
        return aq * xi - ce * std::pow(xi, 1.0 / s);
    };
    double xi_star = std::pow(ce / (s * aq), s / (s - 1.0));
    xi_star = std::min(std::max(xi_star, xi_lo), xi_s);
    double best = std::max(gfun(xi_lo), std::max(gfun(xi_s), gfun(xi_star)));
    if (!deriv) best = std::max(best, 0.0);
    // width of the window, the |xi|^alpha factor, and the cutoff slope
    return best + std::log(2.0 + xi_s) + std::log(1.0 + std::pow(xi_s, ax.alpha)) + 3.0;
}

// Tables shared by every node of one sweep: the exact hat on the xi lattice
// and log psi / log |psi'| against log of the cutoff argument.
struct EngineTables {
    double dxi = 0.0;
    std::vector<double> hat_log, hat_sign, xia, logxi;
    double v_lo = 0.0, v_hi = 0.0, dv = 0.0;
    std::vector<double> lpsi, lpsip;

    double psi_log(double logarg) const {
        if (logarg < v_lo) return 0.0;
        if (logarg >= v_hi) return -kInf;
        double u = (logarg - v_lo) / dv;
        std::size_t i = static_cast<std::size_t>(u);
        if (i + 1 >= lpsi.size()) return lpsi.back();
        double f = u - static_cast<double>(i);
        return lpsi[i] * (1.0 - f) + lpsi[i + 1] * f;
    }
    double psip_log(double logarg) const {
        if (logarg < v_lo || logarg >= v_hi) return -kInf;
        double u = (logarg - v_lo) / dv;
        std::size_t i = static_cast<std::size_t>(u);
        if (i + 1 >= lpsip.size()) return lpsip.back();
        double f = u - static_cast<double>(i);
        double a = lpsip[i], b = lpsip[i + 1];
        if (a == -kInf || b == -kInf) return std::max(a, b) == -kInf ? -kInf : std::min(a, b);
        return a * (1.0 - f) + b * f;
    }
};

void build_psi_tables(EngineTables* tab, const CutoffConfig& cfg) {
    tab->v_hi = std::log(cfg.support_end);
    tab->v_lo = tab->v_hi - 32.0;
    int n = 4096;
    tab->dv = (tab->v_hi - tab->v_lo) / (n - 1);
    tab->lpsi.resize(n);
    tab->lpsip.resize(n);
    for (int i = 0; i < n; ++i) {
        double arg = std::exp(tab->v_lo + i * tab->dv);
        double ps = cutoff_psi(cfg, arg);
        double pp = std::abs(cutoff_psi_prime(cfg, arg));
        tab->lpsi[i] = ps > 0.0 ? std::log(ps) : -kInf;
        tab->lpsip[i] = pp > 0.0 ? std::log(pp) : -kInf;
    }
}

void build_hat_lattice(EngineTables* tab, const BoxChain& chain, double xi_need) {
    std::size_t n = static_cast<std::size_t>(xi_need / tab->dxi) + 2;
    if (n > 3.0e6)
        throw std::runtime_error(
            "sweep engine: transform window exceeds the table budget");
    double alpha = (chain.s - 1.0) / chain.s;
    tab->hat_log.resize(n);
    tab->hat_sign.resize(n);
    tab->xia.resize(n);
    tab->logxi.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double xi = (j + 0.5) * tab->dxi;
        LogComplex hv = chain.hat1(xi);
        tab->hat_log[j] = hv.log_mag;
        tab->hat_sign[j] = hv.is_zero() ? 0.0
                           : (std::cos(hv.phase) < 0.0 ? -1.0 : 1.0);
        tab->xia[j] = std::pow(xi, alpha);
        tab->logxi[j] = std::log(xi);
    }
}

// Value and derivative transforms of one chain axis at a batch of real parts
// sharing one imaginary part q. Results carry a common log offset per kind.
struct AxisBatch {
    std::vector<cplx> u, d;
    double lu = 0.0, ld = -kInf;
};

struct Scratch {
    std::vector<double> lp, lm, wp, wm;
};

void axis_batch(const EngineTables& tab, const Extension1D& ax, double q,
                const std::vector<double>& p, bool need_d, AxisBatch* out,
                Scratch* sc) {
    std::size_t np = p.size();
    out->u.assign(np, 0.0);
    out->d.assign(np, 0.0);
    out->lu = 0.0;
    out->ld = -kInf;
    if (q == 0.0) {
        for (std::size_t k = 0; k < np; ++k) out->u[k] = ax.u1_real(p[k]);
        return;
    }
    double aq = std::abs(q);
    double lq = std::log(aq);
    double xi_s = std::pow(ax.cutoff.support_end / aq, 1.0 / ax.alpha);
    double xi_p = std::pow(ax.cutoff.plateau_end / aq, 1.0 / ax.alpha);
    std::size_t n_tab = tab.hat_log.size();
    std::size_t js = std::min(
        n_tab, static_cast<std::size_t>(std::max(0.0, xi_s / tab.dxi + 0.5)));
    std::size_t jp = static_cast<std::size_t>(
        std::min(static_cast<double>(js), std::max(0.0, xi_p / tab.dxi - 0.5)));
    double base = std::log(tab.dxi) - kLog2Pi;

    for (int kind = 0; kind < (need_d ? 2 : 1); ++kind) {
        std::size_t j0 = kind == 0 ? 0 : jp;
        if (j0 >= js) continue;
        sc->lp.assign(js - j0, -kInf);
        sc->lm.assign(js - j0, -kInf);
        sc->wp.assign(js - j0, 0.0);
        sc->wm.assign(js - j0, 0.0);
        double lmax = -kInf;
        for (std::size_t j = j0; j < js; ++j) {
            if (tab.hat_sign[j] == 0.0) continue;
            double logarg = lq + ax.alpha * tab.logxi[j];
            double lpsi = kind == 0 ? tab.psi_log(logarg)
                                    : tab.psip_log(logarg) +
                                          ax.alpha * tab.logxi[j] -
                                          std::log(2.0);
            if (lpsi == -kInf) continue;
            double xi = (j + 0.5) * tab.dxi;
            double lw = tab.hat_log[j] + lpsi + base;
            sc->lp[j - j0] = lw - q * xi;
            sc->lm[j - j0] = lw + q * xi;
            lmax = std::max(lmax, std::max(sc->lp[j - j0], sc->lm[j - j0]));
        }
        if (lmax == -kInf) continue;
        for (std::size_t j = j0; j < js; ++j) {
            double sg = tab.hat_sign[j];
            if (sg == 0.0) continue;
            std::size_t r = j - j0;
            if (sc->lp[r] > lmax - 60.0) sc->wp[r] = sg * std::exp(sc->lp[r] - lmax);
            if (sc->lm[r] > lmax - 60.0) sc->wm[r] = sg * std::exp(sc->lm[r] - lmax);
        }
        // psi' is negative on the transition, fold its sign once
        double kind_sign = kind == 1 ? -1.0 : 1.0;
        std::vector<cplx>& dst = kind == 0 ? out->u : out->d;
        for (std::size_t k = 0; k < np; ++k) {
            double ang0 = p[k] * (j0 + 0.5) * tab.dxi;
            cplx rot(std::cos(ang0), std::sin(ang0));
            cplx step(std::cos(p[k] * tab.dxi), std::sin(p[k] * tab.dxi));
            cplx acc = 0.0;
            for (std::size_t r = 0; r < js - j0; ++r) {
                acc += sc->wp[r] * rot + sc->wm[r] * std::conj(rot);
                rot *= step;
            }
            dst[k] = kind_sign * acc;
        }
        if (kind == 0)
            out->lu = lmax;
        else {
            out->ld = lmax;
            // Wirtinger factor i sign(q)/2; the 1/2 is folded into lpsi above
            for (std::size_t k = 0; k < np; ++k)
                out->d[k] *= cplx(0.0, q > 0.0 ? 1.0 : -1.0);
        }
    }
}

struct SweepAcc {
    std::vector<LogAccumulator> row, col;
};

double reduce_sup(const std::vector<LogAccumulator>& acc, std::size_t nx,
                  std::size_t nz, const std::vector<std::size_t>& order) {
    double sup = -kInf;
    for (std::size_t x = 0; x < nx; ++x) {
        LogAccumulator total;
        for (std::size_t zi : order) total.add(acc[x * nz + zi].result());
        sup = std::max(sup, total.result().log_mag);
    }
    return sup;
}

// Shared core of schur_bound_streamed (homotopy == nullptr) and
// stokes_remainder. Sums absolute entries into per (x, z) cells, keeping the
// slice index innermost per cell so the accumulation order is reproducible,
// then reduces rows in ascending-y order and columns in ascending-x order.
LogComplex sweep_core(const ContourSpec& spec, const Homotopy* ho,
                      const ContourSymbol& sym, double h,
                      const SweepLayout& lay) {
    if (lay.x_grid.dims != 2)
        throw std::invalid_argument("sweep: x_grid must be 2-d");
    if (lay.z_radial < 1 || lay.z_angular < 1 || lay.z_r_min <= 0.0 ||
        lay.z_r_max <= lay.z_r_min)
        throw std::invalid_argument("sweep: bad polar layout");
    if (ho != nullptr && lay.t_points < 2)
        throw std::invalid_argument("sweep: need at least two t nodes");
    if (h <= 0.0) throw std::invalid_argument("sweep: h <= 0");

    const bool stokes = ho != nullptr;
    const bool is_chain = sym.kind == ContourSymbol::Kind::chain;
    PolarZ pz = make_polar(lay);
    std::size_t nz = pz.node.size();
    const Grid& gx = lay.x_grid;
    std::size_t nx = gx.node_count();
    int n0 = gx.points[0], n1 = gx.points[1];

    int nt = stokes ? lay.t_points : 1;
    double dtau = stokes ? 1.0 / (nt - 1) : 1.0;

    // First pass: slice specs, representative jets, and an upper envelope per
    // (slice, z) cell. Everything below the global maximum minus 60 nats is
    // skipped in the main pass.
    std::vector<ContourSpec> slices(nt);
    std::vector<double> tws(nt);
    for (int it = 0; it < nt; ++it) {
        double tau = stokes ? it * dtau : 0.0;
        slices[it] = stokes ? slice_spec(*ho, tau) : spec;
        tws[it] = stokes ? dtau * ((it == 0 || it == nt - 1) ? 0.5 : 1.0) : 1.0;
    }
    cplx x_rep(gx.coord(0, 0), gx.coord(1, 0));
    std::vector<double> env(static_cast<std::size_t>(nt) * nz, -kInf);
    std::vector<double> env_q1(env.size(), 0.0), env_q2(env.size(), 0.0);
    double m_top = -kInf;
    double poly_sup_log = 0.0;
    if (sym.kind == ContourSymbol::Kind::entire || !sym.poly.empty()) {
        double r = kSqrt2 * (std::max(gx.half_width[0] + std::abs(gx.center[0]),
                                      gx.half_width[1] + std::abs(gx.center[1])) +
                             lay.z_r_max) + 1.0;
        double sum = 0.0;
        for (const PolyTerm& t : sym.poly)
            sum += std::abs(t.coeff) * std::pow(r, t.p + t.q);
        poly_sup_log = std::log(std::max(sum, 1e-300));
    }
    for (int it = 0; it < nt; ++it) {
        const ContourSpec& sl = slices[it];
        double tau = stokes ? it * dtau : 0.0;
        double defo_d0 = 0.0, defo_d1 = 0.0;
        if (has_defo(sl.weight)) {
            defo_d0 = sl.weight.deformation->d0;
            defo_d1 = sl.weight.deformation->d1;
        }
        for (std::size_t zi = 0; zi < nz; ++zi) {
            cplx z = pz.node[zi];
            cplx y_rep = x_rep - z;
            ThetaJet jet = contour_jet(sl, x_rep, y_rep, h);
            cplx mid = x_rep - 0.5 * z;
            auto w = kappa(mid, jet.theta);
            double q1 = w.first.imag(), q2 = w.second.imag();
            std::size_t id = static_cast<std::size_t>(it) * nz + zi;
            env_q1[id] = q1;
            env_q2[id] = q2;
            cplx exf = kI * z * jet.theta;
            double phase = (exf.real() + phi(sl.weight, y_rep) -
                            phi(sl.weight, x_rep)) / h;
            phase += 2.0 * (defo_d0 + defo_d1 * std::abs(z)) / h;
            double coef_log, kern_log;
            if (stokes) {
                cplx td = theta_dot(*ho, tau, h, mid, z);
                double cb = std::abs(td) * (0.5 + std::abs(jet.theta_y) +
                                            std::abs(jet.theta_ybar));
                if (has_defo(ho->to.weight) && ho->kind == Homotopy::Kind::weight)
                    cb = std::max(cb, 2.0 * ho->to.weight.deformation->d1 *
                                          (0.5 + std::abs(jet.theta_y) +
                                           std::abs(jet.theta_ybar)));
                if (cb == 0.0) continue;
                coef_log = std::log(cb) + std::log(2.0);
                if (is_chain) {
                    double e1 = env_axis(sym.axis, q1, true) +
                                env_axis(sym.axis, q2, false);
                    double e2 = env_axis(sym.axis, q1, false) +
                                env_axis(sym.axis, q2, true);
                    kern_log = std::max(e1, e2);
                } else {
                    kern_log = 3.0;  // generous bound for grid-backed symbols
                }
            } else {
                coef_log = std::log(2.0 * std::abs(jet.theta_ybar) + 1e-300);
                if (is_chain)
                    kern_log = env_axis(sym.axis, q1, false) +
                               env_axis(sym.axis, q2, false);
                else
                    kern_log = sym.kind == ContourSymbol::Kind::entire ? 0.0 : 3.0;
            }
            double e = phase + coef_log + kern_log + poly_sup_log +
                       std::log(pz.cell[zi]) + std::log(tws[it]) -
                       std::log(2.0 * kPi * h);
            env[id] = e;
            m_top = std::max(m_top, e);
        }
    }
    if (m_top == -kInf) return LogComplex::zero();
    double cut = m_top - 60.0;

    // Lattice tables sized by the surviving windows.
    EngineTables tab;
    Scratch sc;
    if (is_chain) {
        double p_bound = kSqrt2 * (std::max(gx.half_width[0] + std::abs(gx.center[0]),
                                            gx.half_width[1] + std::abs(gx.center[1])) +
                                   1.5 * lay.z_r_max) + 1.0;
        tab.dxi = 2.0 * kPi / (2.0 * (p_bound + sym.axis.support + 8.0));
        double defo_slack = has_defo(ho ? ho->to.weight : spec.weight)
                                ? kSqrt2 * (ho ? ho->to.weight : spec.weight)
                                               .deformation->d1
                                : 0.0;
        double xi_need = 16.0;
        for (std::size_t id = 0; id < env.size(); ++id) {
            if (env[id] < cut) continue;
            for (double q : {env_q1[id], env_q2[id]}) {
                double aq = std::abs(q);
                if (aq == 0.0) continue;
                double q_lo = std::max(aq - defo_slack, 0.25 * aq);
                xi_need = std::max(
                    xi_need, std::pow(sym.axis.cutoff.support_end / q_lo,
                                      1.0 / sym.axis.alpha));
            }
        }
        build_hat_lattice(&tab, *sym.axis.chain, xi_need);
        build_psi_tables(&tab, sym.axis.cutoff);
    }

    SweepAcc acc;
    acc.row.resize(nx * nz);
    acc.col.resize(nx * nz);
    double log_norm = -std::log(2.0 * kPi * h);

    // Per-axis real parts for the lattice mode: p is affine in the midpoint
    // coordinates with slopes +sqrt(2) on axis 0 and -sqrt(2) on axis 1.
    std::vector<double> p1r(n0), p2r(n1), p1c(n0), p2c(n1);
    AxisBatch b1r, b2r, b1c, b2c;
    std::vector<double> phix(nx);
    int idx[2];

    for (int it = 0; it < nt; ++it) {
        const ContourSpec& sl = slices[it];
        double tau = stokes ? it * dtau : 0.0;
        bool deformed = has_defo(sl.weight) ||
                        (stokes && ho->kind == Homotopy::Kind::weight);
        bool lattice = is_chain && !deformed;
        if (!lattice) {
            for (std::size_t f = 0; f < nx; ++f) {
                gx.unflatten(f, idx);
                cplx xx(gx.coord(0, idx[0]), gx.coord(1, idx[1]));
                phix[f] = phi(sl.weight, xx);
            }
        }
        for (std::size_t zi = 0; zi < nz; ++zi) {
            std::size_t id = static_cast<std::size_t>(it) * nz + zi;
            if (env[id] < cut) continue;
            cplx z = pz.node[zi];
            double cell_log = std::log(pz.cell[zi]) + std::log(tws[it]) + log_norm;

            if (lattice) {
                cplx y_rep = x_rep - z;
                ThetaJet jet = contour_jet(sl, x_rep, y_rep, h);
                cplx mid_rep = x_rep - 0.5 * z;
                auto wr = kappa(mid_rep, jet.theta);
                double q1 = wr.first.imag(), q2 = wr.second.imag();
                cplx exf = kI * z * jet.theta;
                double phase = (exf.real() + phi(sl.weight, y_rep) -
                                phi(sl.weight, x_rep)) / h;
                cplx td = stokes ? theta_dot(*ho, tau, h, mid_rep, z) : 0.0;
                if (stokes && td == 0.0) continue;
                cplx c_a = 0.5 * td;
                cplx c_b = std::conj(jet.theta_y) * td -
                           std::conj(td) * jet.theta_ybar;
                for (int k = 0; k < n0; ++k) {
                    double dm = gx.coord(0, k) - gx.coord(0, 0);
                    p1r[k] = wr.first.real() + kSqrt2 * dm;
                    p1c[k] = wr.first.real() + kSqrt2 * (dm + z.real());
                }
                for (int k = 0; k < n1; ++k) {
                    double dm = gx.coord(1, k) - gx.coord(1, 0);
                    p2r[k] = wr.second.real() - kSqrt2 * dm;
                    p2c[k] = wr.second.real() - kSqrt2 * (dm + z.imag());
                }
                axis_batch(tab, sym.axis, q1, p1r, stokes, &b1r, &sc);
                axis_batch(tab, sym.axis, q2, p2r, stokes, &b2r, &sc);
                axis_batch(tab, sym.axis, q1, p1c, stokes, &b1c, &sc);
                axis_batch(tab, sym.axis, q2, p2c, stokes, &b2c, &sc);
                for (int pass = 0; pass < 2; ++pass) {
                    const AxisBatch& a1 = pass == 0 ? b1r : b1c;
                    const AxisBatch& a2 = pass == 0 ? b2r : b2c;
                    const std::vector<double>& pp1 = pass == 0 ? p1r : p1c;
                    const std::vector<double>& pp2 = pass == 0 ? p2r : p2c;
                    std::vector<LogAccumulator>& dst =
                        pass == 0 ? acc.row : acc.col;
                    for (int i0 = 0; i0 < n0; ++i0) {
                        for (int i1 = 0; i1 < n1; ++i1) {
                            std::size_t node =
                                static_cast<std::size_t>(i0) * n1 + i1;
                            cplx pref = 1.0;
                            if (!sym.poly.empty())
                                pref = poly_eval(sym.poly,
                                                 cplx(pp1[i0], q1),
                                                 cplx(pp2[i1], q2));
                            double lmag;
                            if (stokes) {
                                double l1 = a1.ld + a2.lu, l2 = a1.lu + a2.ld;
                                double lc = std::max(l1, l2);
                                if (lc == -kInf) continue;
                                cplx t1 = a1.d[i0] * a2.u[i1] *
                                          std::exp(l1 - lc);
                                cplx t2 = a1.u[i0] * a2.d[i1] *
                                          std::exp(l2 - lc);
                                cplx av = (t1 - kI * t2) * kSqrtHalf;
                                cplx bv = (-kI * t1 + t2) * kSqrtHalf;
                                cplx br = pref * (c_a * av + c_b * bv);
                                if (br == 0.0) continue;
                                lmag = std::log(std::abs(br)) + lc +
                                       std::log(2.0);
                            } else {
                                cplx v = pref * a1.u[i0] * a2.u[i1];
                                if (v == 0.0) continue;
                                lmag = std::log(std::abs(v)) + a1.lu + a2.lu +
                                       std::log(2.0 * std::abs(jet.theta_ybar));
                            }
                            dst[node * nz + zi].add(lmag + phase + cell_log,
                                                    0.0);
                        }
                    }
                }
            } else {
                // Direct mode: deformed weights (or non-chain symbols) break
                // the shared-lattice structure, so each node gets its own
                // windows and exact phase.
                for (int pass = 0; pass < 2; ++pass) {
                    std::vector<LogAccumulator>& dst =
                        pass == 0 ? acc.row : acc.col;
                    for (std::size_t f = 0; f < nx; ++f) {
                        gx.unflatten(f, idx);
                        cplx base(gx.coord(0, idx[0]), gx.coord(1, idx[1]));
                        cplx xx = pass == 0 ? base : base + z;
                        cplx yy = pass == 0 ? base - z : base;
                        ThetaJet jet = contour_jet(sl, xx, yy, h);
                        cplx mid = 0.5 * (xx + yy);
                        auto w = kappa(mid, jet.theta);
                        cplx exf = kI * z * jet.theta;
                        double phase = exf.real() / h;
                        if (pass == 0)
                            phase += (phi(sl.weight, yy) - phix[f]) / h;
                        else
                            phase += (phix[f] - phi(sl.weight, xx)) / h;
                        double lmag;
                        if (stokes) {
                            cplx td = theta_dot(*ho, tau, h, mid, z);
                            if (td == 0.0) continue;
                            LogComplex d1, d2;
                            if (is_chain) {
                                std::vector<double> pv1{w.first.real()};
                                std::vector<double> pv2{w.second.real()};
                                AxisBatch a1, a2;
                                axis_batch(tab, sym.axis, w.first.imag(), pv1,
                                           true, &a1, &sc);
                                axis_batch(tab, sym.axis, w.second.imag(), pv2,
                                           true, &a2, &sc);
                                d1 = LogComplex::from(a1.d[0] * a2.u[0]);
                                d1.log_mag += a1.ld + a2.lu;
                                d2 = LogComplex::from(a1.u[0] * a2.d[0]);
                                d2.log_mag += a1.lu + a2.ld;
                                if (!sym.poly.empty()) {
                                    cplx pf = poly_eval(sym.poly, w.first,
                                                        w.second);
                                    d1 = log_mul(d1, pf);
                                    d2 = log_mul(d2, pf);
                                }
                            } else {
                                symbol_dbars(sym, w.first, w.second, &d1, &d2);
                            }
                            if (d1.is_zero() && d2.is_zero()) continue;
                            double lc = std::max(d1.log_mag, d2.log_mag);
                            cplx t1 = d1.is_zero() ? 0.0
                                                   : std::polar(std::exp(d1.log_mag - lc),
                                                                d1.phase);
                            cplx t2 = d2.is_zero() ? 0.0
                                                   : std::polar(std::exp(d2.log_mag - lc),
                                                                d2.phase);
                            cplx av = (t1 - kI * t2) * kSqrtHalf;
                            cplx bv = (-kI * t1 + t2) * kSqrtHalf;
                            cplx br = 0.5 * td * av +
                                      (std::conj(jet.theta_y) * td -
                                       std::conj(td) * jet.theta_ybar) * bv;
                            if (br == 0.0) continue;
                            lmag = std::log(std::abs(br)) + lc + std::log(2.0);
                        } else {
                            LogComplex v;
                            if (is_chain) {
                                std::vector<double> pv1{w.first.real()};
                                std::vector<double> pv2{w.second.real()};
                                AxisBatch a1, a2;
                                axis_batch(tab, sym.axis, w.first.imag(), pv1,
                                           false, &a1, &sc);
                                axis_batch(tab, sym.axis, w.second.imag(), pv2,
                                           false, &a2, &sc);
                                v = LogComplex::from(a1.u[0] * a2.u[0]);
                                v.log_mag += a1.lu + a2.lu;
                                if (!sym.poly.empty())
                                    v = log_mul(v, poly_eval(sym.poly, w.first,
                                                             w.second));
                            } else {
                                v = symbol_value(sym, w.first, w.second);
                            }
                            if (v.is_zero()) continue;
                            lmag = v.log_mag +
                                   std::log(2.0 * std::abs(jet.theta_ybar));
                        }
                        dst[f * nz + zi].add(lmag + phase + cell_log, 0.0);
                    }
                }
            }
        }
    }

    double row_sup = reduce_sup(acc.row, nx, nz, pz.row_order);
    double col_sup = reduce_sup(acc.col, nx, nz, pz.col_order);
    if (row_sup == -kInf || col_sup == -kInf) return LogComplex::zero();
    return LogComplex::from_polar(0.5 * (row_sup + col_sup), 0.0);
}

}  // namespace

LogComplex schur_bound_streamed(const ContourSpec& spec,
                                const ContourSymbol& sym, double h,
                                const SweepLayout& layout) {
    return sweep_core(spec, nullptr, sym, h, layout);
}

LogComplex stokes_remainder(const ContourSpec& from_spec,
                            const ContourSpec& to_spec,
                            const ContourSymbol& sym, double h,
                            const SweepLayout& layout) {
    Homotopy ho = classify(from_spec, to_spec, h);
    // Entire symbols have no dbar: contour motion is exact for them.
    if (sym.kind == ContourSymbol::Kind::entire) return LogComplex::zero();
    return sweep_core(to_spec, &ho, sym, h, layout);
}

}  // namespace gevlab
