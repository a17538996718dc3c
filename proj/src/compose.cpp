#include "gevlab/compose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gevlab/quantize.hpp"

namespace gevlab {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_plane(const Grid& g, const char* who) {
    if (g.dims != 2)
        throw std::invalid_argument(std::string(who) +
                                    ": expected a 2-d grid");
}

// Lattice offset of one grid origin against another, in units of the common
// spacing. Returns false when the grids are incommensurate.
bool lattice_offset(const Grid& ga, const Grid& gb, long* offset) {
    for (int ax = 0; ax < 2; ++ax) {
        if (std::abs(ga.spacing[ax] - gb.spacing[ax]) >
            1.0e-12 * (1.0 + std::abs(ga.spacing[ax])))
            return false;
        double lo_a = ga.center[ax] - ga.half_width[ax];
        double lo_b = gb.center[ax] - gb.half_width[ax];
        double t = (lo_a - lo_b) / ga.spacing[ax];
        double r = std::round(t);
        if (std::abs(t - r) > 1.0e-9) return false;
        offset[ax] = static_cast<long>(r);
    }
    return true;
}

cplx bilinear(const SampledField& f, double x1, double x2) {
    const Grid& g = f.grid;
    double u = (x1 - (g.center[0] - g.half_width[0])) / g.spacing[0];
    double v = (x2 - (g.center[1] - g.half_width[1])) / g.spacing[1];
    long i = static_cast<long>(std::floor(u));
    long j = static_cast<long>(std::floor(v));
    double fu = u - i, fv = v - j;
    cplx out = 0.0;
    for (int du = 0; du < 2; ++du)
        for (int dv = 0; dv < 2; ++dv) {
            long ii = i + du, jj = j + dv;
            if (ii < 0 || jj < 0 || ii >= g.points[0] || jj >= g.points[1])
                continue;
            double w = (du ? fu : 1.0 - fu) * (dv ? fv : 1.0 - fv);
            int idx[2] = {static_cast<int>(ii), static_cast<int>(jj)};
            out += w * f.values[g.flatten(idx)];
        }
    return out;
}

// Unnormalized separable transform along both axes: sign -1 forward, +1
// inverse (divide by the node count afterwards for a round trip).
void dft2(std::vector<cplx>& vals, const Grid& g, int sign) {
    for (int ax = 0; ax < 2; ++ax) {
        int p = g.points[ax];
        std::vector<cplx> tw(p);
        for (int n = 0; n < p; ++n)
            tw[n] = std::exp(cplx(0.0, sign * 2.0 * kPi * n / p));
        int other = g.points[1 - ax];
        std::vector<cplx> line(p), acc(p);
        for (int o = 0; o < other; ++o) {
            for (int n = 0; n < p; ++n) {
                int idx[2];
                idx[ax] = n;
                idx[1 - ax] = o;
                line[n] = vals[g.flatten(idx)];
            }
            for (int k = 0; k < p; ++k) {
                cplx s = 0.0;
                for (int n = 0; n < p; ++n) s += line[n] * tw[(n * k) % p];
                acc[k] = s;
            }
            for (int k = 0; k < p; ++k) {
                int idx[2];
                idx[ax] = k;
                idx[1 - ax] = o;
                vals[g.flatten(idx)] = acc[k];
            }
        }
    }
}

int signed_freq(int k, int p) { return k < p / 2 ? k : k - p; }

// Smallest band radius (in signed index, sup norm over both axes) holding all
// but 1e-8 of the spectral mass.
int occupied_band(const std::vector<cplx>& hat, const Grid& g) {
    int p1 = g.points[0], p2 = g.points[1];
    double total = 0.0;
    for (const cplx& z : hat) total += std::norm(z);
    if (total == 0.0) return 0;
    int max_band = std::max(p1 / 2, p2 / 2);
    std::vector<double> by_radius(max_band + 1, 0.0);
    for (int k1 = 0; k1 < p1; ++k1)
        for (int k2 = 0; k2 < p2; ++k2) {
            int r = std::max(std::abs(signed_freq(k1, p1)),
                             std::abs(signed_freq(k2, p2)));
            int idx[2] = {k1, k2};
            by_radius[r] += std::norm(hat[g.flatten(idx)]);
        }
    double run = 0.0;
    for (int r = 0; r <= max_band; ++r) {
        run += by_radius[r];
        if (run >= (1.0 - 1.0e-8) * total) return r;
    }
    return max_band;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Polynomial extrapolation of damped values to epsilon = 0 (Neville at the
// origin), degree capped at two. The premise check: the raw differences must
// shrink down the list.
cplx richardson(const std::vector<double>& eps, const std::vector<cplx>& vals,
                const char* who) {
    std::size_t n = eps.size();
    if (n < 2 || n != vals.size())
        throw std::invalid_argument(std::string(who) +
                                    ": need at least two damping values");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(eps[i] > eps[i + 1]) || !(eps[i + 1] > 0.0))
            throw std::invalid_argument(std::string(who) +
                                        ": damping list must decrease");
    for (std::size_t i = 0; i + 2 < n; ++i)
        if (std::abs(vals[i + 2] - vals[i + 1]) >
            std::abs(vals[i + 1] - vals[i]) + 1.0e-300)
            throw std::runtime_error(std::string(who) +
                                     ": damped values are not converging");
    std::vector<cplx> t(vals);
    std::size_t order = std::min<std::size_t>(2, n - 1);
    for (std::size_t m = 1; m <= order; ++m)
        for (std::size_t i = n - 1; i >= m; --i) {
            double e_hi = eps[i - m], e_lo = eps[i];
            t[i] = (e_hi * t[i] - e_lo * t[i - 1]) / (e_hi - e_lo);
            if (i == m) break;
        }
    return t[n - 1];
}

struct WeightedNode {
    double x1, x2;
    cplx val;  // sample times quadrature weight
};

std::vector<WeightedNode> support_nodes(const SampledField& f) {
    std::vector<WeightedNode> out;
    int idx[2];
    for (std::size_t fl = 0; fl < f.grid.node_count(); ++fl) {
        if (f.values[fl] == 0.0) continue;
        f.grid.unflatten(fl, idx);
        out.push_back({f.grid.coord(0, idx[0]), f.grid.coord(1, idx[1]),
                       f.values[fl] * f.grid.quad_weight(idx)});
    }
    return out;
}

cplx damped_direct(const std::vector<WeightedNode>& an,
                   const std::vector<WeightedNode>& bn, double h, cplx big_x,
                   double eps) {
    double x1 = big_x.real(), x2 = big_x.imag();
    cplx sum = 0.0;
    for (const WeightedNode& u : an) {
        double y1 = u.x1 - x1, y2 = u.x2 - x2;
        double ry = y1 * y1 + y2 * y2;
        cplx inner = 0.0;
        for (const WeightedNode& v : bn) {
            double z1 = v.x1 - x1, z2 = v.x2 - x2;
            double rz = z1 * z1 + z2 * z2;
            double phase = (4.0 / h) * (y2 * z1 - y1 * z2);
            inner += v.val * std::exp(cplx(-eps * rz, phase));
        }
        sum += u.val * std::exp(-eps * ry) * inner;
    }
    double pref = 2.0 / (kPi * h);
    return sum * (pref * pref);
}

double bump_sample(const GevreyFunction& a, double x1, double x2) {
    double r2 = x1 * x1 + x2 * x2;
    if (r2 >= a.support_radius * a.support_radius) return 0.0;
    return bump_value(a.order_s, a.support_radius, r2);
}

cplx tail_value(const GevreyFunction& a, const GevreyFunction& chi, double h,
                const std::array<double, 2>& big_x, double eps) {
    const Grid& g = chi.field.grid;
    double dx = g.spacing[0];
    double lo1 = g.center[0] - g.half_width[0];
    double lo2 = g.center[1] - g.half_width[1];
    double ra = a.support_radius;
    long i1_lo = static_cast<long>(std::ceil((-big_x[0] - ra - lo1) / dx));
    long i1_hi = static_cast<long>(std::floor((-big_x[0] + ra - lo1) / dx));
    long i2_lo = static_cast<long>(std::ceil((-big_x[1] - ra - lo2) / dx));
    long i2_hi = static_cast<long>(std::floor((-big_x[1] + ra - lo2) / dx));
    cplx sum = 0.0;
    for (long i1 = i1_lo; i1 <= i1_hi; ++i1) {
        double y1 = lo1 + i1 * dx;
        for (long i2 = i2_lo; i2 <= i2_hi; ++i2) {
            double y2 = lo2 + i2 * dx;
            double c = 0.0;
            if (i1 >= 0 && i1 < g.points[0] && i2 >= 0 && i2 < g.points[1]) {
                int idx[2] = {static_cast<int>(i1), static_cast<int>(i2)};
                c = chi.field.values[g.flatten(idx)].real();
            }
            if (c >= 1.0 - 1.0e-15) continue;
            double av = bump_sample(a, big_x[0] + y1, big_x[1] + y2);
            if (av == 0.0) continue;
            double damp = eps * (y1 * y1 + y2 * y2);
            sum += (1.0 - c) * av * std::exp(cplx(-damp, y1 * y2 / h));
        }
    }
    return sum * (dx * dx / h);
}

void check_tail_cutoff(const GevreyFunction& chi) {
    const Grid& g = chi.field.grid;
    require_plane(g, "tail estimate");
    if (std::abs(g.spacing[0] - g.spacing[1]) > 1.0e-12)
        throw std::invalid_argument("tail estimate: cutoff grid must be square");
    for (int ax = 0; ax < 2; ++ax)
        if (g.center[ax] - g.half_width[ax] > -2.0 ||
            g.center[ax] + g.half_width[ax] < 2.0)
            throw std::invalid_argument(
                "tail estimate: cutoff grid must cover the 2-ball");
    int idx[2];
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unflatten(f, idx);
        double y1 = g.coord(0, idx[0]), y2 = g.coord(1, idx[1]);
        double r = std::hypot(y1, y2);
        cplx v = chi.field.values[f];
        if (std::abs(v.imag()) > 1.0e-12)
            throw std::invalid_argument("tail estimate: cutoff must be real");
        if (r <= 1.0 && std::abs(v.real() - 1.0) > 1.0e-9)
            throw std::invalid_argument(
                "tail estimate: cutoff must be 1 on the unit ball");
        if (r >= 2.0 && std::abs(v.real()) > 1.0e-9)
            throw std::invalid_argument(
                "tail estimate: cutoff must vanish outside the 2-ball");
    }
}

}  // namespace

PhaseSymmetry make_phase_symmetry(cplx x_center, double h,
                                  const Weight& weight) {
    if (!(h > 0.0))
        throw std::invalid_argument("phase symmetry needs h > 0");
    if (weight.deformation.has_value())
        throw std::invalid_argument(
            "phase symmetry requires the undeformed weight");
    if (std::abs(weight.hermitian_coeff - 0.5) > 1.0e-12)
        throw std::invalid_argument(
            "phase symmetry requires the quadratic weight |x|^2/2");
    return {x_center, h, weight};
}

SampledField sigma_apply(const PhaseSymmetry& sym, const SampledField& u) {
    require_plane(u.grid, "sigma_apply");
    const Grid& g = u.grid;
    double x1 = sym.x_center.real(), x2 = sym.x_center.imag();
    SampledField out;
    out.grid = g;
    out.values.resize(g.node_count());
    // Reflection target in lattice units; integer offsets keep it exact.
    double t1 = (2.0 * x1 - 2.0 * (g.center[0] - g.half_width[0])) / g.spacing[0];
    double t2 = (2.0 * x2 - 2.0 * (g.center[1] - g.half_width[1])) / g.spacing[1];
    bool aligned = std::abs(t1 - std::round(t1)) < 1.0e-9 &&
                   std::abs(t2 - std::round(t2)) < 1.0e-9;
    long r1 = static_cast<long>(std::round(t1));
    long r2 = static_cast<long>(std::round(t2));
    int idx[2];
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unflatten(f, idx);
        double y1 = g.coord(0, idx[0]), y2 = g.coord(1, idx[1]);
        cplx phase = std::exp(kI * ((2.0 / sym.h) * (y2 * x1 - y1 * x2)));
        cplx val;
        if (aligned) {
            long j1 = r1 - idx[0], j2 = r2 - idx[1];
            if (j1 < 0 || j2 < 0 || j1 >= g.points[0] || j2 >= g.points[1]) {
                val = 0.0;
            } else {
                int ridx[2] = {static_cast<int>(j1), static_cast<int>(j2)};
                val = u.values[g.flatten(ridx)];
            }
        } else {
            val = bilinear(u, 2.0 * x1 - y1, 2.0 * x2 - y2);
        }
        out.values[f] = phase * val;
    }
    return out;
}

SampledField weyl_via_symmetries(const PhaseSpaceSymbol& a, double h,
                                 const SampledField& u) {
    require_plane(a.field.grid, "weyl_via_symmetries");
    require_plane(u.grid, "weyl_via_symmetries");
    if (!(h > 0.0))
        throw std::invalid_argument("weyl_via_symmetries needs h > 0");
    long off[2];
    if (!lattice_offset(a.field.grid, u.grid, off))
        throw std::invalid_argument(
            "weyl_via_symmetries: symbol and state grids must share the "
            "lattice");
    const Grid& ga = a.field.grid;
    const Grid& gu = u.grid;
    int p1 = gu.points[0], p2 = gu.points[1];
    SampledField out;
    out.grid = gu;
    out.values.assign(gu.node_count(), 0.0);
    std::vector<cplx> ph1(p1), ph2(p2);
    int idx[2];
    for (std::size_t f = 0; f < ga.node_count(); ++f) {
        cplx av = a.field.values[f];
        if (av == 0.0) continue;
        ga.unflatten(f, idx);
        double x1 = ga.coord(0, idx[0]), x2 = ga.coord(1, idx[1]);
        cplx coeff = av * ga.quad_weight(idx) * (2.0 / (kPi * h));
        // Reflected index along each axis: node j of the state grid maps to
        // 2x - y at index 2*(x's lattice position) - j.
        long base1 = 2 * off[0] + 2 * static_cast<long>(idx[0]);
        long base2 = 2 * off[1] + 2 * static_cast<long>(idx[1]);
        for (int j = 0; j < p1; ++j)
            ph1[j] = std::exp(kI * (-(2.0 / h) * gu.coord(0, j) * x2));
        for (int k = 0; k < p2; ++k)
            ph2[k] = std::exp(kI * ((2.0 / h) * gu.coord(1, k) * x1));
        for (int j = 0; j < p1; ++j) {
            long j_ref = base1 - j;
            if (j_ref < 0 || j_ref >= p1) continue;
            cplx cj = coeff * ph1[j];
            const std::size_t row_out = static_cast<std::size_t>(j) * p2;
            const std::size_t row_in = static_cast<std::size_t>(j_ref) * p2;
            for (int k = 0; k < p2; ++k) {
                long k_ref = base2 - k;
                if (k_ref < 0 || k_ref >= p2) continue;
                out.values[row_out + k] +=
                    cj * ph2[k] * u.values[row_in + k_ref];
            }
        }
    }
    return out;
}

std::vector<std::vector<cplx>> weyl_matrix(const PhaseSpaceSymbol& a,
                                           const BasisSpec& basis,
                                           const Grid& grid) {
    require_plane(grid, "weyl_matrix");
    int n = basis.k_max + 1;
    double h = basis.h;
    std::vector<SampledField> states(n);
    int idx[2];
    for (int k = 0; k < n; ++k) {
        states[k].grid = grid;
        states[k].values.resize(grid.node_count());
        for (std::size_t f = 0; f < grid.node_count(); ++f) {
            grid.unflatten(f, idx);
            cplx y(grid.coord(0, idx[0]), grid.coord(1, idx[1]));
            states[k].values[f] = std::pow(y, k) *
                                  std::exp(-std::norm(y) / (2.0 * h)) /
                                  basis.norms[k];
        }
    }
    std::vector<std::vector<cplx>> m(n, std::vector<cplx>(n));
    for (int k = 0; k < n; ++k) {
        SampledField w = weyl_via_symmetries(a, h, states[k]);
        for (int j = 0; j < n; ++j) {
            cplx acc = 0.0;
            for (std::size_t f = 0; f < grid.node_count(); ++f) {
                grid.unflatten(f, idx);
                acc += w.values[f] * std::conj(states[j].values[f]) *
                       grid.quad_weight(idx);
            }
            m[j][k] = acc;
        }
    }
    return m;
}

PhaseSpaceSymbol moyal_compose(const PhaseSpaceSymbol& a,
                               const PhaseSpaceSymbol& b, double h) {
    const Grid& g = a.field.grid;
    require_plane(g, "moyal_compose");
    const Grid& gb = b.field.grid;
    for (int ax = 0; ax < 2; ++ax) {
        if (g.points[ax] != gb.points[ax] ||
            std::abs(g.center[ax] - gb.center[ax]) > 1.0e-12 ||
            std::abs(g.half_width[ax] - gb.half_width[ax]) > 1.0e-12)
            throw std::invalid_argument("moyal_compose: grids must match");
        if (!is_pow2(g.points[ax]))
            throw std::invalid_argument(
                "moyal_compose: points per axis must be a power of two");
        if (g.spacing[ax] > std::sqrt(h) + 1.0e-12)
            throw std::invalid_argument(
                "moyal_compose: grid spacing must resolve sqrt(h)");
    }
    int p1 = g.points[0], p2 = g.points[1];
    std::vector<cplx> ah(a.field.values), bh(b.field.values);
    dft2(ah, g, -1);
    dft2(bh, g, -1);
    int band_a = occupied_band(ah, g);
    int band_b = occupied_band(bh, g);
    double w1 = 2.0 * kPi / (p1 * g.spacing[0]);
    double w2 = 2.0 * kPi / (p2 * g.spacing[1]);
    double reach = 0.25 * h *
                   (band_a * w1 * band_b * w2 + band_a * w2 * band_b * w1);
    double nyq = 0.25 * h * 2.0 * (0.5 * p1 * w1) * (0.5 * p2 * w2);

    // exp(i h/4 (xi_b2 xi_a1 - xi_a2 xi_b1)) split into two rank-one phase
    // tables over the occupied bands.
    int na = 2 * band_a + 1, nb = 2 * band_b + 1;
    std::vector<cplx> t_pos(static_cast<std::size_t>(nb) * na);
    std::vector<cplx> t_neg(static_cast<std::size_t>(na) * nb);
    for (int l2 = -band_b; l2 <= band_b; ++l2)
        for (int k1 = -band_a; k1 <= band_a; ++k1)
            t_pos[static_cast<std::size_t>(l2 + band_b) * na + (k1 + band_a)] =
                std::exp(kI * (0.25 * h * (l2 * w2) * (k1 * w1)));
    for (int k2 = -band_a; k2 <= band_a; ++k2)
        for (int l1 = -band_b; l1 <= band_b; ++l1)
            t_neg[static_cast<std::size_t>(k2 + band_a) * nb + (l1 + band_b)] =
                std::exp(kI * (-0.25 * h * (k2 * w2) * (l1 * w1)));

    std::vector<cplx> comp(static_cast<std::size_t>(p1) * p2, 0.0);
    for (int k1 = -band_a; k1 <= band_a; ++k1) {
        int k1i = (k1 + p1) % p1;
        for (int k2 = -band_a; k2 <= band_a; ++k2) {
            int k2i = (k2 + p2) % p2;
            cplx av = ah[static_cast<std::size_t>(k1i) * p2 + k2i];
            if (av == 0.0) continue;
            const cplx* row_neg = &t_neg[static_cast<std::size_t>(k2 + band_a) * nb];
            for (int l1 = -band_b; l1 <= band_b; ++l1) {
                int w1i = (k1 + l1 + 2 * p1) % p1;
                int l1i = (l1 + p1) % p1;
                cplx avn = av * row_neg[l1 + band_b];
                for (int l2 = -band_b; l2 <= band_b; ++l2) {
                    int l2i = (l2 + p2) % p2;
                    cplx bv = bh[static_cast<std::size_t>(l1i) * p2 + l2i];
                    if (bv == 0.0) continue;
                    int w2i = (k2 + l2 + 2 * p2) % p2;
                    comp[static_cast<std::size_t>(w1i) * p2 + w2i] +=
                        avn * bv *
                        t_pos[static_cast<std::size_t>(l2 + band_b) * na +
                              (k1 + band_a)];
                }
            }
        }
    }
    dft2(comp, g, +1);
    double scale = 1.0 / (static_cast<double>(p1) * p2);
    scale *= scale;
    for (cplx& z : comp) z *= scale;
    PhaseSpaceSymbol c;
    c.field.grid = g;
    c.field.values = std::move(comp);
    c.s = std::max(a.s, b.s);
    c.support_radius = std::max(a.support_radius, b.support_radius);
    c.mult_band_phase = reach;
    c.mult_nyquist_phase = nyq;
    return c;
}

cplx compose_direct_point(const PhaseSpaceSymbol& a, const PhaseSpaceSymbol& b,
                          double h, cplx big_x,
                          const std::vector<double>& epsilon_list) {
    require_plane(a.field.grid, "compose_direct");
    require_plane(b.field.grid, "compose_direct");
    std::vector<WeightedNode> an = support_nodes(a.field);
    std::vector<WeightedNode> bn = support_nodes(b.field);
    std::vector<cplx> vals;
    vals.reserve(epsilon_list.size());
    for (double eps : epsilon_list)
        vals.push_back(damped_direct(an, bn, h, big_x, eps));
    return richardson(epsilon_list, vals, "compose_direct");
}

PhaseSpaceSymbol compose_direct(const PhaseSpaceSymbol& a,
                                const PhaseSpaceSymbol& b, double h,
                                const std::vector<double>& epsilon_list) {
    const Grid& g = a.field.grid;
    require_plane(g, "compose_direct");
    if (g.node_count() > 1200)
        throw std::invalid_argument(
            "compose_direct: full-field evaluation is limited to small grids");
    std::vector<WeightedNode> an = support_nodes(a.field);
    std::vector<WeightedNode> bn = support_nodes(b.field);
    PhaseSpaceSymbol c;
    c.field.grid = g;
    c.field.values.resize(g.node_count());
    int idx[2];
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unflatten(f, idx);
        cplx big_x(g.coord(0, idx[0]), g.coord(1, idx[1]));
        std::vector<cplx> vals;
        vals.reserve(epsilon_list.size());
        for (double eps : epsilon_list)
            vals.push_back(damped_direct(an, bn, h, big_x, eps));
        c.field.values[f] = richardson(epsilon_list, vals, "compose_direct");
    }
    c.s = std::max(a.s, b.s);
    c.support_radius = std::max(a.support_radius, b.support_radius);
    return c;
}

DecayFit gevrey_tail(const GevreyFunction& a, const GevreyFunction& chi,
                     double h_top,
                     const std::vector<std::array<double, 2>>& x_list) {
    if (a.dims() != 2)
        throw std::invalid_argument("tail estimate: symbol must be 2-d");
    if (a.chain)
        throw std::invalid_argument(
            "tail estimate: only the radial bump family is supported");
    if (x_list.empty())
        throw std::invalid_argument("tail estimate: need evaluation points");
    check_tail_cutoff(chi);
    std::vector<double> h_list(8);
    for (int i = 0; i < 8; ++i)
        h_list[i] = h_top * std::pow(1.0 / 16.0, i / 7.0);
    double x_max = 0.0;
    for (const auto& x : x_list)
        x_max = std::max(x_max, std::max(std::abs(x[0]), std::abs(x[1])));
    double y_max = x_max + a.support_radius;
    double dx = chi.field.grid.spacing[0];
    if (dx > kPi * h_list.back() / (3.0 * y_max))
        throw std::invalid_argument(
            "tail estimate: cutoff grid too coarse for the phase at the "
            "smallest h");
    const std::vector<double> eps_list = {0.1, 0.05, 0.025};
    std::vector<double> log_r(h_list.size());
    bool all_zero = true;
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        double best = 0.0;
        for (const auto& x : x_list) {
            std::vector<cplx> vals;
            for (double eps : eps_list)
                vals.push_back(tail_value(a, chi, h_list[i], x, eps));
            best = std::max(best,
                            std::abs(richardson(eps_list, vals, "tail")));
        }
        if (best > 1.0e-280) all_zero = false;
        log_r[i] = std::log(std::max(best, 1.0e-300));
    }
    if (all_zero) return DecayFit{};
    RateFit fit = rate_fit(h_list, log_r);
    DecayFit out;
    out.exponent = fit.exponent;
    out.c = std::exp(fit.log_c);
    out.log_prefactor = 0.0;
    out.rms_residual = fit.rms_residual;
    out.window_min = fit.h_min;
    out.window_max = fit.h_max;
    out.out_of_family = fit.rms_residual > 0.25;
    return out;
}

cplx gevrey_tail_point(const GevreyFunction& a, const GevreyFunction& chi,
                       double h, const std::array<double, 2>& big_x) {
    if (a.dims() != 2)
        throw std::invalid_argument("tail estimate: symbol must be 2-d");
    if (a.chain)
        throw std::invalid_argument(
            "tail estimate: only the radial bump family is supported");
    check_tail_cutoff(chi);
    const std::vector<double> eps_list = {0.1, 0.05, 0.025};
    std::vector<cplx> vals;
    for (double eps : eps_list)
        vals.push_back(tail_value(a, chi, h, big_x, eps));
    return richardson(eps_list, vals, "tail");
}

StationaryPhase stationary_phase(const GevreyFunction& a, double h,
                                 int k_terms) {
    const Grid& g = a.field.grid;
    int d = g.dims;
    if (d != 1 && d != 2)
        throw std::invalid_argument("stationary_phase: need a 1-d or 2-d grid");
    if (k_terms < 1 || k_terms > 12)
        throw std::invalid_argument("stationary_phase: K must be in [1, 12]");
    if (!(h > 0.0))
        throw std::invalid_argument("stationary_phase: h must be positive");
    std::vector<long> origin(d);
    for (int ax = 0; ax < d; ++ax) {
        if (g.spacing[ax] > 0.7 * std::sqrt(h))
            throw std::invalid_argument(
                "stationary_phase: grid too coarse for the Gaussian weight");
        double t = (0.0 - (g.center[ax] - g.half_width[ax])) / g.spacing[ax];
        double r = std::round(t);
        if (std::abs(t - r) > 1.0e-9)
            throw std::invalid_argument(
                "stationary_phase: the origin must be a grid node");
        origin[ax] = static_cast<long>(r);
    }

    // Quadrature of the Gaussian integral.
    double integral = 0.0;
    std::vector<int> idx(d);
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unflatten(f, idx.data());
        double r2 = 0.0;
        for (int ax = 0; ax < d; ++ax) {
            double x = g.coord(ax, idx[ax]);
            r2 += x * x;
        }
        integral += a.field.values[f].real() * std::exp(-r2 / (2.0 * h)) *
                    g.quad_weight(idx.data());
    }
    integral *= std::pow(2.0 * kPi * h, -0.5 * d);

    // Spectral moments: hat(a) against powers of |xi|^2/2, re-centred on the
    // origin node. The noise model tracks how rounding in the transform is
    // amplified by high derivative orders.
    std::vector<cplx> hat(a.field.values);
    if (d == 1) {
        int p = g.points[0];
        std::vector<cplx> tmp(p);
        for (int k = 0; k < p; ++k) {
            cplx s = 0.0;
            for (int n = 0; n < p; ++n)
                s += hat[n] * std::exp(cplx(0.0, -2.0 * kPi * n * k / p));
            tmp[k] = s;
        }
        hat = std::move(tmp);
    } else {
        dft2(hat, g, -1);
    }
    double hat_max = 0.0;
    for (const cplx& z : hat) hat_max = std::max(hat_max, std::abs(z));
    double nodes = static_cast<double>(g.node_count());
    double amax = 0.0;
    for (const cplx& z : a.field.values) amax = std::max(amax, std::abs(z));

    std::vector<double> moments(k_terms, 0.0), noise(k_terms, 0.0);
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unflatten(f, idx.data());
        double xi2 = 0.0;
        double ph = 0.0;
        for (int ax = 0; ax < d; ++ax) {
            int p = g.points[ax];
            int kk = signed_freq(idx[ax], p);
            double xi = 2.0 * kPi * kk / (p * g.spacing[ax]);
            xi2 += xi * xi;
            ph += 2.0 * kPi * static_cast<double>(origin[ax]) * idx[ax] / p;
        }
        cplx rot = std::exp(cplx(0.0, ph));
        cplx base = hat[f] * rot;
        double half = -0.5 * xi2;
        double powv = 1.0, sq = 1.0;
        for (int j = 0; j < k_terms; ++j) {
            moments[j] += (base * powv).real();
            noise[j] += sq;
            powv *= half;
            sq *= half * half;
        }
    }
    StationaryPhase out;
    out.integral = integral;
    out.terms.resize(k_terms);
    double hj = 1.0, fact = 1.0;
    for (int j = 0; j < k_terms; ++j) {
        if (j > 0) {
            hj *= h;
            fact *= j;
        }
        double term = hj / fact * moments[j] / nodes;
        // Rounding enters once per transform sum and once per moment sum,
        // hence the sqrt(nodes) accumulation on top of the per-entry epsilon.
        // Noise below the symbol's own quadrature floor is harmless.
        double amp = hj / fact * 3.0e-16 * std::sqrt(nodes) * hat_max *
                     std::sqrt(noise[j]) / nodes;
        if (amp > 0.5 * std::abs(term) && amp > 1.0e-12 * amax)
            throw std::runtime_error(
                "stationary_phase: spectral differentiation noise floor "
                "reached before the requested order");
        out.terms[j] = term;
    }
    double partial = 0.0;
    for (double t : out.terms) partial += t;
    out.remainder = integral - partial;
    return out;
}

int optimal_truncation(double s, double h, double c) {
    if (!(s > 0.5) || !(h > 0.0) || !(c > 0.0))
        throw std::invalid_argument("optimal_truncation: bad parameters");
    double k = std::round(std::pow(1.0 / (c * h), 1.0 / (2.0 * s - 1.0)));
    return static_cast<int>(std::clamp(k, 1.0, 12.0));
}

std::vector<std::vector<double>> composition_pairing_matrix() {
    std::vector<std::vector<double>> m(4, std::vector<double>(4, 0.0));
    m[0][3] = m[3][0] = 1.0;
    m[1][2] = m[2][1] = -1.0;
    return m;
}

cplx fresnel_factor(const std::vector<std::vector<double>>& sym_matrix) {
    std::size_t n = sym_matrix.size();
    std::vector<std::vector<double>> m(sym_matrix);
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n)
            throw std::invalid_argument("fresnel_factor: matrix must be square");
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(m[i][j] - sym_matrix[j][i]) > 1.0e-12)
                throw std::invalid_argument(
                    "fresnel_factor: matrix must be symmetric");
    }
    // Cyclic Jacobi sweeps; 4x4 inputs converge in a handful of rotations.
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                off = std::max(off, std::abs(m[i][j]));
        if (off < 1.0e-14) break;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::abs(m[i][j]) < 1.0e-15) continue;
                double theta = 0.5 * std::atan2(2.0 * m[i][j], m[i][i] - m[j][j]);
                double cth = std::cos(theta), sth = std::sin(theta);
                for (std::size_t k = 0; k < n; ++k) {
                    double a_ik = m[i][k], a_jk = m[j][k];
                    m[i][k] = cth * a_ik + sth * a_jk;
                    m[j][k] = -sth * a_ik + cth * a_jk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double a_ki = m[k][i], a_kj = m[k][j];
                    m[k][i] = cth * a_ki + sth * a_kj;
                    m[k][j] = -sth * a_ki + cth * a_kj;
                }
            }
    }
    double det = 1.0, top = 0.0;
    int sgn = 0;
    for (std::size_t i = 0; i < n; ++i) top = std::max(top, std::abs(m[i][i]));
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(m[i][i]) < 1.0e-12 * top)
            throw std::invalid_argument("fresnel_factor: degenerate form");
        det *= m[i][i];
        sgn += m[i][i] > 0.0 ? 1 : -1;
    }
    return std::exp(kI * (kPi * sgn / 4.0)) / std::sqrt(std::abs(det));
}

}  // namespace gevlab
