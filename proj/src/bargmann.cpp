#include "gevlab/bargmann.hpp"

#include <cmath>
#include <stdexcept>

namespace gevlab {

Deformation make_deformation(double amplitude, double length_scale,
                             double profile_s, double profile_radius,
                             int grid_points) {
    if (!(length_scale > 0.0))
        throw std::invalid_argument("deformation needs a positive length scale");
    Deformation d;
    d.amplitude = amplitude;
    d.length_scale = length_scale;
    const Grid g = make_grid({0.0, 0.0}, {profile_radius, profile_radius},
                             {grid_points, grid_points});
    d.profile = gevrey_bump(profile_s, profile_radius, g);

    // Sup norms of psi and its first two derivative tiers from the closed
    // forms, swept over the sample lattice.
    const double dl = amplitude, s = profile_s;
    int idx[2];
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unflatten(f, idx);
        double b, grad[2], hess[3];
        bump_derivs(s, profile_radius, g.coord(0, idx[0]), g.coord(1, idx[1]),
                    &b, grad, hess);
        d.d0 = std::max(d.d0, std::fabs(dl * b));
        d.d1 = std::max(d.d1, std::fabs(dl / length_scale) *
                                  std::hypot(grad[0], grad[1]));
        const double hn = std::sqrt(hess[0] * hess[0] + 2.0 * hess[1] * hess[1] +
                                    hess[2] * hess[2]);
        d.d2 = std::max(d.d2, std::fabs(dl / (length_scale * length_scale)) * hn);
    }
    return d;
}

namespace {

void profile_derivs(const Deformation& d, cplx x, double* b, double grad[2],
                    double hess[3]) {
    bump_derivs(d.profile.order_s, d.profile.support_radius,
                x.real() / d.length_scale, x.imag() / d.length_scale, b, grad,
                hess);
}

}  // namespace

double defo_value(const Deformation& d, cplx x) {
    double b, grad[2], hess[3];
    profile_derivs(d, x, &b, grad, hess);
    return d.amplitude * b;
}

cplx defo_dx(const Deformation& d, cplx x) {
    double b, grad[2], hess[3];
    profile_derivs(d, x, &b, grad, hess);
    const double c = d.amplitude / d.length_scale;
    return 0.5 * c * cplx(grad[0], -grad[1]);
}

double defo_dxxbar(const Deformation& d, cplx x) {
    double b, grad[2], hess[3];
    profile_derivs(d, x, &b, grad, hess);
    const double c = d.amplitude / (d.length_scale * d.length_scale);
    return 0.25 * c * (hess[0] + hess[2]);
}

cplx defo_dxx(const Deformation& d, cplx x) {
    double b, grad[2], hess[3];
    profile_derivs(d, x, &b, grad, hess);
    const double c = d.amplitude / (d.length_scale * d.length_scale);
    return 0.25 * c * cplx(hess[0] - hess[2], -2.0 * hess[1]);
}

double phi(const Weight& w, cplx x) {
    double v = 0.5 * std::norm(x);
    if (w.deformation) v += defo_value(*w.deformation, x);
    return v;
}

double taylor_identity_residual(cplx x, cplx y) {
    const cplx mid_bar = std::conj(0.5 * (x + y));
    const double lhs = std::real(mid_bar * (x - y));
    const double rhs = 0.5 * (std::norm(x) - std::norm(y));
    return std::fabs(lhs - rhs);
}

cplx f_omega(cplx z, double omega) {
    const double az = std::abs(z);
    if (az <= omega) return std::conj(z);
    return omega * std::conj(z) / az;
}

double contour_cap(const ContourSpec& spec, double h) {
    if (spec.kind == ContourKind::mixed) return spec.omega;
    if (spec.kind == ContourKind::mixed_h_half) return std::sqrt(h) / spec.omega;
    return 0.0;
}

ThetaJet contour_jet(const ContourSpec& spec, cplx x, cplx y, double h) {
    const cplx mid = 0.5 * (x + y);
    const cplx z = x - y;
    ThetaJet jet;
    jet.theta = cplx(0.0, -1.0) * std::conj(mid);
    jet.theta_ybar = cplx(0.0, -0.5);
    jet.theta_y = 0.0;

    const cplx it(0.0, spec.t);
    switch (spec.kind) {
        case ContourKind::flat:
            break;
        case ContourKind::analytic:
            jet.theta += it * std::conj(z);
            jet.theta_ybar += -it;
            break;
        case ContourKind::mixed:
        case ContourKind::mixed_h_half: {
            const double cap = contour_cap(spec, h);
            const double az = std::abs(z);
            if (az < cap) {
                jet.theta += it * std::conj(z);
                jet.theta_ybar += -it;
            } else if (az > 0.0) {
                // Outer branch, also taken on the corner circle itself.
                jet.theta += it * cap * std::conj(z) / az;
                jet.theta_ybar += -it * cap / (2.0 * az);
                jet.theta_y += it * cap * std::conj(z) * std::conj(z) /
                               (2.0 * az * az * az);
            } else {
                jet.theta_ybar += -it;
            }
            break;
        }
    }
    if (spec.weight.deformation) {
        const Deformation& d = *spec.weight.deformation;
        jet.theta += cplx(0.0, -2.0) * defo_dx(d, mid);
        jet.theta_ybar += cplx(0.0, -1.0) * defo_dxxbar(d, mid);
        jet.theta_y += cplx(0.0, -1.0) * defo_dxx(d, mid);
    }
    return jet;
}

std::pair<cplx, cplx> contour_theta(const ContourSpec& spec, cplx x, cplx y,
                                    double h) {
    const ThetaJet jet = contour_jet(spec, x, y, h);
    return {jet.theta, jet.theta_ybar};
}

std::pair<cplx, cplx> kappa(cplx x, cplx theta) {
    const double r = 1.0 / std::sqrt(2.0);
    return {r * (x + cplx(0.0, 1.0) * theta), r * (cplx(0.0, 1.0) * x + theta)};
}

double basis_coeff_norm(int k, double h) {
    if (k < 0 || !(h > 0.0))
        throw std::invalid_argument("basis_coeff_norm needs k >= 0 and h > 0");
    return std::sqrt(kPi) *
           std::exp(0.5 * ((k + 1) * std::log(h) + std::lgamma(k + 1.0)));
}

BasisSpec make_basis(double h, int k_max) {
    BasisSpec b;
    b.h = h;
    b.k_max = k_max;
    b.norms.resize(k_max + 1);
    for (int k = 0; k <= k_max; ++k) b.norms[k] = basis_coeff_norm(k, h);
    return b;
}

bool check_deformation(const Deformation& d, double omega, double margin) {
    return std::max(d.d0, std::max(d.d1, d.d2)) <= omega / margin;
}

}  // namespace gevlab
