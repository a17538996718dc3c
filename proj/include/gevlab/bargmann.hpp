// Model Bargmann geometry at one complex variable: the quadratic weight
// |x|^2/2, optional compactly supported weight deformations, the contour
// families (flat, globally tilted, and capped-tilt) with their Wirtinger
// surface factors, the linear coordinate map that straightens the associated
// real phase space, and the monomial basis norms.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gevlab/gevrey.hpp"
#include "gevlab/grids.hpp"

namespace gevlab {

// Real-valued weight perturbation psi(x) = amplitude * profile(x / length_scale)
// with closed-form first and second derivatives through the bump profile.
struct Deformation {
    double amplitude = 0.0;
    double length_scale = 1.0;
    GevreyFunction profile;  // 2-d bump over (Re x, Im x)
    double d0 = 0.0, d1 = 0.0, d2 = 0.0;  // measured sup of psi, grad, Hessian
};

Deformation make_deformation(double amplitude, double length_scale,
                             double profile_s, double profile_radius,
                             int grid_points);

double defo_value(const Deformation& d, cplx x);
cplx defo_dx(const Deformation& d, cplx x);        // Wirtinger d psi / dx
double defo_dxxbar(const Deformation& d, cplx x);  // = Laplacian(psi)/4
cplx defo_dxx(const Deformation& d, cplx x);

struct Weight {
    double hermitian_coeff = 0.5;  // second mixed derivative of |x|^2/2
    std::optional<Deformation> deformation;
};

// Weight value |x|^2/2 plus the deformation when present.
double phi(const Weight& w, cplx x);

// |Re(2 d_x Phi0(mid) (x-y)) - (Phi0(x) - Phi0(y))|, identically 0 for the
// quadratic weight up to rounding.
double taylor_identity_residual(cplx x, cplx y);

// Capped conjugate: conj(z) for |z| <= omega, omega*conj(z)/|z| beyond.
cplx f_omega(cplx z, double omega);

enum class ContourKind { flat, analytic, mixed, mixed_h_half };

struct ContourSpec {
    ContourKind kind = ContourKind::flat;
    double t = 1.0;      // tilt strength for the analytic/mixed families
    double omega = 0.0;  // cap radius (mixed); cap = sqrt(h)/omega (mixed_h_half)
    Weight weight;
};

// Contour value theta(x, y) together with its Wirtinger derivatives in y.
// theta_ybar enters the surface measure dy ^ dtheta = theta_ybar dy ^ dybar;
// theta_y is nonzero only on the outer branch of the capped families and for
// deformed weights, and feeds the homotopy-defect integrand.
struct ThetaJet {
    cplx theta;
    cplx theta_ybar;
    cplx theta_y;
};

ThetaJet contour_jet(const ContourSpec& spec, cplx x, cplx y, double h);
std::pair<cplx, cplx> contour_theta(const ContourSpec& spec, cplx x, cplx y,
                                    double h);

// Effective cap radius of the spec at this h (omega, or sqrt(h)/omega).
double contour_cap(const ContourSpec& spec, double h);

// Linear straightening map: u = (x + i theta)/sqrt(2), v = (i x + theta)/sqrt(2).
// On theta = -i conj(x) it returns the real pair (sqrt(2) Re x, -sqrt(2) Im x).
std::pair<cplx, cplx> kappa(cplx x, cplx theta);

// Norm of the monomial x^k in the weighted space: sqrt(pi h^{k+1} k!).
double basis_coeff_norm(int k, double h);

struct BasisSpec {
    double h = 1.0;
    int k_max = 0;
    std::vector<double> norms;
};

BasisSpec make_basis(double h, int k_max);

// True iff every measured sup norm of the deformation stays below omega/margin.
bool check_deformation(const Deformation& d, double omega, double margin);

}  // namespace gevlab
