// Phase symmetries on the Bargmann side and what they buy: the superposition
// representation of Weyl operators, symbol composition through the symplectic
// Gaussian Fourier multiplier (with a damped oscillatory-integral oracle to
// check it against), the Gevrey tail of the composition integral, and the
// stationary-phase expansion whose optimal truncation shows the 2s-1 loss.
#pragma once

#include <array>
#include <vector>

#include "gevlab/bargmann.hpp"
#include "gevlab/gevrey.hpp"
#include "gevlab/grids.hpp"

namespace gevlab {

// Phase-twisted point reflection through x_center. The weight must be the
// undeformed quadratic one; the pluriharmonic part vanishes for it, which the
// reflection phase formula assumes.
struct PhaseSymmetry {
    cplx x_center;
    double h = 1.0;
    Weight weight;
};

PhaseSymmetry make_phase_symmetry(cplx x_center, double h,
                                  const Weight& weight = {});

// (Sigma_x U)(y) = exp((2i/h) Im(y conj(x))) U(2x - y), sampled on U's grid.
// When 2x - y lands on the grid lattice the reflection is exact; otherwise
// bilinear interpolation with zero extension outside the box.
SampledField sigma_apply(const PhaseSymmetry& sym, const SampledField& u);

// Symbol on the phase space identified with R^2 through the x-projection.
// The two mult_* fields are composition diagnostics filled by moyal_compose:
// the multiplier phase reach across the occupied spectral bands of the two
// factors, and the (always larger) reach at the grid's Nyquist square.
struct PhaseSpaceSymbol {
    SampledField field;
    double s = 2.0;
    double support_radius = 0.0;
    double mult_band_phase = 0.0;
    double mult_nyquist_phase = 0.0;
};

// Conjugated Weyl operator acting through the superposition of reflections:
// (2/(pi h)) Integral a(x) (Sigma_x U) L(dx), quadrature over a's grid. The
// grids of a and U must share spacing and lattice alignment.
SampledField weyl_via_symmetries(const PhaseSpaceSymbol& a, double h,
                                 const SampledField& u);

// Matrix of the superposition operator against the first k_max+1 monomial
// basis vectors, for cross checks against the kernel-route quantization.
std::vector<std::vector<cplx>> weyl_matrix(const PhaseSpaceSymbol& a,
                                           const BasisSpec& basis,
                                           const Grid& grid);

// a#b through the discrete symplectic Fourier multiplier
// exp((ih/4)(xi_zeta xi_y - xi_eta xi_z)) on the doubled frequency lattice,
// restricted to the diagonal. Grids must match, with power-of-two points per
// axis. The returned node values are exact for the trigonometric interpolants
// of the inputs; how far the multiplier phase swings across the occupied
// bands (all but 1e-8 of each factor's spectral mass) and across the full
// Nyquist square is reported in the mult_* diagnostics of the result.
PhaseSpaceSymbol moyal_compose(const PhaseSpaceSymbol& a,
                               const PhaseSpaceSymbol& b, double h);

// Direct quadrature of the double phase-space integral with Gaussian damping
// exp(-eps(|Y|^2+|Z|^2)) and Richardson extrapolation through epsilon_list.
// Cost is node_count^2 per output point; intended as an oracle on small grids
// or through the single-point variant. Throws when successive extrapolation
// differences fail to decrease.
cplx compose_direct_point(const PhaseSpaceSymbol& a, const PhaseSpaceSymbol& b,
                          double h, cplx big_x,
                          const std::vector<double>& epsilon_list);
PhaseSpaceSymbol compose_direct(const PhaseSpaceSymbol& a,
                                const PhaseSpaceSymbol& b, double h,
                                const std::vector<double>& epsilon_list);

// Tail of the quadratic-phase integral left outside the cutoff chi:
// r(X) = h^{-1} Integral exp(i y1 y2 / h) (1 - chi(y)) a(X + y) dy
// on the plane, swept over eight h values in [h_top/16, h_top] and fitted.
// chi must be identically 1 on the unit ball and supported in the 2-ball.
// The fitted exponent targets 1/s.
DecayFit gevrey_tail(const GevreyFunction& a, const GevreyFunction& chi,
                     double h_top,
                     const std::vector<std::array<double, 2>>& x_list);

// One tail value at fixed h and X, for pointwise comparisons between cutoffs.
cplx gevrey_tail_point(const GevreyFunction& a, const GevreyFunction& chi,
                       double h, const std::array<double, 2>& big_x);

struct StationaryPhase {
    double integral = 0.0;        // (2 pi h)^{-d/2} Integral e^{-|x|^2/2h} a
    std::vector<double> terms;    // h^j/j! (Lap/2)^j a(0), j < K
    double remainder = 0.0;       // integral minus the partial sum
};

// Gaussian-weighted integral against its semiclassical expansion, terms by
// spectral differentiation, d = 1 or 2. K at most 12; throws when the
// spectral noise floor contaminates the requested derivative orders.
StationaryPhase stationary_phase(const GevreyFunction& a, double h, int k_terms);

// Truncation order K(h) = round((1/(c h))^{1/(2s-1)}) capped at 12, the
// optimizer of the (K!)^{2s-1} h^K remainder bound.
int optimal_truncation(double s, double h, double c);

// Fresnel factor e^{i pi sgn(A)/4} |det A|^{-1/2} of a real symmetric
// non-degenerate matrix, through a Jacobi eigendecomposition. The 4x4 pairing
// matrix of the composition phase has determinant 1 and signature 0, which is
// why the double integral carries no residual phase; tests pin the factor
// against the 1-d Fresnel integral.
cplx fresnel_factor(const std::vector<std::vector<double>>& sym_matrix);
std::vector<std::vector<double>> composition_pairing_matrix();

}  // namespace gevlab
