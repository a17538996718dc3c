// Kernel assembly along contour families, operator matrices against the
// monomial basis, Schur norm bounds, and the contour-deformation (Stokes)
// remainders whose magnitudes carry the Gevrey decay rates. Everything deep
// runs in log space: the interesting magnitudes sit far below double
// underflow, so kernels store (log magnitude, phase) pairs and norm sweeps
// factor a common scale out of every accumulation.
#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "gevlab/ahx.hpp"
#include "gevlab/bargmann.hpp"
#include "gevlab/gevrey.hpp"
#include "gevlab/grids.hpp"

namespace gevlab {

struct GSigmaModel {
    double big_c = 1.0;  // quadratic coefficient C
    double c1 = 0.5;     // stretched-decay coefficient C1
    double h = 0.1;
    double s = 2.0;
};

double g_sigma(const GSigmaModel& m, double sigma);
// Closed-form minimizer of (C/h) sigma^2 + C1 sigma^{-1/(s-1)} and the value
// there; the value scales like h^{-1/(2s-1)}.
std::pair<double, double> sigma_min(const GSigmaModel& m);

// Cap radius omega = h^{1-1/s}/c0; throws when it fails to sit below the
// default model's optimal sigma (constants outside the asymptotic regime).
double omega_choice(double s, double h, double c0);

struct RateFit {
    double exponent = 0.0;
    double log_c = 0.0;
    double rms_residual = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
};

// Least squares of log(-log_norm) against log(1/h). Requires at least five
// points, all with log_norm < -2.
RateFit rate_fit(const std::vector<double>& h_list,
                 const std::vector<double>& log_norms);

// ---------------------------------------------------------------------------
// Symbols on the straightened coordinates. kappa maps a contour point (m,
// theta) to a complex pair (W1, W2) that is real exactly on the natural
// phase space; symbols are functions of that pair.

struct PolyTerm {
    int p = 0;       // power of (W1 - i W2)/sqrt(2), the holomorphic coordinate
    int q = 0;       // power of (W1 + i W2)/sqrt(2), its conjugate on the real set
    cplx coeff = 1.0;
};

// One-dimensional chain extension: exact transform window machinery for the
// box chain plus a tabulated restriction to the real line.
struct Extension1D {
    std::shared_ptr<const BoxChain> chain;
    CutoffConfig cutoff;  // radial cutoff applied per axis
    double alpha = 0.5;   // (s-1)/s
    double support = 0.0;
    std::vector<double> real_tab;
    double real_dx = 0.0;
    std::vector<double> hat_tab;  // signed hat samples on the window lattice
    std::vector<double> pow_tab;  // xi^alpha on the same lattice
    double tab_dxi = 0.0;

    double u1_real(double p) const;  // samples of the chain on the real line
};

Extension1D make_extension1d(double a, double s);

struct ContourSymbol {
    enum class Kind { entire, chain, mather };
    Kind kind = Kind::entire;
    std::vector<PolyTerm> poly;  // the symbol itself (entire) or a prefactor
    Extension1D axis;            // kind == chain: same chain on both axes
    const AHExtension* mather = nullptr;  // kind == mather, non-owning
};

ContourSymbol symbol_one();
ContourSymbol symbol_poly(std::vector<PolyTerm> terms);
// Tensor product of one chain per axis, optionally times an entire polynomial.
ContourSymbol symbol_chain(double a, double s, std::vector<PolyTerm> prefactor = {});
ContourSymbol symbol_mather(const AHExtension* ext);

// Point evaluation at a straightened pair (W1, W2); dbar components are the
// derivatives in conj(W1) and conj(W2). Exact zeros for entire symbols.
LogComplex symbol_value(const ContourSymbol& sym, cplx w1, cplx w2);
void symbol_dbars(const ContourSymbol& sym, cplx w1, cplx w2, LogComplex* d1,
                  LogComplex* d2);

// ---------------------------------------------------------------------------
// Materialized kernels.

struct KernelMatrix {
    Grid grid_x, grid_y;
    std::vector<LogComplex> entries;  // row-major [ix * ny + iy]
    double h = 0.1;
    ContourSpec spec;
};

// Effective kernel entries: (2 pi h)^{-1} e^{(i/h)(x-y) theta}
// a((x+y)/2, theta) (2 i theta_ybar) e^{(Phi(y)-Phi(x))/h} times the y
// quadrature weight. The sign of the surface factor is the orientation fixed
// by the reproducing test (a == 1 gives the identity). Throws when grid
// spacing exceeds sqrt(h)/4; covering the symbol support plus the Gaussian
// interaction length (about 8 sqrt(h)) is the caller's responsibility.
KernelMatrix effective_kernel(const ContourSpec& spec, const ContourSymbol& sym,
                              double h, const Grid& grid_x, const Grid& grid_y);

// M[j][k] = <Op e_k, e_j> in the weighted space, by double quadrature.
std::vector<std::vector<cplx>> operator_matrix(const KernelMatrix& kernel,
                                               const BasisSpec& basis);

// log sqrt(sup-row-sum * sup-column-sum) of the absolute entries.
LogComplex schur_bound(const KernelMatrix& kernel);

// ---------------------------------------------------------------------------
// Streaming sweeps. Row and column sums over a polar relative grid
// z = x - y; nothing is materialized, so these reach arbitrarily deep h.

struct SweepLayout {
    Grid x_grid;          // d=2 nodes for rows; columns reuse the same grid
    int z_radial = 40;
    int z_angular = 12;
    double z_r_min = 1e-3;
    double z_r_max = 4.0;
    int t_points = 16;    // homotopy quadrature nodes
};

// Schur bound of the kernel on the layout's polar geometry (log space).
LogComplex schur_bound_streamed(const ContourSpec& spec,
                                const ContourSymbol& sym, double h,
                                const SweepLayout& layout);

// Schur bound of the contour-deformation remainder between two connected
// specs: the t-integral of the defect 5-form, with the symbol's dbar in place
// of the symbol. Supported moves: flat->analytic, flat->mixed (either cap
// law), cap->cap at fixed weight, and undeformed->deformed weight at a fixed
// mixed contour.
LogComplex stokes_remainder(const ContourSpec& from_spec,
                            const ContourSpec& to_spec,
                            const ContourSymbol& sym, double h,
                            const SweepLayout& layout);

}  // namespace gevlab
