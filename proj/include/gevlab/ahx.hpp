// Almost holomorphic extensions: a compactly supported function u on R^2 is
// extended to complex arguments by inverting its Fourier transform with a
// radial cutoff whose argument couples |Im z| to |xi|^{(s-1)/s}. The extension
// is holomorphic up to an error that decays like exp(-c |Im z|^{-1/(s-1)}),
// which the fit helpers measure. A weighted L^2 inequality for dbar on the
// unit disc (carleman_check) backs the uniqueness argument.
#pragma once

#include <array>
#include <utility>
#include <vector>

#include "gevlab/gevrey.hpp"
#include "gevlab/grids.hpp"

namespace gevlab {

struct CutoffConfig {
    double plateau_end = 0.0;   // psi is identically 1 on [0, plateau_end]
    double support_end = 0.0;   // psi vanishes beyond this radius
    double profile_order = 2.0; // Gevrey order of the transition profile
};

// Radial cutoff psi and its derivative: a smoothstep between two one-sided
// exp(-t^{-1/(order-1)}) edge profiles, exactly 1 on the plateau and exactly
// 0 past support_end.
double cutoff_psi(const CutoffConfig& cfg, double r);
double cutoff_psi_prime(const CutoffConfig& cfg, double r);

// Default config tied to the measured transform decay of u: support_end is
// half the reciprocal of the fitted stretch constant, so the truncated
// inversion integrand stays summable, and the transition starts at 80% of
// support_end to keep the dbar magnitudes well above the rounding floor.
CutoffConfig default_cutoff(const GevreyFunction& u, const DecayFit& fit);

struct AHExtension {
    GevreyFunction base;
    CutoffConfig cutoff;
    Grid xi_grid;
    SampledField uhat;   // transform of base.field cached on xi_grid
    double s = 2.0;

    // Log-space copy of uhat plus cached |xi|^{(s-1)/s} per node; these keep
    // deep evaluations meaningful far below double underflow.
    std::vector<LogComplex> uhat_log;
    std::vector<double> xi_norm_pow;
    double alpha() const { return (s - 1.0) / s; }
};

AHExtension mather_extend(const GevreyFunction& u, const CutoffConfig& cutoff,
                          const Grid& xi_grid);

// Evaluates the extension at x + iy by quadrature over xi_grid.
cplx extension_eval(const AHExtension& ext, const std::array<double, 2>& x,
                    const std::array<double, 2>& y);

// d/d conj(z_j) of the extension. Only the cutoff depends on conj(z); the
// closed form multiplies psi' by |xi|^{(s-1)/s} and by the Wirtinger factor
// i*y_j/(2|y|). Returns 0 without quadrature at y = 0.
cplx dbar(const AHExtension& ext, const std::array<cplx, 2>& z, int j);

// Log-space component used by the fits (immune to double underflow).
LogComplex dbar_log(const AHExtension& ext, const std::array<double, 2>& x,
                    const std::array<double, 2>& y, int j);

// Fits log |dbar| at z(t) = base_point + i t direction against
// log_prefactor - c t^{-p}; p estimates 1/(s-1).
DecayFit dbar_decay_fit(const AHExtension& ext,
                        const std::array<double, 2>& base_point,
                        const std::array<double, 2>& direction,
                        const std::vector<double>& t_list);

// Same fit applied to |ext1 - ext2| for two extensions of one base function
// that differ only in cutoff; the difference is integrated as a single
// quadrature of (psi1 - psi2) to avoid cancellation.
DecayFit extension_difference_decay(const AHExtension& ext1,
                                    const AHExtension& ext2,
                                    const std::array<double, 2>& base_point,
                                    const std::array<double, 2>& direction,
                                    const std::vector<double>& t_list);

// Weighted dbar inequality on the unit disc: for v vanishing at the grid
// boundary and strictly subharmonic phi returns
//   lhs = sqrt(2) * || e^phi (d^2 phi / dz dzbar)^{1/2} v ||
//   rhs = || e^phi dbar v ||
// with trapezoid norms; the caller asserts lhs <= rhs within slack.
std::pair<double, double> carleman_check(const SampledField& v,
                                         const SampledField& phi,
                                         const SampledField& dbar_v);

}  // namespace gevlab
