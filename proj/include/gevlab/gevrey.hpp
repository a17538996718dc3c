// Model Gevrey-class functions and order classification from Fourier decay.
//
// Two families are provided. gevrey_bump is the classical compactly supported
// profile exp(-((r^2-|x|^2)/r^2)^{-1/(s-1)}); its transform is computed by
// quadrature and bottoms out at the sampling noise floor. box_chain is the
// infinite convolution of box indicators of widths a/k^s, whose transform is
// an explicit product of sinc factors evaluated in log space to any depth;
// deep-magnitude work uses it exclusively.
#pragma once

#include <memory>
#include <vector>

#include "gevlab/grids.hpp"

namespace gevlab {

struct BoxChain {
    double a;
    double s;
    double zeta;   // sum_k k^{-s}; the support half width is a*zeta
    double c_env;  // measured envelope constant: log|hat1(xi)| ~ -c_env*xi^{1/s}

    // Exact transform of the 1-d chain: prod_k sinc(a xi / k^s), in log space.
    LogComplex hat1(double xi) const;
    double support_half() const { return a * zeta; }
};

std::shared_ptr<const BoxChain> make_box_chain(double a, double s);

struct GevreyFunction {
    SampledField field;  // real samples, d in {1, 2}
    double order_s = 2.0;
    double support_radius = 0.0;
    bool has_decay_constants = false;
    double decay_A = 0.0;
    double decay_C = 0.0;
    // Set when the function is a box chain (tensor product across axes for
    // d = 2); enables exact transform values far below the quadrature floor.
    std::shared_ptr<const BoxChain> chain;

    int dims() const { return field.grid.dims; }
};

struct DecayFit {
    double exponent = 0.0;        // fitted 1/s estimate (or -p for t^{-p} laws)
    double log_prefactor = 0.0;
    double c = 0.0;               // fitted stretch constant, positive for real decay
    double rms_residual = 0.0;
    double window_min = 0.0;
    double window_max = 0.0;
    bool out_of_family = false;   // decay faster than any Gevrey order (e.g. Gaussian)
};

GevreyFunction gevrey_bump(double s, double radius, const Grid& grid);
GevreyFunction box_chain_function(double a, double s, const Grid& grid);

// Closed-form bump profile and derivatives, shared with weight deformations.
// All take the squared radius argument r2 = |x|^2 and return 0 beyond support.
double bump_value(double s, double radius, double r2);
// d=2 value, gradient, and Hessian (h11, h12, h22) at (x1, x2).
void bump_derivs(double s, double radius, double x1, double x2, double* b,
                 double grad[2], double hess[3]);

// Fits log|u_hat| ~ log_prefactor - c*|xi|^exponent over the window where
// |u_hat| is between 1e-250 and 1e-2 of its peak (clamped above the quadrature
// noise floor for sampled inputs). A Gevrey-s input yields exponent near 1/s.
DecayFit fourier_decay_fit(const GevreyFunction& u, double xi_max);

struct GrowthProbe {
    bool found = false;
    double A = 0.0;
    double C = 0.0;
    int first_violation_k = -1;
    bool noise_limited = false;
};

// Measures sup|d^k u| by frequency-space differentiation for k <= k_max and
// searches a fixed (A, C) lattice for the smallest pair with
// sup|d^k u| <= A C^k (k!)^s. s_probe overrides u.order_s when positive.
GrowthProbe derivative_growth_probe(const GevreyFunction& u, int k_max,
                                    double s_probe = 0.0);

}  // namespace gevlab
