// Least-squares fitting helpers, a golden-section minimizer, and the seeded
// counter-based random generator used by every randomized test and experiment.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace gevlab {

struct FitLine {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

// Ordinary least squares y ~ slope*x + intercept.
FitLine linfit(const std::vector<double>& x, const std::vector<double>& y);

// Fit y ~ log_prefactor - c * x^power with power scanned over [pow_lo, pow_hi]
// (inner problem linear in (log_prefactor, c), outer 1-d scan plus golden
// refinement of the residual). Negative powers model t^{-p} laws, positive
// powers model xi^{1/s} laws.
struct StretchedFit {
    double power = 0.0;
    double log_prefactor = 0.0;
    double c = 0.0;
    double alg_power = 0.0;  // set by the prefactor-corrected variant only
    double rms = 0.0;
};
StretchedFit fit_stretched(const std::vector<double>& x, const std::vector<double>& y,
                           double pow_lo, double pow_hi);

// Same model extended by an algebraic prefactor:
//   y ~ log_prefactor - alg_power*log(x) - c*x^power.
// Transform envelopes carry x^-beta prefactors that bias the plain stretched
// fit low over truncated windows; absorbing them recovers the exponent.
StretchedFit fit_stretched_alg(const std::vector<double>& x,
                               const std::vector<double>& y, double pow_lo,
                               double pow_hi);

// Golden-section minimum of a unimodal function on [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol);

// Counter-based SplitMix64: value i of a stream is a pure function of
// (seed, i), so any h-sweep point can regenerate its own draws.
struct SplitMix64 {
    std::uint64_t seed;
    explicit SplitMix64(std::uint64_t s) : seed(s) {}
    std::uint64_t raw(std::uint64_t i) const;
    // Uniform in [0, 1).
    double uniform(std::uint64_t i) const;
    // Uniform in [a, b).
    double uniform(std::uint64_t i, double a, double b) const;
};

}  // namespace gevlab
