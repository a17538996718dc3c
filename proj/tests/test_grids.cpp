// Grid construction, trapezoid quadrature, Fourier evaluation, and the
// log-space accumulation types.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "gevlab/grids.hpp"

using namespace gevlab;

namespace {

SampledField sample1d(const Grid& g, double (*f)(double)) {
    SampledField out;
    out.grid = g;
    out.values.resize(g.node_count());
    for (int j = 0; j < g.points[0]; ++j) out.values[j] = f(g.coord(0, j));
    return out;
}

}  // namespace

TEST_CASE("make_grid produces endpoint-inclusive uniform nodes") {
    Grid g = make_grid({0.0}, {1.0}, {3});
    CHECK(g.node_count() == 3);
    CHECK(g.coord(0, 0) == doctest::Approx(-1.0));
    CHECK(g.coord(0, 1) == doctest::Approx(0.0));
    CHECK(g.coord(0, 2) == doctest::Approx(1.0));

    Grid g5 = make_grid({0.0}, {1.0}, {5});
    CHECK(g5.spacing[0] == doctest::Approx(0.5));

    Grid g2 = make_grid({0.0, 0.0}, {1.0, 1.0}, {3, 3});
    CHECK(g2.node_count() == 9);
}

TEST_CASE("make_grid rejects malformed requests") {
    CHECK_THROWS_AS(make_grid({0.0, 0.0}, {1.0}, {5}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({0.0}, {1.0}, {2}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({0.0}, {-1.0}, {5}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {3, 3, 3}),
                    std::invalid_argument);
}

TEST_CASE("flatten and unflatten are inverse in row-major order") {
    Grid g = make_grid({0.0, 0.0}, {1.0, 2.0}, {3, 5});
    int idx[2];
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unflatten(f, idx);
        CHECK(g.flatten(idx) == f);
    }
    // Second axis varies fastest.
    idx[0] = 1;
    idx[1] = 2;
    CHECK(g.flatten(idx) == 1 * 5 + 2);
}

TEST_CASE("quad_weight halves endpoints per axis") {
    Grid g = make_grid({0.0, 0.0}, {1.0, 1.0}, {5, 5});
    int corner[2] = {0, 0};
    int interior[2] = {2, 2};
    int edge[2] = {0, 2};
    CHECK(g.quad_weight(corner) == doctest::Approx(0.25 * g.cell()));
    CHECK(g.quad_weight(edge) == doctest::Approx(0.5 * g.cell()));
    CHECK(g.quad_weight(interior) == doctest::Approx(g.cell()));
}

TEST_CASE("quad integrates constants exactly") {
    Grid g = make_grid({0.0}, {1.0}, {7});
    SampledField f;
    f.grid = g;
    f.values.assign(g.node_count(), 1.0);
    CHECK(quad(f).real() == doctest::Approx(2.0));
}

TEST_CASE("quad matches the Gaussian integral") {
    Grid g = make_grid({0.0}, {6.0}, {401});
    SampledField f = sample1d(g, [](double x) { return std::exp(-x * x); });
    CHECK(std::abs(quad(f).real() - std::sqrt(kPi)) < 1e-8);
}

TEST_CASE("quad of an odd integrand vanishes") {
    Grid g = make_grid({0.0}, {6.0}, {401});
    SampledField f =
        sample1d(g, [](double x) { return x * std::exp(-x * x); });
    CHECK(std::abs(quad(f).real()) < 1e-14);
}

TEST_CASE("quad is linear") {
    Grid g = make_grid({0.0}, {3.0}, {101});
    SampledField f = sample1d(g, [](double x) { return std::exp(-x * x); });
    SampledField gg = sample1d(g, [](double x) { return std::cos(x); });
    SampledField mix;
    mix.grid = g;
    mix.values.resize(g.node_count());
    for (std::size_t j = 0; j < g.node_count(); ++j)
        mix.values[j] = 2.5 * f.values[j] - 1.25 * gg.values[j];
    cplx want = 2.5 * quad(f) - 1.25 * quad(gg);
    CHECK(std::abs(quad(mix) - want) < 1e-13);
}

TEST_CASE("quad error drops at least fourfold under refinement") {
    // Second-order convergence on a smooth integrand whose tails have not
    // yet decayed, so the trapezoid error is visible.
    double exact = std::erf(1.5) * std::sqrt(kPi);
    Grid gc = make_grid({0.0}, {1.5}, {9});
    Grid gf = make_grid({0.0}, {1.5}, {17});
    auto gauss = [](double x) { return std::exp(-x * x); };
    double ec = std::abs(quad(sample1d(gc, gauss)).real() - exact);
    double ef = std::abs(quad(sample1d(gf, gauss)).real() - exact);
    CHECK(ef * 4.0 <= ec * 1.01);
}

TEST_CASE("fourier_eval matches the analytic Gaussian transform") {
    Grid g = make_grid({0.0}, {8.0}, {513});
    SampledField f =
        sample1d(g, [](double x) { return std::exp(-0.5 * x * x); });
    cplx got = fourier_eval(f, {1.0});
    double want = std::sqrt(2.0 * kPi) * std::exp(-0.5);
    CHECK(std::abs(got - want) < 1e-8);
}

TEST_CASE("fourier_eval at zero frequency reduces to quad") {
    Grid g = make_grid({0.5}, {4.0}, {129});
    SampledField f =
        sample1d(g, [](double x) { return std::exp(-(x - 0.5) * (x - 0.5)); });
    CHECK(std::abs(fourier_eval(f, {0.0}) - quad(f)) < 1e-14);
}

TEST_CASE("fourier_eval obeys the shift-phase law") {
    double a = 0.7, xi = 1.3;
    Grid g0 = make_grid({0.0}, {8.0}, {513});
    Grid ga = make_grid({a}, {8.0}, {513});
    SampledField u0 =
        sample1d(g0, [](double x) { return std::exp(-0.5 * x * x); });
    SampledField ua;
    ua.grid = ga;
    ua.values.resize(ga.node_count());
    for (int j = 0; j < ga.points[0]; ++j) {
        double x = ga.coord(0, j);
        ua.values[j] = std::exp(-0.5 * (x - a) * (x - a));
    }
    cplx lhs = fourier_eval(ua, {xi});
    cplx rhs = std::exp(cplx(0.0, -a * xi)) * fourier_eval(u0, {xi});
    CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("fourier_eval of a real even field is real") {
    Grid g = make_grid({0.0}, {7.0}, {257});
    SampledField f =
        sample1d(g, [](double x) { return std::cos(x) * std::exp(-x * x); });
    cplx got = fourier_eval(f, {0.8});
    CHECK(std::abs(got.imag()) <= 1e-10 * std::abs(got));
}

TEST_CASE("LogComplex round-trips values and encodes zero") {
    cplx z(-0.3, 1.7);
    LogComplex lz = LogComplex::from(z);
    CHECK(std::abs(lz.to_complex() - z) < 5e-15 * std::abs(z));
    CHECK_FALSE(lz.is_zero());

    LogComplex zero = LogComplex::from(cplx(0.0, 0.0));
    CHECK(zero.is_zero());
    CHECK(zero.to_complex() == cplx(0.0, 0.0));
    CHECK(LogComplex::zero().is_zero());
}

TEST_CASE("LogComplex multiplication adds logs and wraps phases") {
    LogComplex a = LogComplex::from_polar(-2000.0, 3.0);
    LogComplex b = LogComplex::from_polar(-1500.0, 2.5);
    LogComplex p = log_mul(a, b);
    CHECK(p.log_mag == doctest::Approx(-3500.0));
    // 5.5 wraps to 5.5 - 2*pi.
    CHECK(p.phase == doctest::Approx(5.5 - 2.0 * kPi));

    LogComplex q = log_mul(a, cplx(0.0, 2.0));
    CHECK(q.log_mag == doctest::Approx(-2000.0 + std::log(2.0)));
    CHECK(q.phase == doctest::Approx(wrap_phase(3.0 + 0.5 * kPi)));

    LogComplex r = log_scale(a, 123.0);
    CHECK(r.log_mag == doctest::Approx(-1877.0));
    CHECK(r.phase == doctest::Approx(3.0));
}

TEST_CASE("log_sum handles far-underflowed magnitudes") {
    LogComplex t = LogComplex::from_polar(-5000.0, 0.0);
    LogComplex s = log_sum({t, t});
    CHECK(s.log_mag == doctest::Approx(-5000.0 + std::log(2.0)));
    CHECK(s.phase == doctest::Approx(0.0));

    CHECK(log_sum({t}).log_mag == doctest::Approx(-5000.0));

    LogComplex u = LogComplex::from_polar(0.0, 0.0);
    CHECK(log_sum({u, u}).log_mag == doctest::Approx(std::log(2.0)));
}

TEST_CASE("log_sum is permutation-invariant to rounding") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> mag(-60.0, 0.0);
    std::uniform_real_distribution<double> ph(-kPi, kPi);
    std::vector<LogComplex> terms;
    cplx direct = 0.0;
    for (int i = 0; i < 64; ++i) {
        LogComplex t = LogComplex::from_polar(mag(rng), ph(rng));
        terms.push_back(t);
        direct += t.to_complex();
    }
    LogComplex fwd = log_sum(terms);
    std::vector<LogComplex> rev(terms.rbegin(), terms.rend());
    LogComplex bwd = log_sum(rev);
    CHECK(std::abs(fwd.to_complex() - direct) < 1e-12 * std::abs(direct));
    CHECK(std::abs(bwd.to_complex() - direct) < 1e-12 * std::abs(direct));
    CHECK(std::abs(fwd.log_mag - bwd.log_mag) < 1e-12);
}

TEST_CASE("LogAccumulator matches log_sum and scaled insertion") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mag(-40.0, -10.0);
    std::uniform_real_distribution<double> ph(-kPi, kPi);
    std::vector<LogComplex> terms;
    LogAccumulator acc;
    LogAccumulator acc2;
    for (int i = 0; i < 32; ++i) {
        LogComplex t = LogComplex::from_polar(mag(rng), ph(rng));
        terms.push_back(t);
        acc.add(t);
        // Insert the un-shifted value, shifting inside the accumulator.
        LogComplex base = LogComplex::from_polar(t.log_mag - 3.0,
                                                 wrap_phase(t.phase - 1.0));
        acc2.add_scaled(base, 3.0, 1.0);
    }
    LogComplex want = log_sum(terms);
    CHECK(std::abs(acc.result().to_complex() - want.to_complex()) <
          1e-12 * std::abs(want.to_complex()));
    CHECK(std::abs(acc2.result().to_complex() - want.to_complex()) <
          1e-12 * std::abs(want.to_complex()));
}

TEST_CASE("wrap_phase lands in the half-open principal interval") {
    CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(7.0) == doctest::Approx(7.0 - 2.0 * kPi));
    CHECK(wrap_phase(-7.0) == doctest::Approx(2.0 * kPi - 7.0));
    CHECK(wrap_phase(0.0) == 0.0);
}
