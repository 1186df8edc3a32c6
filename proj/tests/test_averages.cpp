#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lqg/averages.hpp"
#include "lqg/gff.hpp"

using namespace lqg;

TEST_CASE("circle average of a constant is the constant") {
    GridSpec g({-2.0, -2.0}, 0.25, 17, 17);
    Field f(g, 3.25);
    CHECK(circle_average(f, {0.0, 0.0}, 1.0) == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("circle average of a linear field vanishes by symmetry") {
    GridSpec g({-2.0, -2.0}, 0.125, 33, 33);
    Field f = field_from_function(g, [](double x, double) { return x; });
    CHECK(std::abs(circle_average(f, {0.0, 0.0}, 1.0)) < 1e-12);
}

TEST_CASE("circle average of x^2 on the unit circle is 1/2 up to O(spacing^2)") {
    for (double s : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        int n = static_cast<int>(std::lround(4.0 / s)) + 1;
        GridSpec g({-2.0, -2.0}, s, n, n);
        Field f = field_from_function(g, [](double x, double) { return x * x; });
        double got = circle_average(f, {0.0, 0.0}, 1.0);
        CHECK(std::abs(got - 0.5) <= s * s);
    }
}

TEST_CASE("circle average preconditions") {
    GridSpec g({-1.0, -1.0}, 0.25, 9, 9);
    Field f(g, 0.0);
    CHECK_THROWS_AS(circle_average(f, {0.0, 0.0}, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(circle_average(f, {0.5, 0.0}, 0.75), std::invalid_argument);
}

TEST_CASE("smoothed average reproduces constants exactly") {
    GridSpec g({-2.0, -2.0}, 0.25, 17, 17);
    Field f(g, -1.75);
    CHECK(smoothed_average(f, BumpKernel::standard(), {0.0, 0.0}, 1.0) ==
          doctest::Approx(-1.75).epsilon(1e-15));
}

TEST_CASE("smoothed average kills odd fields at a vertex center") {
    GridSpec g({-2.0, -2.0}, 0.125, 33, 33);
    Field f = field_from_function(g, [](double x, double) { return x; });
    CHECK(std::abs(smoothed_average(f, BumpKernel::standard(), {0.0, 0.0}, 1.0)) < 1e-13);
}

TEST_CASE("smoothed average: kernel rescale identity on a deterministic field") {
    // h(x/2) tested at radius 2r equals h tested at radius r, up to O(spacing)
    auto smooth = [](double x, double y) { return std::sin(x) + 0.5 * std::cos(2.0 * y); };
    GridSpec g({-4.0, -4.0}, 0.0625, 129, 129);
    Field h = field_from_function(g, smooth);
    Field h_half = field_from_function(g, [&](double x, double y) { return smooth(x / 2, y / 2); });
    BumpKernel k = BumpKernel::standard();
    double a = smoothed_average(h_half, k, {0.0, 0.0}, 2.0);
    double b = smoothed_average(h, k, {0.0, 0.0}, 1.0);
    CHECK(std::abs(a - b) <= g.spacing);
}

TEST_CASE("smoothed average requires the support disk inside the window") {
    GridSpec g({-1.0, -1.0}, 0.25, 9, 9);
    Field f(g, 0.0);
    CHECK_THROWS_AS(smoothed_average(f, BumpKernel::standard(), {0.5, 0.0}, 0.75),
                    std::invalid_argument);
}

TEST_CASE("heat mollification preserves constants and affine fields") {
    GridSpec g({-2.0, -2.0}, 0.0625, 65, 65);
    double eps = 0.25;

    Field c(g, 2.5);
    Field mc = heat_mollify(c, eps);
    GridSpec valid = mc.valid_window();
    for (int j = 0; j < valid.ny; ++j)
        for (int i = 0; i < valid.nx; ++i) {
            Complex z = valid.vertex(i, j);
            CHECK(mc.at(g.nearest(z)) == doctest::Approx(2.5).epsilon(1e-13));
        }

    Field lin = field_from_function(g, [](double x, double) { return x; });
    Field ml = heat_mollify(lin, eps);
    valid = ml.valid_window();
    for (int j = 0; j < valid.ny; ++j)
        for (int i = 0; i < valid.nx; ++i) {
            Complex z = valid.vertex(i, j);
            CHECK(std::abs(ml.at(g.nearest(z)) - z.real()) < 1e-10);
        }
    CHECK(ml.valid_margin == doctest::Approx(4.0 * eps));
}

TEST_CASE("heat kernel point response decays by e^{-1} at distance epsilon") {
    GridSpec g({-4.0, -4.0}, 0.0625, 129, 129);
    double eps = 8.0 * g.spacing;  // spike-to-probe distance lands on a vertex
    Field f(g, 0.0);
    int center = g.nearest({0.0, 0.0});
    f.values[static_cast<size_t>(center)] = 1.0;
    Field m = heat_mollify(f, eps);
    double at_spike = m.at(center);
    double at_eps = m.at(g.nearest({eps, 0.0}));
    CHECK(at_eps / at_spike == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("heat mollification rejects epsilon below the mesh") {
    GridSpec g({-1.0, -1.0}, 0.25, 9, 9);
    Field f(g, 0.0);
    CHECK_THROWS_AS(heat_mollify(f, 0.1), std::invalid_argument);
}

TEST_CASE("mollification commutes with constant shifts to machine precision") {
    GridSpec g({-2.0, -2.0}, 0.125, 33, 33);
    SamplerKind kind;
    kind.normalization = Normalization::mean_zero;
    Field h = sample_whole_plane_proxy(g, kind, 21);
    Field a = heat_mollify(add_constant(h, 1.5), 0.375);
    Field b = add_constant(heat_mollify(h, 0.375), 1.5);
    GridSpec valid = a.valid_window();
    for (int j = 0; j < valid.ny; ++j)
        for (int i = 0; i < valid.nx; ++i) {
            int idx = g.nearest(valid.vertex(i, j));
            CHECK(a.at(idx) == doctest::Approx(b.at(idx)).epsilon(1e-12));
        }
}
