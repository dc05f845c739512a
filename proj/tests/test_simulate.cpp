#include "levychaos/simulate.hpp"
#include "levychaos/suites.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace levychaos;

TEST_CASE("sampling is deterministic given (seed, substream)") {
    const auto model = meixner_model(2.0);
    const auto d = Domain::uniform(4);
    Stream a(99, 5), b(99, 5);
    const auto r1 = sample_realization(model, d, a);
    const auto r2 = sample_realization(model, d, b);
    CHECK(r1.jumps == r2.jumps);
    CHECK(r1.locs == r2.locs);
    CHECK(r1.cells == r2.cells);
}

TEST_CASE("moments-only model cannot be sampled") {
    const auto m = custom_tilted({1.0, 0.0, 1.0});
    const auto d = Domain::uniform(2);
    Stream st(1, 0);
    CHECK_THROWS_AS(sample_realization(m, d, st), std::invalid_argument);
}

TEST_CASE("atom count matches the truncated levy mass") {
    const auto d = Domain::uniform(4, 1.0);
    {
        const auto model = meixner_model(3.0);
        auto rep = mc_estimate([](const Realization& r) { return double(r.count()); }, model, d,
                               20000, 12345, 2, -std::log1p(-model.pascal_p));
        CHECK(rep.within(4.0));
    }
    {
        const auto model = meixner_model(2.0, 1.0);
        auto rep = mc_estimate([](const Realization& r) { return double(r.count()); }, model, d,
                               20000, 999, 2, 0.21938393439552026);
        CHECK(rep.within(4.0));
    }
}

TEST_CASE("pascal jumps land on the lattice and locations are distinct") {
    const auto model = meixner_model(3.0);
    const auto d = Domain::uniform(4, 20.0);
    Stream st(4, 17);
    const auto r = sample_realization(model, d, st);
    REQUIRE(r.count() >= 2);
    for (double s : r.jumps) {
        const double k = s / model.pascal_step;
        CHECK(k == Catch::Approx(std::round(k)).margin(1e-12));
    }
    for (size_t i = 0; i < r.count(); ++i)
        for (size_t j = i + 1; j < r.count(); ++j) CHECK(r.locs[i] != r.locs[j]);
}

TEST_CASE("teugels_measure pathwise examples") {
    const auto model = meixner_model(3.0);
    const auto table = from_meixner(3.0, 6);
    const auto d = Domain::uniform(2, 1.0); // cells [0,.5), [.5,1)
    const auto real = make_realization(d, {{2.0, 0.3}, {1.0, 0.7}});
    // m=2 compensator for any Meixner family member is sigma(D): nu~ mass 1
    const double v = teugels_measure(real, model, table, 2, CellSet{0}, d);
    CHECK(v == Catch::Approx(4.0 - 0.5 * 1.0).epsilon(1e-13));

    const Realization empty = make_realization(d, {});
    for (int m = 1; m <= 4; ++m)
        CHECK(teugels_measure(empty, model, table, m, CellSet{0, 1}, d) ==
              Catch::Approx(-monomial_trunc_integral(model, m)).epsilon(1e-13));
}

TEST_CASE("ortho_measure equals the teugels combination exactly") {
    const auto model = meixner_model(3.0);
    const auto table = from_meixner(3.0, 6);
    const auto d = Domain::uniform(4, 3.0);
    Stream st(21, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const auto real = sample_realization(model, d, st);
        const CellSet delta{0, 2};
        for (int m = 1; m <= 5; ++m) {
            double combo = 0.0;
            for (int j = 1; j <= m; ++j)
                combo += table.p_coeffs[m - 1][j] * teugels_measure(real, model, table, j, delta, d);
            const double y = ortho_measure(real, model, table, m, delta, d);
            CHECK(y == Catch::Approx(combo).margin(1e-10 * (1.0 + std::abs(y))));
        }
    }
}

TEST_CASE("pathwise Y^(2) = X^(2) - lambda X^(1)") {
    const auto model = meixner_model(2.0);
    const auto table = from_meixner(2.0, 4);
    const auto d = Domain::uniform(2);
    const auto real = make_realization(d, {{0.9, 0.2}, {1.7, 0.8}, {0.3, 0.4}},
                                       model.truncation_eps);
    const CellSet delta{0};
    const double lhs = ortho_measure(real, model, table, 2, delta, d);
    const double rhs = teugels_measure(real, model, table, 2, delta, d) -
                       2.0 * teugels_measure(real, model, table, 1, delta, d);
    CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
}

TEST_CASE("ito_integral basics") {
    const auto model = meixner_model(3.0);
    const auto table = from_meixner(3.0, 6);
    const auto d = Domain::uniform(4, 2.0);
    Stream st(31, 2);
    const auto real = sample_realization(model, d, st);

    // alpha = (1), f = chi_D equals the orthogonalized measure
    const CellSet delta{1, 3};
    const auto chi = StepKernel::indicator(d, delta);
    CHECK(ito_integral(real, model, table, MultiIndex({1}), chi, d) ==
          Catch::Approx(ortho_measure(real, model, table, 1, delta, d)).margin(1e-12));

    // alpha = (0), order-0 kernel: the constant itself
    StepKernel c0(0, d.cells());
    c0.values[0] = 2.5;
    CHECK(ito_integral(real, model, table, MultiIndex(), c0, d) == 2.5);

    // disjoint product rule: alpha = (1,1) on chi_{D1} x chi_{D2}
    const CellSet d1{0}, d2{2};
    const auto f = tensor(StepKernel::indicator(d, d1), StepKernel::indicator(d, d2));
    const double lhs = ito_integral(real, model, table, MultiIndex({1, 1}), f, d);
    const double rhs = ortho_measure(real, model, table, 1, d1, d) *
                       ortho_measure(real, model, table, 2, d2, d);
    CHECK(lhs == Catch::Approx(rhs).margin(1e-11 * (1.0 + std::abs(rhs))));

    // empty realization, alpha = (2): pure compensator term
    const Realization empty = make_realization(d, {});
    const auto f2 = tensor(chi, chi);
    const double comp1 = compensator(model, table, 1);
    CHECK(ito_integral(empty, model, table, MultiIndex({2}), f2, d) ==
          Catch::Approx(comp1 * comp1 * sigma_of(d, delta) * sigma_of(d, delta)).margin(1e-12));

    CHECK_THROWS_AS(ito_integral(real, model, table, MultiIndex({1}), f2, d),
                    std::invalid_argument);
    CHECK_THROWS_AS(ito_integral(real, model, table, MultiIndex({6}),
                                 StepKernel(6, d.cells()), d),
                    resource_error);
}

TEST_CASE("ito_integral matches a direct inclusion-exclusion oracle") {
    // brute-force reimplementation with explicit tuple loops, m = 2, C small
    const auto model = meixner_model(3.0);
    const auto table = from_meixner(3.0, 6);
    const auto d = Domain::with_masses({0.5, 0.3, 0.2});
    const auto real = make_realization(d, {{2.2, 0.1}, {4.47, 0.5}, {2.2, 0.9}});
    Stream st(7, 7);
    const MultiIndex alpha({0, 1, 1}); // P_2, P_3 slots? weight 5 length 2
    StepKernel f = random_kernel(2, d.cells(), st);

    const double c2 = compensator(model, table, 2), c3 = compensator(model, table, 3);
    double brute = 0.0;
    // J = {both}: ordered distinct pairs
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) {
            if (i == j) continue;
            const int idx[] = {real.cells[i], real.cells[j]};
            brute += table.eval_p(2, real.jumps[i]) * table.eval_p(3, real.jumps[j]) * f.at(idx);
        }
    // J = {first}: second slot integrated
    for (size_t i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) {
            const int idx[] = {real.cells[i], c};
            brute -= table.eval_p(2, real.jumps[i]) * c3 * d.sigma_mass[c] * f.at(idx);
        }
    // J = {second}
    for (size_t j = 0; j < 3; ++j)
        for (int c = 0; c < 3; ++c) {
            const int idx[] = {c, real.cells[j]};
            brute -= c2 * table.eval_p(3, real.jumps[j]) * d.sigma_mass[c] * f.at(idx);
        }
    // J = {}
    for (int c1 = 0; c1 < 3; ++c1)
        for (int c2i = 0; c2i < 3; ++c2i) {
            const int idx[] = {c1, c2i};
            brute += c2 * c3 * d.sigma_mass[c1] * d.sigma_mass[c2i] * f.at(idx);
        }
    CHECK(ito_integral(real, model, table, alpha, f, d) ==
          Catch::Approx(brute).epsilon(1e-12));
}

TEST_CASE("mc_estimate contract") {
    const auto model = meixner_model(3.0);
    const auto d = Domain::uniform(4);
    auto rep = mc_estimate([](const Realization&) { return 3.25; }, model, d, 100, 5, 1);
    CHECK(rep.estimate == 3.25);
    CHECK(rep.std_error == 0.0);
    CHECK_THROWS_AS(mc_estimate([](const Realization&) { return 0.0; }, model, d, 1, 5, 1),
                    std::invalid_argument);

    // worker-count independence, bit for bit
    const auto f = [](const Realization& r) {
        double acc = 0.0;
        for (double s : r.jumps) acc += s * s;
        return acc;
    };
    auto r1 = mc_estimate(f, model, d, 5000, 77, 1);
    auto r2 = mc_estimate(f, model, d, 5000, 77, 2);
    auto r8 = mc_estimate(f, model, d, 5000, 77, 8);
    CHECK(r1.estimate == r2.estimate);
    CHECK(r1.estimate == r8.estimate);
    CHECK(r1.std_error == r8.std_error);
}

TEST_CASE("centered first-order integrals have mean zero and isometric variance") {
    const auto model = meixner_model(3.0);
    const auto table = from_meixner(3.0, 4);
    const auto d = Domain::uniform(4, 4.0);
    const CellSet delta{0, 1};
    auto stats = mc_samples(
        [&](const Realization& r, std::vector<double>& row) {
            row[0] = ortho_measure(r, model, table, 1, delta, d);
            row[1] = ortho_measure(r, model, table, 2, delta, d);
        },
        2, model, d, 40000, 4242, 2);
    auto mean1 = detail::reduce_mean(stats[0], 0.0);
    CHECK(mean1.within(4.0));
    std::vector<double> sq(stats[0].size()), cross(stats[0].size());
    for (size_t i = 0; i < sq.size(); ++i) {
        sq[i] = stats[0][i] * stats[0][i];
        cross[i] = stats[0][i] * stats[1][i];
    }
    // E[Y^(1)(D)^2] = sigma(D) ||P_1||^2 = sigma(D)
    auto var1 = detail::reduce_mean(sq, sigma_of(d, delta));
    CHECK(var1.within(4.0));
    // E[Y^(1) Y^(2)] = 0
    auto c12 = detail::reduce_mean(cross, 0.0);
    CHECK(c12.within(4.0));
}

TEST_CASE("marginal samples") {
    {
        const auto model = meixner_model(2.0);
        auto s = marginal_samples(model, 1.0, 30000, 11, 2);
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= s.size();
        CHECK(mean == Catch::Approx(1.0).margin(0.03)); // Exp(1) mean, small truncation bias
    }
    {
        const auto model = meixner_model(3.0);
        auto s = marginal_samples(model, 1.0, 5000, 13, 1);
        for (double v : s) {
            const double k = v / model.pascal_step;
            CHECK(k == Catch::Approx(std::round(k)).margin(1e-12));
        }
    }
    {
        const auto model = meixner_model(0.0);
        auto s = marginal_samples(model, 1.0, 30000, 17, 2);
        double mean = 0.0, var = 0.0;
        for (double v : s) mean += v;
        mean /= s.size();
        for (double v : s) var += (v - mean) * (v - mean);
        var /= (s.size() - 1);
        CHECK(mean == Catch::Approx(0.0).margin(4.0 * std::sqrt(var / s.size())));
    }
}

TEST_CASE("realization csv is reproducible") {
    const auto model = meixner_model(3.0);
    const auto d = Domain::uniform(2, 10.0);
    CHECK(realizations_csv(model, d, 50, 3) == realizations_csv(model, d, 50, 3));
    CHECK(realizations_csv(model, d, 50, 3) != realizations_csv(model, d, 50, 4));
}
