#include "levychaos/lattice.hpp"
#include "levychaos/suites.hpp"

#include <catch_amalgamated.hpp>

using namespace levychaos;

TEST_CASE("domain construction and lookup") {
    const auto d = Domain::uniform(4, 2.0, 1.0);
    CHECK(d.cells() == 4);
    CHECK(d.sigma_total() == Catch::Approx(2.0));
    CHECK(d.locate(0.1) == 0);
    CHECK(d.locate(0.26) == 1);
    CHECK(d.locate(0.999) == 3);
    CHECK(sigma_of(d, CellSet{0, 2}) == Catch::Approx(1.0));
    CHECK_THROWS_AS(Domain::uniform(0), std::invalid_argument);
    CHECK_THROWS_AS(Domain::with_masses({0.5, -0.1}), std::invalid_argument);
}

TEST_CASE("symmetrize") {
    const int C = 3;
    Stream st(1, 0);
    StepKernel f1 = random_kernel(1, C, st);
    CHECK(symmetrize(f1).values == f1.values); // order 1 unchanged

    // chi_{c0} tensor chi_{c1} -> half swap sum
    StepKernel a(1, C), b(1, C);
    a.values[0] = 1.0;
    b.values[1] = 1.0;
    const auto s = symmetrize(tensor(a, b));
    const int i01[] = {0, 1}, i10[] = {1, 0}, i00[] = {0, 0};
    CHECK(s.at(i01) == 0.5);
    CHECK(s.at(i10) == 0.5);
    CHECK(s.at(i00) == 0.0);

    for (int order : {2, 3, 4}) {
        StepKernel f = random_kernel(order, C, st);
        const auto once = symmetrize(f);
        const auto twice = symmetrize(once);
        for (size_t i = 0; i < once.values.size(); ++i)
            CHECK(twice.values[i] == Catch::Approx(once.values[i]).margin(1e-14));
    }
}

TEST_CASE("inner product") {
    const auto d = Domain::with_masses({0.25, 0.5, 0.25});
    StepKernel chi0 = StepKernel::indicator(d, CellSet{0});
    CHECK(inner_product(chi0, chi0, d) == Catch::Approx(0.25));
    StepKernel chi1 = StepKernel::indicator(d, CellSet{1});
    CHECK(inner_product(chi0, chi1, d) == 0.0);

    Stream st(2, 0);
    StepKernel f = random_kernel(2, 3, st), g = random_kernel(2, 3, st);
    double brute = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int idx[] = {i, j};
            brute += f.at(idx) * g.at(idx) * d.sigma_mass[i] * d.sigma_mass[j];
        }
    CHECK(inner_product(f, g, d) == Catch::Approx(brute).epsilon(1e-14));
    CHECK_THROWS_AS(inner_product(f, random_kernel(3, 3, st), d), std::invalid_argument);
}

TEST_CASE("blockwise symmetrize") {
    const int C = 3;
    const auto d = Domain::uniform(C);
    Stream st(3, 0);

    // alpha = (n): full symmetrization
    StepKernel f = random_kernel(3, C, st);
    const int g3[] = {3};
    const auto full = blockwise_symmetrize(f, g3);
    const auto ref = symmetrize(f);
    for (size_t i = 0; i < ref.values.size(); ++i)
        CHECK(full.values[i] == Catch::Approx(ref.values[i]).margin(1e-14));

    // alpha = (2): swap average of a 2-table
    StepKernel f2 = random_kernel(2, C, st);
    const int g2[] = {2};
    const auto sw = blockwise_symmetrize(f2, g2);
    for (int i = 0; i < C; ++i)
        for (int j = 0; j < C; ++j) {
            const int ij[] = {i, j}, ji[] = {j, i};
            CHECK(sw.at(ij) == Catch::Approx(0.5 * (f2.at(ij) + f2.at(ji))).margin(1e-14));
        }

    // order-1 output unchanged for a single block of one slot
    StepKernel f1 = random_kernel(1, C, st);
    const int g1[] = {1};
    CHECK(blockwise_symmetrize(f1, g1).values == f1.values);

    // projection: idempotent and norm-nonincreasing
    StepKernel h = random_kernel(4, C, st);
    const int g22[] = {2, 2};
    const auto once = blockwise_symmetrize(h, g22);
    const auto twice = blockwise_symmetrize(once, g22);
    for (size_t i = 0; i < once.values.size(); ++i)
        CHECK(twice.values[i] == Catch::Approx(once.values[i]).margin(1e-14));
    CHECK(norm_sq(once, d) <= norm_sq(h, d) + 1e-14);

    CHECK_THROWS_AS(blockwise_symmetrize(h, g3), std::invalid_argument);
}

TEST_CASE("symmetrization projections are self-adjoint") {
    const auto d = Domain::with_masses({0.2, 0.5, 0.3});
    Stream st(4, 0);
    for (int order : {2, 3, 4}) {
        StepKernel f = random_kernel(order, 3, st), g = random_kernel(order, 3, st);
        CHECK(inner_product(symmetrize(f), g, d) ==
              Catch::Approx(inner_product(f, symmetrize(g), d)).epsilon(1e-12));
    }
    // blockwise version, alpha = (1,1) on order-2 SLOTS -> groups {1,1}
    StepKernel f = random_kernel(2, 3, st), g = random_kernel(2, 3, st);
    const int g11[] = {1, 1};
    CHECK(inner_product(blockwise_symmetrize(f, g11), g, d) ==
          Catch::Approx(inner_product(f, blockwise_symmetrize(g, g11), d)).epsilon(1e-12));
}

TEST_CASE("kernel algebra helpers") {
    const int C = 3;
    const auto d = Domain::with_masses({0.25, 0.5, 0.25});
    Stream st(5, 0);
    StepKernel phi = random_kernel(1, C, st);
    StepKernel f = random_kernel(2, C, st);

    const auto t = tensor(phi, f);
    const int idx[] = {1, 2, 0};
    const int f20[] = {2, 0};
    CHECK(t.at(idx) == Catch::Approx(phi.values[1] * f.at(f20)));

    const auto m = mult_slot(f, phi, 1);
    const int i12[] = {1, 2};
    CHECK(m.at(i12) == Catch::Approx(f.at(i12) * phi.values[2]));

    const auto c = contract_first(phi, f, d);
    REQUIRE(c.order == 1);
    double ref = 0.0;
    for (int i = 0; i < C; ++i) {
        const int ii[] = {i, 2};
        ref += d.sigma_mass[i] * phi.values[i] * f.at(ii);
    }
    CHECK(c.values[2] == Catch::Approx(ref).epsilon(1e-14));

    StepKernel h = random_kernel(3, C, st);
    const auto mg = merge_first_two(h);
    const int h112[] = {1, 1, 2};
    const int m12[] = {1, 2};
    CHECK(mg.at(m12) == h.at(h112));

    // move_slot: slot 2 of a 3-kernel moved to front
    const auto mv = move_slot(h, 2, 0);
    const int habc[] = {0, 2, 1};
    const int mcab[] = {1, 0, 2};
    CHECK(mv.at(mcab) == h.at(habc));
}
