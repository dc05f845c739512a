#include "levychaos/jacobi.hpp"
#include "levychaos/suites.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace levychaos;

TEST_CASE("creation operator") {
    const auto d = Domain::with_masses({0.25, 0.75});
    StepKernel vac(0, 2);
    vac.values[0] = 1.0;
    StepKernel phi = StepKernel::indicator(d, CellSet{0});
    const auto c = create(phi, vac);
    REQUIRE(c.order == 1);
    CHECK(c.values == std::vector<double>{1.0, 0.0});

    StepKernel chi2 = StepKernel::indicator(d, CellSet{1});
    const auto s = create(phi, chi2);
    const int i01[] = {0, 1}, i10[] = {1, 0}, i11[] = {1, 1};
    CHECK(s.at(i01) == 0.5);
    CHECK(s.at(i10) == 0.5);
    CHECK(s.at(i11) == 0.0);

    // bilinearity on random kernels
    Stream st(1, 0);
    StepKernel f = random_kernel(2, 2, st), g = random_kernel(2, 2, st);
    StepKernel p1 = random_kernel(1, 2, st), p2 = random_kernel(1, 2, st);
    auto lhs = create(p1, f + g);
    auto rhs = create(p1, f) + create(p1, g);
    for (size_t i = 0; i < lhs.values.size(); ++i)
        CHECK(lhs.values[i] == Catch::Approx(rhs.values[i]).margin(1e-14));
    auto lhs2 = create(p1 + p2, f);
    auto rhs2 = create(p1, f) + create(p2, f);
    for (size_t i = 0; i < lhs2.values.size(); ++i)
        CHECK(lhs2.values[i] == Catch::Approx(rhs2.values[i]).margin(1e-14));
}

TEST_CASE("neutral operator") {
    const auto d = Domain::uniform(2);
    StepKernel phi = StepKernel::indicator(d, CellSet{0});
    CHECK(neutral(phi, phi).values == std::vector<double>{1.0, 0.0}); // phi * phi on order 1

    StepKernel vac(0, 2);
    vac.values[0] = 3.0;
    const auto z = neutral(phi, vac);
    CHECK(z.order == 0);
    CHECK(z.values[0] == 0.0);

    Stream st(2, 0);
    StepKernel f = symmetrize(random_kernel(2, 2, st));
    StepKernel one = StepKernel::constant(1, 2, 1.0);
    const auto two_f = neutral(one, f);
    for (size_t i = 0; i < f.values.size(); ++i)
        CHECK(two_f.values[i] == Catch::Approx(2.0 * f.values[i]).margin(1e-14));
}

TEST_CASE("annihilation operators") {
    const auto d = Domain::with_masses({0.25, 0.75});
    StepKernel chi0 = StepKernel::indicator(d, CellSet{0});
    const auto a1 = annihilate1(chi0, chi0, d);
    REQUIRE(a1.order == 0);
    CHECK(a1.values[0] == Catch::Approx(0.25));

    StepKernel chi1 = StepKernel::indicator(d, CellSet{1});
    CHECK(annihilate1(chi0, chi1, d).values[0] == 0.0);
    CHECK_THROWS_AS(annihilate1(chi0, StepKernel(0, 2), d), std::domain_error);

    // n = 2: the factor n is present
    Stream st(3, 0);
    StepKernel f = symmetrize(random_kernel(2, 2, st));
    const auto a = annihilate1(chi0, f, d);
    for (int j = 0; j < 2; ++j) {
        double brute = 0.0;
        for (int c = 0; c < 2; ++c) {
            const int idx[] = {c, j};
            brute += d.sigma_mass[c] * chi0.values[c] * f.at(idx);
        }
        CHECK(a.values[j] == Catch::Approx(2.0 * brute).margin(1e-14));
    }

    // a2-: zero on orders 0,1
    CHECK(annihilate2(chi0, chi0).order == 0);
    CHECK(annihilate2(chi0, chi0).values[0] == 0.0);
    // n=2 diagonal example: f = chi0 x chi0, phi = chi0 -> 2 chi0
    const auto diag = annihilate2(chi0, tensor(chi0, chi0));
    REQUIRE(diag.order == 1);
    CHECK(diag.values[0] == Catch::Approx(2.0));
    CHECK(diag.values[1] == 0.0);
    // off-diagonal kernel dies
    const auto off = annihilate2(chi0, symmetrize(tensor(chi0, chi1)));
    CHECK(off.values[0] == 0.0);
    CHECK(off.values[1] == 0.0);
}

TEST_CASE("jacobi_apply structure") {
    const auto d = Domain::with_masses({0.5, 0.5});
    Stream st(4, 0);
    StepKernel phi = random_kernel(1, 2, st);

    // vacuum -> phi at order 1
    auto v = KernelVector::vacuum(2);
    auto out = jacobi_apply(2.0, phi, v, d, 4);
    REQUIRE(out.comp.count(1) == 1);
    CHECK(out.comp.at(1).values == phi.values);
    CHECK(out.comp.count(0) == 0);

    // lambda = 0: creation + annihilation only
    KernelVector u;
    u.add(1, random_kernel(1, 2, st));
    auto out0 = jacobi_apply(0.0, phi, u, d, 4);
    auto ref = create(phi, u.comp.at(1));
    for (size_t i = 0; i < ref.values.size(); ++i)
        CHECK(out0.comp.at(2).values[i] == Catch::Approx(ref.values[i]).margin(1e-14));
    // neutral term absent: order-1 component would be lambda * phi . f
    CHECK(out0.comp.count(1) == 0);

    CHECK_THROWS_AS(jacobi_apply(1.0, phi, out0, d, 2), resource_error);
}

TEST_CASE("vacuum consistency") {
    const auto d = Domain::with_masses({0.35, 0.4, 0.25});
    {
        // n=1 is an identity by construction
        const auto model = meixner_model(3.0);
        const auto real = make_realization(d, {{2.2, 0.1}});
        Stream st(5, 0);
        StepKernel phi = random_kernel(1, 3, st);
        const auto rep = vacuum_consistency(model, phi, 1, real, d);
        CHECK(rep.residual <= 1e-13 * rep.scale);
    }
    {
        // n=2, single-atom Pascal realization
        const auto model = meixner_model(3.0);
        const double u = model.pascal_step;
        const auto real = make_realization(d, {{u, 0.4}});
        Stream st(6, 0);
        StepKernel phi = random_kernel(1, 3, st);
        const auto rep = vacuum_consistency(model, phi, 2, real, d);
        CHECK(rep.residual <= 1e-10 * rep.scale);
        CHECK(rep.pass);
    }
    {
        // n=3, lambda=2 with small truncation
        const auto model = meixner_model(2.0, 1e-5);
        const auto real = make_realization(d, {{0.8, 0.2}, {1.9, 0.6}}, 1e-5);
        Stream st(7, 0);
        StepKernel phi = random_kernel(1, 3, st);
        const auto rep = vacuum_consistency(model, phi, 3, real, d);
        CHECK(rep.pass);
    }
    {
        // lambda=0 and lambda=2 across n <= 4
        for (double lambda : {0.0, 2.0}) {
            const auto model = meixner_model(lambda);
            const auto real = make_realization(d, {{1.1, 0.15}, {-0.7, 0.5}, {0.4, 0.9}},
                                               model.truncation_eps);
            Stream st(8, 0);
            StepKernel phi = random_kernel(1, 3, st, 0.7);
            for (int n = 1; n <= 4; ++n) {
                const auto rep = vacuum_consistency(model, phi, n, real, d);
                CHECK(rep.pass);
            }
        }
    }
}

TEST_CASE("multiply_first_order: alpha = (1) expansion") {
    // <.,phi> I^{(1)}(chi) = I^{(2)}(chi (x) chi) + I^{(0,1)}(chi) + lambda I^{(1)}(chi) + sigma(D)
    const double lambda = 3.0;
    const auto model = meixner_model(lambda);
    const auto table = from_meixner(lambda, 6);
    const auto d = Domain::with_masses({0.3, 0.7});
    const auto chi = StepKernel::indicator(d, CellSet{0});
    const auto out = multiply_first_order(chi, MultiIndex({1}), chi, model, table, d);

    REQUIRE(out.comp.size() == 4);
    // creation component (2): symmetrized chi x chi = chi x chi
    const auto& c2 = out.comp.at(MultiIndex({2}));
    const int i00[] = {0, 0};
    CHECK(c2.at(i00) == 1.0);
    // neutral up-move (0,1): chi
    CHECK(out.comp.at(MultiIndex({0, 1})).values == std::vector<double>{1.0, 0.0});
    // neutral stay (1): a_0 chi = lambda chi
    CHECK(out.comp.at(MultiIndex({1})).values == std::vector<double>{lambda, 0.0});
    // annihilation (): sigma(D) (||P_1||^2 = 1)
    CHECK(out.comp.at(MultiIndex()).values[0] == Catch::Approx(0.3).epsilon(1e-12));

    // alpha = (): single creation term
    StepKernel one(0, 2);
    one.values[0] = 1.0;
    const auto out0 = multiply_first_order(chi, MultiIndex(), one, model, table, d);
    REQUIRE(out0.comp.size() == 1);
    CHECK(out0.comp.at(MultiIndex({1})).values == chi.values);
}

TEST_CASE("multiply_first_order pathwise identity on Pascal realizations") {
    const double lambda = 3.0;
    const auto model = meixner_model(lambda);
    const auto table = from_meixner(lambda, 8);
    const auto d = Domain::uniform(3, 1.5);
    const double u = model.pascal_step;
    const auto real = make_realization(d, {{u, 0.1}, {2 * u, 0.5}, {u, 0.8}, {4 * u, 0.95}});
    Stream st(9, 0);
    const StepKernel phi = random_kernel(1, 3, st);
    const double lhs1 = ito_integral(real, model, table, MultiIndex({1}), phi, d);

    std::vector<MultiIndex> alphas{MultiIndex(), MultiIndex({1}), MultiIndex({2}),
                                   MultiIndex({0, 1}), MultiIndex({1, 1}), MultiIndex({3}),
                                   MultiIndex({0, 0, 1}), MultiIndex({2, 1})};
    for (const auto& alpha : alphas) {
        StepKernel f = random_kernel(alpha.length(), 3, st);
        f = alpha.length() > 0 ? blockwise_symmetrize(f, alpha_groups(alpha)) : f;
        const double lhs = lhs1 * ito_integral(real, model, table, alpha, f, d);
        const auto expansion = multiply_first_order(phi, alpha, f, model, table, d);
        double rhs = 0.0;
        for (const auto& [beta, g] : expansion.comp)
            rhs += ito_integral(real, model, table, beta, g, d);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-10 * std::max(1.0, std::abs(lhs))));
    }
}

TEST_CASE("multiply_first_order expectation identity") {
    // E[<.,phi> I^alpha(f)] equals the alpha = () output component
    const auto model = meixner_model(3.0);
    const auto table = from_meixner(3.0, 6);
    const auto d = Domain::uniform(3, 2.0);
    Stream st(10, 0);
    const StepKernel phi = random_kernel(1, 3, st);
    const StepKernel f = random_kernel(1, 3, st);
    const auto expansion = multiply_first_order(phi, MultiIndex({1}), f, model, table, d);
    const double expected = expansion.comp.at(MultiIndex()).values[0];
    CHECK(expected == Catch::Approx(model.tilted_mass_trunc * inner_product(phi, f, d)).epsilon(1e-12));

    auto rep = mc_estimate(
        [&](const Realization& r) {
            return ito_integral(r, model, table, MultiIndex({1}), phi, d) *
                   ito_integral(r, model, table, MultiIndex({1}), f, d);
        },
        model, d, 40000, 555, 2, expected);
    CHECK(rep.within(4.0));
}

TEST_CASE("fock inner product weights") {
    const auto table = from_meixner(2.0, 6);
    const auto d = Domain::with_masses({0.5, 0.5});
    Stream st(11, 0);
    KernelVector u, v;
    StepKernel f1 = random_kernel(1, 2, st), g1 = random_kernel(1, 2, st);
    u.add(1, f1);
    v.add(1, g1);
    CHECK(fock_inner(u, v, table, d) ==
          Catch::Approx(wick_inner_product(f1, g1, table, d)).epsilon(1e-13));
    // disjoint orders contribute nothing
    v.comp.clear();
    v.add(2, symmetrize(random_kernel(2, 2, st)));
    CHECK(fock_inner(u, v, table, d) == 0.0);
}
