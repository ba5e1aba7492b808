#include <catch2/catch_amalgamated.hpp>

#include <gradstrat/proj_geom.hpp>
#include <gradstrat/strata.hpp>

#include "oracles.hpp"

using namespace gradstrat;

namespace {
const cplx I(0.0, 1.0);

MatC diag2(double a, double b) {
    MatC m = MatC::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

ProjPoint random_point(const Group& G, std::uint64_t idx, bool real = false) {
    auto rng = stream(0xabcdULL, "pg-point", idx);
    return make_point(real ? random_unit_real(rng, G.n()) : random_unit_complex(rng, G.n()));
}

VecC random_tangent(const ProjPoint& x, Space space, std::uint64_t idx) {
    auto rng = stream(0x7a26ULL, "pg-tangent", idx);
    auto frame = tangent_frame(x, space);
    VecR c = random_gaussian(rng, static_cast<int>(frame.size()));
    VecC v = VecC::Zero(x.rep.size());
    for (size_t j = 0; j < frame.size(); ++j) v += c[static_cast<Eigen::Index>(j)] * frame[j];
    return v;
}
} // namespace

TEST_CASE("ProjPoint representatives are unit and equality is projective") {
    ProjPoint a = make_point({cplx(3, 0), cplx(4, 0)});
    CHECK(std::abs(a.rep.norm() - 1.0) < 1e-14);
    ProjPoint b = make_point({cplx(0, 3), cplx(0, 4)}); // same line, rotated phase
    CHECK(same_point(a, b));
    CHECK(a.real_flag);
    ProjPoint c = make_point({cplx(1, 0), cplx(0, 1)});
    CHECK_FALSE(c.real_flag);
    CHECK_FALSE(same_point(a, c));
    CHECK_THROWS_AS(make_point({cplx(0, 0), cplx(0, 0)}), std::invalid_argument);
}

TEST_CASE("group action on P(V)") {
    Group G(make_sl_real(2));
    ProjPoint x = random_point(G, 1);
    SECTION("identity") { CHECK(same_point(act(MatC::Identity(2, 2), x), x)); }
    SECTION("eigenline is fixed") {
        MatC g = diag2(std::exp(1.0), std::exp(-1.0));
        ProjPoint e1 = make_point({cplx(1, 0), cplx(0, 0)});
        CHECK(same_point(act(g, e1), e1));
    }
    SECTION("action property") {
        auto rng = stream(5, "act");
        MatC g = expm_herm(from_coords(random_gaussian(rng, G.dim_p()), G.p_frame()));
        MatC h = expm_skew(from_coords(random_gaussian(rng, G.dim_k()), G.k_frame()));
        CHECK(same_point(act(g * h, x), act(g, act(h, x))));
    }
    SECTION("singular g rejected") { CHECK_THROWS_AS(act(MatC::Zero(2, 2), x), std::invalid_argument); }
    SECTION("exp(t beta) matches ODE integration of beta_X") {
        auto rng = stream(6, "act-ode");
        MatC beta = from_coords(random_gaussian(rng, G.dim_p()), G.p_frame());
        double t = 0.8;
        ProjPoint via_exp = act(expm_herm(t * beta), x);
        ProjPoint via_ode = oracles::integrate_field_rk4(G, beta, x, t, 4000);
        CHECK(chordal_distance(via_exp, via_ode) < 1e-8);
    }
}

TEST_CASE("moment map values") {
    Group G(make_sl_complex(2));
    SECTION("paper formula on an eigenline") {
        MatC xi = I * diag2(1, -1);
        CHECK(eval_moment(G, xi, make_point({cplx(1, 0), cplx(0, 0)})) ==
              Catch::Approx(1.0).margin(1e-14));
    }
    SECTION("eigenvector of xi with eigenvalue i*lambda gives lambda") {
        auto rng = stream(8, "moment");
        MatC H = from_coords(random_gaussian(rng, G.dim_p()), G.p_frame());
        MatC xi = I * H; // anti-selfadjoint with eigenvalues i*spec(H)
        Eigen::SelfAdjointEigenSolver<MatC> es(H);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            ProjPoint x = make_point(VecC(es.eigenvectors().col(k)));
            CHECK(eval_moment(G, xi, x) == Catch::Approx(es.eigenvalues()[k]).margin(1e-10));
        }
    }
    SECTION("non-anti-selfadjoint xi rejected") {
        CHECK_THROWS_AS(eval_moment(G, diag2(1, -1), random_point(G, 2)), std::invalid_argument);
    }
    SECTION("derivative against finite differences") {
        ProjPoint x = random_point(G, 3);
        auto rng = stream(9, "moment-fd");
        MatC xi = I * from_coords(random_gaussian(rng, G.dim_p()), G.p_frame());
        VecC v = random_tangent(x, Space::ComplexProjective, 1);
        double fd = oracles::fd_directional(
            [&](const ProjPoint& p) { return eval_moment(G, xi, p); }, x, v);
        // d mu^{i beta} = d mu_p^beta = riem(beta_X, .)
        double analytic = riem(vector_field(G, MatC(-I * xi), x), v);
        CHECK(fd == Catch::Approx(analytic).margin(1e-6 * (1.0 + std::abs(analytic))));
    }
}

TEST_CASE("gradient map on the sl2r preset") {
    Group G(make_sl_real(2));
    SECTION("[1:i] lies in the zero fiber") {
        GradientMapEval e = eval_gradient_map(G, make_point({cplx(1, 0), cplx(0, 1)}));
        CHECK(tnorm(e.mu_p) < 1e-14);
        CHECK(e.eta < 1e-14);
        CHECK(e.grad_eta_norm < 1e-12);
    }
    SECTION("[1:0] is critical with mu_p = diag(1,-1)/2") {
        GradientMapEval e = eval_gradient_map(G, make_point({cplx(1, 0), cplx(0, 0)}));
        CHECK((e.mu_p - 0.5 * diag2(1, -1)).norm() < 1e-14);
        CHECK(tnorm(e.mu_p) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-14));
        CHECK(e.eta == Catch::Approx(0.25).margin(1e-14));
        CHECK(e.grad_eta_norm < criticality_tol(e));
    }
    SECTION("defining pairing holds to machine precision") {
        for (int i = 0; i < 5; ++i) {
            ProjPoint x = random_point(G, 10 + static_cast<std::uint64_t>(i));
            GradientMapEval e = eval_gradient_map(G, x);
            for (const auto& beta : G.p_frame()) {
                double lhs = tform(e.mu_p, beta);
                CHECK(std::abs(lhs - mu_pairing(G, beta, x)) < 1e-12);
                CHECK(std::abs(lhs - eval_moment(G, MatC(I * beta), x)) < 1e-12);
            }
        }
    }
}

TEST_CASE("vector field and the gradient identity") {
    for (const char* name : {"sl2r", "sl3r", "sl2c"}) {
        Group G(*preset_by_name(name));
        DYNAMIC_SECTION("preset " << name) {
            auto rng = stream(12, name);
            MatC beta = from_coords(random_gaussian(rng, G.dim_p()), G.p_frame());

            SECTION("eigenline of beta is a zero") {
                Eigen::SelfAdjointEigenSolver<MatC> es(beta);
                ProjPoint x = make_point(VecC(es.eigenvectors().col(0)));
                CHECK(riem_norm(vector_field(G, beta, x)) < 1e-10);
            }
            SECTION("one-sided difference quotient approaches |beta_X|^2") {
                ProjPoint x = random_point(G, 20);
                double n2 = riem(vector_field(G, beta, x), vector_field(G, beta, x));
                double h = 1e-6;
                ProjPoint xh = act(expm_herm(h * beta), x);
                double dq = (mu_pairing(G, beta, xh) - mu_pairing(G, beta, x)) / h;
                CHECK(dq == Catch::Approx(n2).epsilon(1e-4));
            }
            SECTION("grad eta norm equals the field norm of mu_p") {
                ProjPoint x = random_point(G, 21);
                GradientMapEval e = eval_gradient_map(G, x);
                CHECK(e.grad_eta_norm ==
                      Catch::Approx(riem_norm(vector_field(G, e.mu_p, x))).margin(1e-15));
            }
            SECTION("monotonicity of t -> mu_p^beta(exp(t beta) x)") {
                ProjPoint x = random_point(G, 22);
                if (riem_norm(vector_field(G, beta, x)) > 1e-6) {
                    double prev = -std::numeric_limits<double>::infinity();
                    for (int k = 0; k <= 100; ++k) {
                        double t = -2.0 + 4.0 * k / 100.0;
                        double v = mu_pairing(G, beta, act(expm_herm(t * beta), x));
                        CHECK(v > prev);
                        prev = v;
                    }
                }
            }
        }
    }
}

TEST_CASE("equivariance of the gradient map under K") {
    for (const char* name : {"sl2r", "sl3r", "sl2c"}) {
        Group G(*preset_by_name(name));
        auto rng = stream(13, name);
        for (int t = 0; t < 5; ++t) {
            ProjPoint x = random_point(G, 30 + static_cast<std::uint64_t>(t));
            MatC k = expm_skew(from_coords(random_gaussian(rng, G.dim_k()), G.k_frame()));
            MatC lhs = eval_gradient_map(G, act(k, x)).mu_p;
            MatC rhs = k * eval_gradient_map(G, x).mu_p * k.adjoint();
            INFO(name);
            CHECK((lhs - rhs).norm() < 1e-10);
        }
    }
}

TEST_CASE("kernel of d mu_p is the orthocomplement of p·x") {
    Group G(make_sl_real(3));
    for (int t = 0; t < 4; ++t) {
        ProjPoint x = random_point(G, 40 + static_cast<std::uint64_t>(t));
        auto frame = tangent_frame(x, Space::ComplexProjective);
        const auto d = static_cast<Eigen::Index>(frame.size());
        MatR D(G.dim_p(), d);
        for (Eigen::Index a = 0; a < d; ++a)
            D.col(a) = d_gradient_map_coords(G, x, frame[static_cast<size_t>(a)]);
        Eigen::JacobiSVD<MatR> svd(D, Eigen::ComputeFullV);
        for (Eigen::Index j = 0; j < d; ++j) {
            double sv = j < svd.singularValues().size() ? svd.singularValues()[j] : 0.0;
            if (sv > 1e-9) continue;
            VecC v = VecC::Zero(G.n());
            for (Eigen::Index a = 0; a < d; ++a)
                v += svd.matrixV()(a, j) * frame[static_cast<size_t>(a)];
            for (const auto& beta : G.p_frame())
                CHECK(std::abs(riem(vector_field(G, beta, x), v)) < 1e-6);
        }
    }
}

TEST_CASE("criticality predicates agree") {
    Group G(make_sl_real(2));
    auto predicate_triple = [&](const ProjPoint& x) {
        GradientMapEval e = eval_gradient_map(G, x);
        bool field_zero = riem_norm(vector_field(G, e.mu_p, x)) < 1e-9;
        auto frame = tangent_frame(x, Space::ComplexProjective);
        double dmu = 0.0, deta = 0.0;
        for (const auto& v : frame) {
            dmu = std::max(dmu, std::abs(d_gradient_map_coords(G, x, v).dot(e.mu_coords)));
            deta = std::max(deta, std::abs(riem(vector_field(G, e.mu_p, x), v)));
        }
        return std::tuple{field_zero, dmu < 1e-9, deta < 1e-9};
    };
    auto [a1, a2, a3] = predicate_triple(make_point({cplx(1, 0), cplx(0, 0)}));
    CHECK(a1); CHECK(a2); CHECK(a3);
    auto [b1, b2, b3] = predicate_triple(make_point({cplx(1, 0), cplx(0.5, 0.2)}));
    CHECK_FALSE(b1); CHECK_FALSE(b2); CHECK_FALSE(b3);
}

TEST_CASE("mu_p of a beta-fixed point commutes with beta") {
    Group G(make_sl_real(3));
    MatC beta = MatC::Zero(3, 3);
    beta(0, 0) = 2; beta(1, 1) = -1; beta(2, 2) = -1;
    // points of the projectivized eigenspaces are fixed by beta
    for (auto coeffs : {std::pair{1.0, 0.0}, std::pair{0.3, 0.7}}) {
        VecC z = VecC::Zero(3);
        z[1] = coeffs.first;
        z[2] = coeffs.second;
        ProjPoint x = make_point(z);
        REQUIRE(riem_norm(vector_field(G, beta, x)) < 1e-12);
        MatC mu = eval_gradient_map(G, x).mu_p;
        CHECK(bracket(mu, beta).norm() < 1e-12);
    }
}

TEST_CASE("tangent decomposition at beta-fixed points") {
    Group G(make_sl_real(2));
    MatC beta = diag2(1, -1);
    SECTION("at [1:0] the operator is -2 on the whole tangent space") {
        TangentDecomposition td =
            tangent_decompose(G, beta, make_point({cplx(1, 0), cplx(0, 0)}), Space::ComplexProjective);
        REQUIRE(td.eigenpairs.size() == 1);
        CHECK(td.eigenpairs[0].first == Catch::Approx(-2.0).margin(1e-9));
        CHECK(td.eigenpairs[0].second.size() == 2);
        CHECK(td.nonneg_span.empty());
    }
    SECTION("at [0:1] the eigenvalue is +2") {
        TangentDecomposition td =
            tangent_decompose(G, beta, make_point({cplx(0, 0), cplx(1, 0)}), Space::ComplexProjective);
        REQUIRE(td.eigenpairs.size() == 1);
        CHECK(td.eigenpairs[0].first == Catch::Approx(2.0).margin(1e-9));
        CHECK(td.nonneg_span.size() == 2);
    }
    SECTION("beta = 0 fixes everything with eigenvalue 0") {
        TangentDecomposition td =
            tangent_decompose(G, MatC::Zero(2, 2), random_point(G, 50), Space::ComplexProjective);
        REQUIRE(td.eigenpairs.size() == 1);
        CHECK(td.eigenpairs[0].first == 0.0);
        CHECK(td.nonneg_span.size() == td.frame.size());
    }
    SECTION("non-fixed point rejected with residual in the message") {
        CHECK_THROWS_AS(tangent_decompose(G, beta, random_point(G, 51), Space::ComplexProjective),
                        std::invalid_argument);
    }
    SECTION("eigenvectors are orthonormal in the induced metric") {
        TangentDecomposition td =
            tangent_decompose(G, beta, make_point({cplx(1, 0), cplx(0, 0)}), Space::ComplexProjective);
        std::vector<VecC> all;
        for (const auto& [lam, vecs] : td.eigenpairs)
            all.insert(all.end(), vecs.begin(), vecs.end());
        for (size_t i = 0; i < all.size(); ++i)
            for (size_t j = 0; j < all.size(); ++j)
                CHECK(std::abs(riem(all[i], all[j]) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("Hessian of eta_p") {
    Group G(make_sl_real(2));
    SECTION("positive semidefinite on the zero fiber") {
        HessianForm h = hessian_eta(G, make_point({cplx(1, 0), cplx(0, 1)}), Space::ComplexProjective);
        CHECK(h.eigenvalues.minCoeff() > -1e-10);
    }
    SECTION("eigenvalues {-2, 0} at [1:0]") {
        HessianForm h = hessian_eta(G, make_point({cplx(1, 0), cplx(0, 0)}), Space::ComplexProjective);
        REQUIRE(h.eigenvalues.size() == 2);
        CHECK(h.eigenvalues[0] == Catch::Approx(-2.0).margin(1e-9));
        CHECK(std::abs(h.eigenvalues[1]) < 1e-9);
    }
    SECTION("matches second finite differences along curves") {
        for (auto pt : {make_point({cplx(1, 0), cplx(0, 0)}), make_point({cplx(1, 0), cplx(0, 1)})}) {
            HessianForm h = hessian_eta(G, pt, Space::ComplexProjective);
            for (size_t a = 0; a < h.frame.size(); ++a) {
                double fd = oracles::fd_second(
                    [&](const ProjPoint& p) { return eta_value(G, p); }, pt, h.frame[a]);
                CHECK(fd == Catch::Approx(h.H(static_cast<Eigen::Index>(a),
                                               static_cast<Eigen::Index>(a)))
                                .margin(1e-4));
            }
        }
    }
    SECTION("non-critical point rejected") {
        CHECK_THROWS_AS(hessian_eta(G, make_point({cplx(1, 0), cplx(0.3, 0.1)}),
                                    Space::ComplexProjective),
                        std::invalid_argument);
    }
}

TEST_CASE("finite-difference gradient identity for eta and mu_p^beta") {
    for (const char* name : {"sl2r", "sl3r", "sl2c"}) {
        Group G(*preset_by_name(name));
        auto rng = stream(60, name);
        for (int t = 0; t < 5; ++t) {
            ProjPoint x = random_point(G, 60 + static_cast<std::uint64_t>(t));
            VecC v = random_tangent(x, Space::ComplexProjective,
                                    static_cast<std::uint64_t>(t) + 1);
            MatC beta = from_coords(random_gaussian(rng, G.dim_p()), G.p_frame());
            double fd_mu = oracles::fd_directional(
                [&](const ProjPoint& p) { return mu_pairing(G, beta, p); }, x, v);
            double an_mu = riem(vector_field(G, beta, x), v);
            CHECK(fd_mu == Catch::Approx(an_mu).margin(1e-5 * (1.0 + std::abs(an_mu))));

            double fd_eta = oracles::fd_directional(
                [&](const ProjPoint& p) { return eta_value(G, p); }, x, v);
            GradientMapEval e = eval_gradient_map(G, x);
            double an_eta = riem(vector_field(G, e.mu_p, x), v);
            CHECK(fd_eta == Catch::Approx(an_eta).margin(1e-5 * (1.0 + std::abs(an_eta))));
        }
    }
}

TEST_CASE("real locus tangent frames and fields stay real") {
    Group G(make_sl_real(2));
    ProjPoint x = random_point(G, 70, true);
    REQUIRE(x.real_flag);
    auto frame = tangent_frame(x, Space::RealProjective);
    CHECK(frame.size() == 1);
    for (const auto& v : frame) CHECK(v.imag().norm() == 0.0);
    GradientMapEval e = eval_gradient_map(G, x, Space::RealProjective);
    CHECK(vector_field(G, e.mu_p, x, Space::RealProjective).imag().norm() == 0.0);
    CHECK_THROWS_AS(tangent_frame(make_point({cplx(1, 0), cplx(0, 1)}), Space::RealProjective),
                    std::invalid_argument);
}
