#include <catch2/catch_amalgamated.hpp>

#include <gradstrat/candidates.hpp>

#include "oracles.hpp"

using namespace gradstrat;

namespace {
VecR vec2(double a, double b) {
    VecR v(2);
    v << a, b;
    return v;
}
VecR vec3(double a, double b, double c) {
    VecR v(3);
    v << a, b, c;
    return v;
}
} // namespace

TEST_CASE("weights of the sl2r preset on P1(C)") {
    Group G(make_sl_real(2));
    WeightTable t = extract_weights(G);
    REQUIRE(t.weights.size() == 2);
    CHECK((t.weights[0] + t.weights[1]).norm() < 1e-12); // opposite pair
    double c = t.coords[0].norm();
    CHECK(c > 0.0);
    CHECK(c == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12)); // computed, not assumed
    ProjPoint e1 = make_point({cplx(1, 0), cplx(0, 0)});
    ProjPoint e2 = make_point({cplx(0, 0), cplx(1, 0)});
    bool covers = (same_point(t.fixed_points[0], e1) && same_point(t.fixed_points[1], e2)) ||
                  (same_point(t.fixed_points[0], e2) && same_point(t.fixed_points[1], e1));
    CHECK(covers);
    CHECK(t.fixed_residual < 1e-10);
    // mu_a at the fixed point reproduces the stored weight
    for (size_t i = 0; i < t.weights.size(); ++i)
        for (int j = 0; j < G.dim_a(); ++j)
            CHECK(mu_pairing(G, G.a_frame()[static_cast<size_t>(j)], t.fixed_points[i]) ==
                  Catch::Approx(t.coords[i][j]).margin(1e-12));
}

TEST_CASE("weights of the sl3r preset form a triangle with centroid zero") {
    Group G(make_sl_real(3));
    WeightTable t = extract_weights(G);
    REQUIRE(t.weights.size() == 3);
    MatC sum = MatC::Zero(3, 3);
    for (const auto& w : t.weights) sum += w;
    CHECK(sum.norm() < 1e-12);
    for (const auto& c : t.coords)
        CHECK(c.norm() == Catch::Approx(std::sqrt(2.0 / 3.0)).margin(1e-12));
}

TEST_CASE("trivial group has the single weight zero") {
    GroupSpec trivial;
    trivial.name = "trivial";
    trivial.n = 2;
    Group G(trivial);
    WeightTable t = extract_weights(G);
    REQUIRE(t.weights.size() == 1);
    CHECK(t.weights[0].norm() == 0.0);
    CHECK(t.multiplicity[0] == 2);
}

TEST_CASE("real-locus weight tables keep only real eigenlines") {
    Group G(make_sl_real(2));
    WeightTable t = extract_weights(G, Space::RealProjective);
    REQUIRE(t.weights.size() == 2);
    for (const auto& p : t.fixed_points) CHECK(p.real_flag);
}

TEST_CASE("min_norm_point basics") {
    SECTION("symmetric segment") {
        MinNormResult r = min_norm_point({vec2(1, 0), vec2(0, 1)});
        CHECK((r.point - vec2(0.5, 0.5)).norm() < 1e-12);
        CHECK(r.certificate > -1e-10);
    }
    SECTION("projection onto a segment, grid oracle") {
        std::vector<VecR> pts{vec2(2, 1), vec2(1, 2), vec2(3, 3)};
        MinNormResult r = min_norm_point(pts);
        CHECK((r.point - vec2(1.5, 1.5)).norm() < 1e-10);
        CHECK(r.norm == Catch::Approx(oracles::grid_min_norm(pts, 1e-3)).margin(1e-6));
    }
    SECTION("a set containing zero returns zero") {
        MinNormResult r = min_norm_point({vec2(1, 1), vec2(0, 0), vec2(-3, 2)});
        CHECK(r.norm < 1e-14);
    }
    SECTION("singleton returns itself") {
        MinNormResult r = min_norm_point({vec3(1, 2, 2)});
        CHECK(r.norm == Catch::Approx(3.0));
        CHECK(r.support == std::vector<int>{0});
        CHECK(r.coeffs[0] == Catch::Approx(1.0));
    }
    SECTION("empty input rejected") {
        CHECK_THROWS_AS(min_norm_point({}), std::invalid_argument);
    }
}

TEST_CASE("min_norm_point properties over a random battery") {
    auto rng = stream(0x777, "minnorm");
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        int dim = 1 + trial % 3;
        int k = 1 + trial % 4;
        std::vector<VecR> pts;
        for (int i = 0; i < k; ++i) {
            VecR p(dim);
            for (int d = 0; d < dim; ++d) p[d] = g(rng) + 0.3;
            pts.push_back(p);
        }
        MinNormResult r = min_norm_point(pts);
        double scale2 = 0.0;
        for (const auto& p : pts) scale2 = std::max(scale2, p.squaredNorm());

        // variational certificate on every run
        CHECK(r.certificate >= -1e-9 * (1.0 + scale2));
        // convex combination reproduces the point
        VecR combo = VecR::Zero(dim);
        double sum = 0.0;
        for (size_t i = 0; i < r.support.size(); ++i) {
            CHECK(r.coeffs[static_cast<Eigen::Index>(i)] >= -1e-12);
            combo += r.coeffs[static_cast<Eigen::Index>(i)] *
                     pts[static_cast<size_t>(r.support[i])];
            sum += r.coeffs[static_cast<Eigen::Index>(i)];
        }
        CHECK(sum == Catch::Approx(1.0).margin(1e-10));
        CHECK((combo - r.point).norm() < 1e-9);
        // permutation invariance
        std::vector<VecR> rev(pts.rbegin(), pts.rend());
        CHECK(min_norm_point(rev).norm == Catch::Approx(r.norm).margin(1e-10));
        // grid oracle at step 1e-3
        CHECK(std::abs(r.norm - oracles::grid_min_norm(pts, 1e-3)) < 1e-6 * (1.0 + std::sqrt(scale2)));
    }
}

TEST_CASE("hull membership residual") {
    std::vector<VecR> square{vec2(0, 0), vec2(1, 0), vec2(0, 1), vec2(1, 1)};
    CHECK(hull_membership_residual(vec2(0.2, 0.3), square) < 1e-10);
    CHECK(hull_membership_residual(vec2(2, 0.5), square) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("candidate enumeration for sl2r on P1(C)") {
    Group G(make_sl_real(2));
    WeightTable t = extract_weights(G);
    auto cands = enumerate_candidates(G, t);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].norm < 1e-12);                       // 0 from the full pair
    CHECK(cands[1].norm == Catch::Approx(t.coords[0].norm()).margin(1e-12));
    // the nonzero candidate is the chamber representative diag(c, -c)
    Eigen::SelfAdjointEigenSolver<MatC> es(cands[1].beta);
    CHECK(es.eigenvalues()[1] == Catch::Approx(0.5).margin(1e-12));
    // sorted ascending by norm
    CHECK(std::is_sorted(cands.begin(), cands.end(),
                         [](const auto& a, const auto& b) { return a.norm < b.norm; }));
}

TEST_CASE("candidate enumeration for sl3r on P2(C)") {
    Group G(make_sl_real(3));
    WeightTable t = extract_weights(G);
    auto cands = enumerate_candidates(G, t);
    REQUIRE(cands.size() == 3);
    CHECK(cands[0].norm < 1e-12);
    CHECK(cands[1].norm == Catch::Approx(1.0 / std::sqrt(6.0)).margin(1e-10)); // edge midpoints
    CHECK(cands[2].norm == Catch::Approx(std::sqrt(2.0 / 3.0)).margin(1e-10)); // vertices
    for (const auto& c : cands) {
        // witness is a convex combination of the supporting weights
        VecR combo = VecR::Zero(G.dim_a());
        for (size_t i = 0; i < c.support.size(); ++i)
            combo += c.witness[static_cast<Eigen::Index>(i)] *
                     t.coords[static_cast<size_t>(c.support[i])];
        MatC m = from_coords(combo, G.a_frame());
        CHECK((chamber_rep_matrix(G, m) - c.beta).norm() < 1e-9);
    }
}

TEST_CASE("single nonzero weight yields its chamber representative") {
    Group G(make_sl_real(2));
    WeightTable t = extract_weights(G);
    WeightTable single;
    single.weights = {t.weights[0]};
    single.coords = {t.coords[0]};
    single.fixed_points = {t.fixed_points[0]};
    single.multiplicity = {1};
    single.max_norm = t.coords[0].norm();
    auto cands = enumerate_candidates(G, single);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].norm == Catch::Approx(t.coords[0].norm()).margin(1e-12));
}

TEST_CASE("candidate norms are invariant under the restricted Weyl action") {
    Group G(make_sl_real(3));
    WeightTable t = extract_weights(G);
    auto base = enumerate_candidates(G, t);
    // act on the weight table by an entry permutation of the diagonals
    WeightTable permuted = t;
    for (size_t i = 0; i < t.weights.size(); ++i) {
        MatC w = t.weights[i];
        MatC pw = MatC::Zero(3, 3);
        pw(0, 0) = w(2, 2);
        pw(1, 1) = w(0, 0);
        pw(2, 2) = w(1, 1);
        permuted.weights[i] = pw;
        permuted.coords[i] = coords_in(pw, G.a_frame());
    }
    auto moved = enumerate_candidates(G, permuted);
    REQUIRE(moved.size() == base.size());
    for (size_t i = 0; i < base.size(); ++i)
        CHECK(moved[i].norm == Catch::Approx(base[i].norm).margin(1e-10));
}

TEST_CASE("subset budget guard") {
    Group G(make_sl_real(3));
    WeightTable t = extract_weights(G);
    CHECK_THROWS_AS(enumerate_candidates(G, t, -1, 2), candidate_budget_error);
}
