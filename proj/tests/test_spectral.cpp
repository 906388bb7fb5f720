#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "stratlab/cutoffs.hpp"
#include "stratlab/lab.hpp"
#include "stratlab/spectral.hpp"
#include "stratlab/stepping.hpp"

using namespace stratlab;

namespace {

struct Fixture {
    GridPtr grid;
    LinearOperator op;
    DecompositionPtr dec;
};

const Fixture& h1(int m) {
    static std::map<int, Fixture> cache;
    auto it = cache.find(m);
    if (it == cache.end()) {
        Fixture fx;
        fx.grid = make_grid(heisenberg(), {2, 2, 2}, {m, m, m});
        fx.op = sublaplacian(*fx.grid);
        fx.dec = std::make_shared<const SpectralDecomposition>(eigendecompose(fx.grid, fx.op));
        it = cache.emplace(m, std::move(fx)).first;
    }
    return it->second;
}

GridFunction bump(const GridPtr& g, double w = 0.7) {
    return detail::windowed(gaussian_bump(g, w), interior_window(g));
}

GridFunction random_interior(const GridPtr& g, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> n01;
    GridFunction f(g);
    for (auto& v : f.values()) v = n01(eng);
    return f.clip_to_interior();
}

double rel(const GridFunction& a, const GridFunction& b) { return (a - b).max_abs() / std::max(b.max_abs(), 1e-300); }

}  // namespace

// ---- eigendecomposition ----

TEST(Eigendecompose, OneDimensionalLaplacianClosedForm) {
    const auto g = make_grid(euclidean(1), {1.0}, {5});
    const SpectralDecomposition dec = eigendecompose(g, sublaplacian(*g));
    const auto want = oracle::dirichlet_laplacian_eigenvalues(5, g->spacing()[0]);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(dec.eigenvalues()[k], want[static_cast<std::size_t>(k)], 1e-12 * want.back());
}

TEST(Eigendecompose, ZeroOperator) {
    const auto g = make_grid(euclidean(2), {1, 1}, {5, 5});
    LinearOperator z{SparseMatrix(25, 25), true};
    const SpectralDecomposition dec = eigendecompose(g, z);
    EXPECT_EQ(dec.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT(dec.orthogonality_error(), 1e-12);
}

TEST(Eigendecompose, HeisenbergInvariants) {
    const auto& fx = h1(9);
    EXPECT_GE(fx.dec->eigenvalues().minCoeff(), 0.0);
    EXPECT_LT(fx.dec->orthogonality_error(), 1e-8);
    EXPECT_LT(fx.dec->residual(fx.op), 1e-8);
    for (Eigen::Index k = 1; k < fx.dec->size(); ++k) EXPECT_LE(fx.dec->eigenvalues()[k - 1], fx.dec->eigenvalues()[k]);
}

TEST(Eigendecompose, Errors) {
    const auto g = make_grid(euclidean(1), {1.0}, {5});
    LinearOperator a{sublaplacian(*g).matrix, false};
    a.matrix.coeffRef(0, 1) += 1.0;
    EXPECT_THROW(eigendecompose(g, a), InvalidArgument);
    const auto& fx = h1(9);
    try {
        eigendecompose(fx.grid, fx.op, 100);
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_NE(std::string(e.what()).find("heat_stepping"), std::string::npos);
    }
    LinearOperator neg{SparseMatrix(-1.0 * sublaplacian(*g).matrix), true};
    EXPECT_THROW(eigendecompose(g, neg), DomainError);
}

// ---- multipliers ----

TEST(Multiplier, IdentityAndLinear) {
    const auto& fx = h1(9);
    const GridFunction f = random_interior(fx.grid, 1);
    EXPECT_LT(rel(apply_multiplier(*fx.dec, identity_multiplier(), 1.0, f), f), 1e-12);
    const GridFunction df(fx.grid, fx.op.matrix * f.values());
    EXPECT_LT(rel(apply_multiplier(*fx.dec, linear_multiplier(), 1.0, f), df), 1e-10);
}

TEST(Multiplier, HeatMatchesSeriesOracle) {
    const auto g = make_grid(heisenberg(), {2, 2, 2}, {5, 5, 5});
    const LinearOperator op = sublaplacian(*g);
    const SpectralDecomposition dec = eigendecompose(g, op);
    const GridFunction f = random_interior(g, 2);
    for (double t : {0.01, 0.1, 1.0}) {
        const Eigen::VectorXd want = oracle::expm_neg(Eigen::MatrixXd(op.matrix), t) * f.values();
        const GridFunction got = heat(dec, f, t);
        EXPECT_LT((got.values() - want).cwiseAbs().maxCoeff(), 1e-8 * f.max_abs()) << "t=" << t;
    }
}

TEST(Multiplier, AlgebraAndCommutation) {
    const auto& fx = h1(9);
    const GridFunction f = random_interior(fx.grid, 3);
    const CutoffFamily c = build_cutoffs(0.25);
    const Multiplier prod{"prod", [&](double l) { return c.psi(l) * c.m(l); }};
    const GridFunction ab = apply_multiplier(*fx.dec, c.psi, 1.0, apply_multiplier(*fx.dec, c.m, 1.0, f));
    const GridFunction ba = apply_multiplier(*fx.dec, c.m, 1.0, apply_multiplier(*fx.dec, c.psi, 1.0, f));
    const GridFunction direct = apply_multiplier(*fx.dec, prod, 1.0, f);
    EXPECT_LT((ab - direct).max_abs(), 1e-10 * f.max_abs());
    EXPECT_LT((ab - ba).max_abs(), 1e-10 * f.max_abs());
    // linear in f
    const GridFunction h = random_interior(fx.grid, 4);
    const GridFunction lin = apply_multiplier(*fx.dec, c.m, 0.5, f * 2.0 + h);
    const GridFunction sep = apply_multiplier(*fx.dec, c.m, 0.5, f) * 2.0 + apply_multiplier(*fx.dec, c.m, 0.5, h);
    EXPECT_LT((lin - sep).max_abs(), 1e-12 * lin.max_abs());
}

TEST(Multiplier, NonFiniteSymbolNamesLambda) {
    const auto& fx = h1(9);
    const GridFunction f = random_interior(fx.grid, 5);
    const double pole = fx.dec->eigenvalues()[3];
    const Multiplier bad{"inv", [pole](double l) { return 1.0 / (l - pole); }, false};
    try {
        apply_multiplier(*fx.dec, bad, 1.0, f);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("lambda="), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("inv"), std::string::npos);
    }
}

// ---- heat ----

TEST(Heat, ZeroTimeAndErrors) {
    const auto& fx = h1(9);
    const GridFunction f = bump(fx.grid);
    EXPECT_EQ((heat(*fx.dec, f, 0.0) - f).max_abs(), 0.0);
    EXPECT_THROW(heat(*fx.dec, f, -1.0), InvalidArgument);
    EXPECT_THROW(heat_many(*fx.dec, f, {0.1, -0.1}), InvalidArgument);
}

TEST(Heat, SemigroupAndContraction) {
    const auto& fx = h1(9);
    for (std::uint64_t seed : {6, 7}) {
        const GridFunction f = random_interior(fx.grid, seed);
        for (auto [t, s] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {0.5, 0.5}, {1.0, 0.01}}) {
            const GridFunction a = heat(*fx.dec, heat(*fx.dec, f, s), t);
            EXPECT_LT((a - heat(*fx.dec, f, t + s)).max_abs(), 1e-8 * f.max_abs());
        }
        for (double t : {0.01, 0.1, 1.0, 10.0})
            EXPECT_LE(lebesgue_norm(heat(*fx.dec, f, t), 2.0), lebesgue_norm(f, 2.0) * (1.0 + 1e-6));
    }
}

TEST(Heat, MaximumPrincipleOnBumps) {
    const auto& fx = h1(9);
    for (double w : {0.6, 0.9, 1.2}) {
        const GridFunction f = bump(fx.grid, w);
        for (double t : {0.05, 0.2, 1.0, 5.0})
            EXPECT_LE(heat(*fx.dec, f, t).max_abs(), f.max_abs() * (1.0 + 1e-8)) << "w=" << w << " t=" << t;
    }
}

TEST(Heat, ManyMatchesSingle) {
    const auto& fx = h1(9);
    const GridFunction f = bump(fx.grid);
    const std::vector<double> ts{0.01, 0.3, 2.0};
    const Eigen::MatrixXd many = heat_many(*fx.dec, f, ts);
    for (std::size_t i = 0; i < ts.size(); ++i)
        EXPECT_LT((many.col(static_cast<Eigen::Index>(i)) - heat(*fx.dec, f, ts[i]).values()).cwiseAbs().maxCoeff(), 1e-14);
}

// ---- implicit stepping ----

TEST(HeatStepping, AgreesWithSpectralRouteAtSecondOrder) {
    const auto& fx = h1(9);
    const GridFunction f = bump(fx.grid);
    EXPECT_EQ((heat_stepping(fx.op, f, 0.0, 4) - f).max_abs(), 0.0);
    EXPECT_THROW(heat_stepping(fx.op, f, -0.1, 4), InvalidArgument);
    EXPECT_THROW(heat_stepping(fx.op, f, 0.1, 0), InvalidArgument);
    const GridFunction ref = heat(*fx.dec, f, 0.1);
    const double e64 = rel(heat_stepping(fx.op, f, 0.1, 64), ref);
    const double e128 = rel(heat_stepping(fx.op, f, 0.1, 128), ref);
    EXPECT_LT(e64, 1e-4);
    EXPECT_NEAR(e64 / e128, 4.0, 0.5);
}

// ---- fractional powers ----

TEST(FractionalPower, IdentitiesAndRoundTrip) {
    const auto& fx = h1(9);
    const GridFunction f = random_interior(fx.grid, 8);
    EXPECT_EQ((fractional_power(*fx.dec, f, 0.0) - f).max_abs(), 0.0);
    const GridFunction df(fx.grid, fx.op.matrix * f.values());
    EXPECT_LT(rel(fractional_power(*fx.dec, f, 2.0), df), 1e-10);
    const GridFunction back = fractional_power(*fx.dec, fractional_power(*fx.dec, f, 1.0), -1.0);
    EXPECT_LT(rel(back, f), 1e-8);
}

TEST(FractionalPower, NegativePowerRejectsNullComponent) {
    const auto g = make_grid(euclidean(1), {1.0}, {5});
    Eigen::VectorXd lam(5);
    lam << 0.0, 1.0, 2.0, 3.0, 4.0;
    const SpectralDecomposition dec(g, lam, Eigen::MatrixXd::Identity(5, 5));
    GridFunction f(g);
    f.values()[0] = 1.0;
    f.values()[2] = 1.0;
    EXPECT_THROW(fractional_power(dec, f, -1.0), DomainError);
    GridFunction ok(g);
    ok.values()[2] = 1.0;
    EXPECT_NEAR(fractional_power(dec, ok, -1.0)[2], 1.0 / std::sqrt(2.0), 1e-15);
    // positive powers send the null component to 0
    EXPECT_EQ(fractional_power(dec, f, 1.0)[0], 0.0);
}

TEST(FractionalPower, IntegralOracleAgrees) {
    const auto g = make_grid(heisenberg(), {2, 2, 2}, {7, 7, 7});
    const LinearOperator op = sublaplacian(*g);
    const SpectralDecomposition dec = eigendecompose(g, op);
    // band-limited: a mix of the lowest modes
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dec.size());
    for (int k = 0; k < 12; ++k) c[k] = 1.0 / (1.0 + k);
    const GridFunction f(g, dec.synthesize(c));
    for (double s : {0.5, 1.0, 1.5}) {
        const GridFunction a = fractional_power(dec, f, s);
        const GridFunction b = fractional_power_integral_oracle(dec, op, f, s);
        EXPECT_LT(rel(b, a), 1e-3) << "s=" << s;
    }
    const GridFunction q = dec.eigenvector(20);
    const GridFunction qo = fractional_power_integral_oracle(dec, op, q, 1.0);
    EXPECT_LT(rel(qo, q * std::sqrt(dec.eigenvalues()[20])), 1e-3);
    EXPECT_THROW(fractional_power_integral_oracle(dec, op, f, 2.0), InvalidArgument);
    EXPECT_THROW(fractional_power_integral_oracle(dec, op, f, 0.0), InvalidArgument);
}

TEST(FractionalPower, SmallOrderApproachesIdentity) {
    const auto& fx = h1(9);
    const GridFunction f = bump(fx.grid);
    double prev = 1e300;
    for (double s : {0.4, 0.1, 0.02, 0.004}) {
        const double d = rel(fractional_power(*fx.dec, f, s), f);
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 0.02);
}

// ---- cutoffs ----

TEST(Cutoffs, PlateausAndPartitionOfUnity) {
    using namespace cutoff;
    EXPECT_EQ(theta0(0.25), 1.0);
    EXPECT_EQ(theta0(0.5), 1.0);
    EXPECT_EQ(theta0(2.0), 0.0);
    EXPECT_EQ(theta0(1.0), 0.0);
    for (double l : {0.1, 0.75, 3.0}) EXPECT_NEAR(theta0(l) + theta1(l), 1.0, 1e-15);
    EXPECT_EQ(phi(0.2), 1.0);
    EXPECT_EQ(phi(1.0), 0.0);
    EXPECT_GT(phi(0.6), 0.0);
    EXPECT_LT(phi(0.6), 1.0);
    double prev = 1.0;
    for (double l = 0.5; l <= 1.0; l += 0.01) {
        EXPECT_LE(theta0(l), prev);
        prev = theta0(l);
    }
}

TEST(Cutoffs, PsiTelescopes) {
    using namespace cutoff;
    double sum = 0.0;
    for (int j = 0; j <= 40; ++j) sum += psi(std::ldexp(5.0, -j));
    EXPECT_NEAR(sum, theta1(5.0), 1e-12);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (double l : log_grid(1e-3, 1e3, 61)) {
        double acc = 0.0;
        const int jj = 12;
        for (int j = 0; j <= jj; ++j) acc += psi(std::ldexp(l, -j));
        EXPECT_NEAR(acc, theta1(l) - theta1(std::ldexp(l, -jj - 1)), 1e-12) << "lambda=" << l;
    }
}

TEST(Cutoffs, PoincareSplit) {
    for (double s : {0.0, 0.25, 0.5}) {
        const CutoffFamily c = build_cutoffs(s);
        for (double l : log_grid(1e-4, 1e3, 40)) EXPECT_NEAR(c.m0(l) + c.m1(l), c.m(l), 1e-14 * std::max(1.0, c.m(l)));
    }
    const CutoffFamily c = build_cutoffs(0.0);
    for (double l : log_grid(1e-3, 1e3, 40)) EXPECT_NEAR(c.m_a(l) - c.m_b(l), c.m1(l), 1e-14);
    EXPECT_EQ(c.m(0.0), 1.0);
    EXPECT_EQ(build_cutoffs(0.5).m(0.0), 0.0);
    EXPECT_EQ(c.psi_tilde(0.0), 0.0);
    EXPECT_NEAR(c.psi_tilde(1.5), c.psi(1.5) / 1.5, 1e-16);
}

// ---- Littlewood-Paley blocks ----

TEST(LpBlock, BandsAndProjection) {
    const auto& fx = h1(9);
    const GridFunction f = random_interior(fx.grid, 9);
    const GridFunction pf = positive_projection(*fx.dec, f);
    EXPECT_LT((lp_block(*fx.dec, f, 12) - pf).values().norm(), 1e-8 * pf.values().norm());
    const Eigen::Index k = fx.dec->size() / 2;
    const GridFunction q = fx.dec->eigenvector(k);
    ASSERT_GT(fx.dec->eigenvalues()[k], 1.0);
    EXPECT_LT(lp_block(*fx.dec, q, 0).max_abs(), 1e-14);
    const int j = static_cast<int>(std::ceil(std::log2(fx.dec->eigenvalues()[k]) / 2.0)) + 2;
    EXPECT_LT(rel(lp_block(*fx.dec, q, j), q), 1e-12);
    EXPECT_THROW(lp_block(*fx.dec, f, -1), InvalidArgument);
    double prev = 1e300;
    for (int jj = 0; jj <= 8; ++jj) {
        const double e = (lp_block(*fx.dec, f, jj) - pf).values().norm();
        EXPECT_LE(e, prev + 1e-12);
        prev = e;
    }
}

// ---- kernels ----

TEST(Kernel, IdentityAndTransposeSymmetry) {
    const auto& fx = h1(9);
    const GridFunction delta = discrete_delta(fx.grid);
    EXPECT_LT(rel(kernel_of_multiplier(*fx.dec, identity_multiplier(), 1.0), delta), 1e-12);
    EXPECT_NEAR(integrate(delta), 1.0, 1e-15);
    // K(x, 0) = K(0, x): the heat operator is a symmetric matrix.
    const std::size_t o = fx.grid->origin_node();
    for (double t : {0.05, 0.5}) {
        const Eigen::MatrixXd h = oracle::expm_neg(Eigen::MatrixXd(fx.op.matrix), t);
        const Eigen::VectorXd col = h.col(static_cast<Eigen::Index>(o));
        const Eigen::VectorXd row = h.row(static_cast<Eigen::Index>(o)).transpose();
        EXPECT_LT((col - row).cwiseAbs().maxCoeff(), 1e-8 * col.cwiseAbs().maxCoeff());
        const GridFunction k = kernel_of_multiplier(*fx.dec, heat_multiplier(), t);
        EXPECT_LT((k.values() * fx.grid->cell_volume() - col).cwiseAbs().maxCoeff(), 1e-8 * col.cwiseAbs().maxCoeff());
    }
}

TEST(Kernel, EuclideanKernelIsEven) {
    // On R^1 the operator is Toeplitz, so its heat kernel is exactly even.
    const auto g = make_grid(euclidean(1), {2.0}, {17});
    const SpectralDecomposition dec = eigendecompose(g, sublaplacian(*g));
    const GridFunction k = kernel_of_multiplier(dec, heat_multiplier(), 0.1);
    for (std::size_t i = 0; i < g->dof(); ++i) EXPECT_NEAR(k[i], k[g->dof() - 1 - i], 1e-12 * k.max_abs());
}

// ---- cache ----

TEST(Cache, RoundTripAndInvalidation) {
    const auto& fx = h1(9);
    const auto dir = std::filesystem::temp_directory_path() / "stratlab-test-cache";
    std::filesystem::remove_all(dir);
    const auto path = cache_file(dir, *fx.grid);
    save_decomposition(*fx.dec, path);
    const DecompositionPtr back = load_decomposition(fx.grid, path);
    ASSERT_TRUE(back);
    EXPECT_EQ((back->eigenvalues() - fx.dec->eigenvalues()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back->vectors() - fx.dec->vectors()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_FALSE(load_decomposition(make_grid(heisenberg(), {2, 2, 3}, {9, 9, 9}), path));
    EXPECT_NE(cache_file(dir, *make_grid(heisenberg(), {2, 2, 3}, {9, 9, 9})), path);
    std::filesystem::resize_file(path, 1000);
    EXPECT_FALSE(load_decomposition(fx.grid, path));
    EXPECT_FALSE(load_decomposition(fx.grid, dir / "missing.bin"));
    const DecompositionPtr fresh = decompose_grid(fx.grid, true, dir);
    const DecompositionPtr hit = decompose_grid(fx.grid, true, dir);
    EXPECT_EQ((hit->vectors() - fresh->vectors()).cwiseAbs().maxCoeff(), 0.0);
    std::filesystem::remove_all(dir);
}
