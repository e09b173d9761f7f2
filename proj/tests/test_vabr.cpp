#include <numbers>

#include <Eigen/QR>

#include "doctest.h"
#include "gsc/error.hpp"
#include "gsc/sh.hpp"
#include "gsc/vabr.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gsc;

namespace {

std::vector<Eigen::Vector3d> fibonacci_sphere(int n) {
    std::vector<Eigen::Vector3d> out(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(1.0 - z * z);
        out[i] = Eigen::Vector3d(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    return out;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd M(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) M(r, c) = n(rng);
    return M;
}

Eigen::VectorXd random_weights(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Eigen::VectorXd l(d);
    for (int i = 0; i < d; ++i) l[i] = u(rng);
    return l;
}

double weighted_error(const Eigen::MatrixXd& X, const VabrBasis& b) {
    const Eigen::MatrixXd Xhat = vabr_inverse(vabr_forward(X, b), b);
    return (b.lambda.asDiagonal() * (X - Xhat)).squaredNorm();
}

}  // namespace

TEST_CASE("SH basis matches the textbook real harmonics") {
    for (int degree = 0; degree <= 3; ++degree) {
        const ShBasis basis{degree};
        std::vector<double> y(basis.size());
        for (const auto& d : fibonacci_sphere(200)) {
            basis.eval(d, y);
            for (int l = 0; l <= degree; ++l)
                for (int m = -l; m <= l; ++m) CHECK(y[l * l + l + m] == doctest::Approx(test::real_sh(l, m, d)).epsilon(1e-9));
        }
    }
}

TEST_CASE("SH constant term and orthonormality") {
    const ShBasis basis{3};
    std::vector<double> y(16);
    basis.eval(Eigen::Vector3d(0.3, -0.4, 0.866).normalized(), y);
    CHECK(std::abs(y[0] - 0.2820948) <= 1e-6);

    const auto dirs = fibonacci_sphere(1000000);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(16, 16);
    Eigen::VectorXd yv(16);
    for (const auto& d : dirs) {
        basis.eval(d, std::span<double>(yv.data(), 16));
        G.noalias() += yv * yv.transpose();
    }
    G *= 4 * std::numbers::pi / static_cast<double>(dirs.size());
    CHECK((G - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("sample directions") {
    CameraView cam;
    cam.fx = cam.fy = 1;
    cam.cx = cam.cy = 0;
    cam.width = cam.height = 3;
    const std::vector<CameraView> one{cam};
    const auto dirs = sample_directions(one);
    REQUIRE(dirs.size() == 9);
    const Eigen::Vector3d centre = dirs[4];  // r = c = 1
    CHECK(centre.x() == doctest::Approx(0.6396).epsilon(1e-4));
    CHECK(centre.y() == doctest::Approx(0.6396).epsilon(1e-4));
    CHECK(centre.z() == doctest::Approx(0.4264).epsilon(1e-4));

    const std::vector<CameraView> two{cam, cam};
    const auto dup = sample_directions(two);
    REQUIRE(dup.size() == 18);
    for (int i = 0; i < 9; ++i) CHECK(dup[i] == dup[i + 9]);

    auto flipped = cam;
    flipped.R = {-1, 0, 0, 0, 1, 0, 0, 0, -1};  // 180 degrees about y
    const std::vector<CameraView> f{flipped};
    const auto mirrored = sample_directions(f);
    for (int i = 0; i < 9; ++i) {
        CHECK(mirrored[i].x() == doctest::Approx(-dirs[i].x()));
        CHECK(mirrored[i].y() == doctest::Approx(dirs[i].y()));
        CHECK(mirrored[i].z() == doctest::Approx(-dirs[i].z()));
    }
}

TEST_CASE("visibility weights") {
    std::mt19937_64 rng(1);
    std::vector<Eigen::Vector3d> any;
    for (int i = 0; i < 30; ++i) any.push_back(Eigen::Vector3d::Random().normalized());
    const auto l = visibility_weights(any, 2);
    REQUIRE(l.size() == 27);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(l[c] - 0.2820948) <= 1e-6);
    for (int j = 0; j < 9; ++j) CHECK(l[3 * j] == l[3 * j + 1]);

    const std::vector<Eigen::Vector3d> pole(5, Eigen::Vector3d(0, 0, 1));
    const auto p = visibility_weights(pole, 1);
    CHECK(p[3 * 2] == doctest::Approx(0.4886025).epsilon(1e-6));  // (l, m) = (1, 0)
    CHECK(p[3 * 3] == kVisibilityFloor);                          // (1, 1)
    CHECK(p[3 * 1] == kVisibilityFloor);                          // (1, -1)

    // mean |Y| over the sampled set, checked against the textbook harmonics
    const auto w = visibility_weights(any, 3);
    for (int l2 = 0; l2 <= 3; ++l2)
        for (int m = -l2; m <= l2; ++m) {
            double acc = 0;
            for (const auto& d : any) acc += std::abs(test::real_sh(l2, m, d));
            CHECK(w[3 * (l2 * l2 + l2 + m)] == doctest::Approx(std::max(acc / any.size(), kVisibilityFloor)));
        }
}

TEST_CASE("fit_basis: rank-one data") {
    Eigen::VectorXd v(6);
    v << 0.3, -1.2, 0.5, 0.0, 2.0, -0.7;
    const Eigen::MatrixXd X = v.replicate(1, 10);
    const auto b = fit_basis(X, Eigen::VectorXd::Ones(6), 1);
    const Eigen::VectorXd w = b.W.col(0);
    CHECK((w - v.normalized()).norm() <= 1e-9);  // largest entry 2.0 already positive
    const Eigen::MatrixXd Xhat = vabr_inverse(vabr_forward(X, b), b);
    CHECK((X - Xhat).norm() <= 1e-9 * X.norm());
}

TEST_CASE("fit_basis: 2x2 against closed-form eigenvector") {
    Eigen::MatrixXd X(2, 3);
    X << 1, 1, 0, 0, 0, 0.1;
    const auto b = fit_basis(X, Eigen::VectorXd::Ones(2), 1);
    const Eigen::Vector2d oracle = test::dominant_eigenvector_2x2(2.0 / 3, 0.0, 0.01 / 3);
    CHECK(oracle == Eigen::Vector2d(1, 0));
    CHECK((Eigen::Vector2d(b.W.col(0)) - oracle).norm() <= 1e-6);

    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const Eigen::MatrixXd R = random_matrix(rng, 2, 7);
        const Eigen::VectorXd lam = random_weights(rng, 2);
        const Eigen::MatrixXd Y = lam.asDiagonal() * R;
        const Eigen::Matrix2d C = Y * Y.transpose() / 7.0;
        const auto fb = fit_basis(R, lam, 1);
        const Eigen::Vector2d o = test::dominant_eigenvector_2x2(C(0, 0), C(0, 1), C(1, 1));
        CHECK((Eigen::Vector2d(fb.W.col(0)) - o).norm() <= 1e-9);
    }
}

TEST_CASE("fit_basis: orthonormal, sorted, sign-canonical, deterministic") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd X = random_matrix(rng, 12, 200);
    const Eigen::VectorXd lam = random_weights(rng, 12);
    const auto b = fit_basis(X, lam, 12);
    CHECK((b.W.transpose() * b.W - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() <= 1e-6);
    const Eigen::MatrixXd Y = lam.asDiagonal() * X;
    const Eigen::MatrixXd C = Y * Y.transpose() / 200.0;
    const auto ev = test::jacobi_eigenvalues(C);
    for (int i = 0; i < 12; ++i) {
        const Eigen::VectorXd w = b.W.col(i);
        CHECK(w.dot(C * w) == doctest::Approx(ev[i]).epsilon(1e-9));
        Eigen::Index arg;
        w.cwiseAbs().maxCoeff(&arg);
        CHECK(w[arg] > 0);
    }
    CHECK(fit_basis(X, lam, 12) == b);
    CHECK(b.uncentered);
    CHECK_FALSE(fit_basis(X, lam, 12, true).uncentered);
}

TEST_CASE("weighted reconstruction error equals M times discarded eigenvalues") {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd X = random_matrix(rng, 9, 150);
    const Eigen::VectorXd lam = random_weights(rng, 9);
    const Eigen::MatrixXd Y = lam.asDiagonal() * X;
    const auto ev = test::jacobi_eigenvalues(Y * Y.transpose() / 150.0);
    for (int k = 1; k <= 9; ++k) {
        double discarded = 0;
        for (int i = k; i < 9; ++i) discarded += ev[i];
        const double err = weighted_error(X, fit_basis(X, lam, k));
        CHECK(err == doctest::Approx(150.0 * discarded).epsilon(1e-6).scale(1e-12));
    }
}

TEST_CASE("round trips and idempotence") {
    std::mt19937_64 rng(5);
    for (int d : {3, 12, 27, 48}) {
        const Eigen::MatrixXd X = random_matrix(rng, d, 60);
        const auto b = fit_basis(X, random_weights(rng, d), d);
        const Eigen::MatrixXd Xhat = vabr_inverse(vabr_forward(X, b), b);
        CHECK((X - Xhat).norm() <= 1e-9 * X.norm());

        const auto bk = fit_basis(X, random_weights(rng, d), std::max(1, d / 3));
        const Eigen::MatrixXd Z = random_matrix(rng, bk.k(), 20);
        CHECK((vabr_forward(vabr_inverse(Z, bk), bk) - Z).norm() <= 1e-9 * Z.norm());
    }
}

TEST_CASE("forward transform examples") {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd X = random_matrix(rng, 6, 40);
    const auto b = fit_basis(X, random_weights(rng, 6), 3);
    CHECK(vabr_forward(Eigen::MatrixXd::Zero(6, 5), b).isZero());
    CHECK(vabr_inverse(Eigen::MatrixXd::Zero(3, 5), b).isZero());

    VabrBasis id;
    id.lambda = Eigen::VectorXd::Ones(6);
    id.W = Eigen::MatrixXd::Identity(6, 6);
    CHECK(vabr_forward(X, id) == X);

    const Eigen::VectorXd x = b.lambda.cwiseInverse().asDiagonal() * b.W.col(0);
    const Eigen::VectorXd z = vabr_forward(x, b);
    CHECK((z - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-12);
}

TEST_CASE("reconstruction error non-increasing in k") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const int d = 12;
        const Eigen::MatrixXd X = random_matrix(rng, d, 30);
        const Eigen::VectorXd lam = random_weights(rng, d);
        double prev_w = std::numeric_limits<double>::infinity(), prev_u = prev_w;
        for (int k = 1; k <= d; ++k) {
            const double ew = weighted_error(X, fit_basis(X, lam, k));
            CHECK(ew <= prev_w * (1 + 1e-12) + 1e-12);
            prev_w = ew;
            // unweighted domain with unit weights
            const auto bu = fit_basis(X, Eigen::VectorXd::Ones(d), k);
            const double eu = (X - vabr_inverse(vabr_forward(X, bu), bu)).squaredNorm();
            CHECK(eu <= prev_u * (1 + 1e-12) + 1e-12);
            prev_u = eu;
        }
    }
}

TEST_CASE("fitted basis beats random orthonormal competitors") {
    std::mt19937_64 rng(8);
    for (int d = 2; d <= 4; ++d)
        for (int k = 1; k < d; ++k) {
            const Eigen::MatrixXd X = random_matrix(rng, d, 50);
            const Eigen::VectorXd lam = random_weights(rng, d);
            const auto fitted = fit_basis(X, lam, k);
            const double best = weighted_error(X, fitted);
            int beaten = 0;
            for (int t = 0; t < 1000; ++t) {
                VabrBasis comp = fitted;
                const Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, d, d));
                comp.W = Eigen::MatrixXd(qr.householderQ()).leftCols(k);
                if (best <= weighted_error(X, comp) * (1 + 1e-12)) ++beaten;
            }
            CHECK(beaten == 1000);
        }
}

TEST_CASE("fit_basis and transform errors") {
    const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(6, 4);
    CHECK_THROWS_AS(fit_basis(Eigen::MatrixXd(6, 0), Eigen::VectorXd::Ones(6), 1), ValidationError);
    CHECK_THROWS_AS(fit_basis(X, Eigen::VectorXd::Ones(5), 1), ValidationError);
    CHECK_THROWS_AS(fit_basis(X, Eigen::VectorXd::Ones(6), 0), ValidationError);
    CHECK_THROWS_AS(fit_basis(X, Eigen::VectorXd::Ones(6), 7), ValidationError);
    CHECK_THROWS_AS(fit_basis(X, Eigen::VectorXd::Zero(6), 1), ValidationError);
    const auto b = fit_basis(X, Eigen::VectorXd::Ones(6), 2);
    CHECK_THROWS_AS(vabr_forward(Eigen::MatrixXd::Ones(5, 4), b), ValidationError);
    CHECK_THROWS_AS(vabr_inverse(Eigen::MatrixXd::Ones(3, 4), b), ValidationError);
}

TEST_CASE("colour matrix layout") {
    GaussianRecord a, b;
    a.sh = {1, 2, 3};
    b.sh = {4, 5, 6};
    const std::vector<GaussianRecord> recs{a, b};
    const auto X = color_matrix(recs, 0);
    CHECK(X.rows() == 3);
    CHECK(X.cols() == 2);
    CHECK(X(2, 1) == 6);
}
