#include "gsc/vabr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "gsc/error.hpp"
#include "gsc/sh.hpp"

namespace gsc {

std::vector<Eigen::Vector3d> sample_directions(std::span<const CameraView> views) {
    std::vector<Eigen::Vector3d> dirs;
    dirs.reserve(views.size() * 9);
    for (const auto& view : views) {
        const Eigen::Matrix3d Kinv = view.intrinsics().inverse();
        const Eigen::Matrix3d Rt = view.rotation().transpose();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                const double u = (c + 0.5) / 3.0 * view.width;
                const double v = (r + 0.5) / 3.0 * view.height;
                dirs.push_back((Rt * (Kinv * Eigen::Vector3d(u, v, 1.0))).normalized());
            }
        }
    }
    return dirs;
}

Eigen::VectorXd visibility_weights(std::span<const Eigen::Vector3d> dirs, int degree) {
    if (dirs.empty()) throw ValidationError("visibility weights need at least one direction");
    const ShBasis basis{degree};
    const int nb = basis.size();
    std::vector<double> sum(nb, 0.0), y(nb);
    for (const auto& d : dirs) {
        basis.eval(d, y);
        for (int j = 0; j < nb; ++j) sum[j] += std::abs(y[j]);
    }
    Eigen::VectorXd lambda(3 * nb);
    for (int j = 0; j < nb; ++j) {
        const double w = std::max(sum[j] / static_cast<double>(dirs.size()), kVisibilityFloor);
        for (int c = 0; c < 3; ++c) lambda[3 * j + c] = w;
    }
    return lambda;
}

VabrBasis fit_basis(const Eigen::MatrixXd& X, const Eigen::VectorXd& lambda, int k, bool centered) {
    const auto d = X.rows();
    const auto M = X.cols();
    if (M < 1) throw ValidationError("basis fit needs at least one coefficient vector");
    if (lambda.size() != d)
        throw ValidationError("weight vector has " + std::to_string(lambda.size()) + " entries, expected " +
                              std::to_string(d));
    if (k < 1 || k > d) throw ValidationError("retained dimension k=" + std::to_string(k) + " outside [1, d]");
    if ((lambda.array() <= 0.0).any()) throw ValidationError("visibility weights must be positive");

    Eigen::MatrixXd Y = lambda.asDiagonal() * X;
    if (centered) Y.colwise() -= Y.rowwise().mean();
    const Eigen::MatrixXd C = (Y * Y.transpose()) / static_cast<double>(M);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
    const Eigen::VectorXd& values = eig.eigenvalues();

    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });

    VabrBasis basis;
    basis.degree = 0;
    while (sh_coeff_count(basis.degree) < d) ++basis.degree;
    basis.lambda = lambda;
    basis.uncentered = !centered;
    basis.W.resize(d, k);
    for (int c = 0; c < k; ++c) {
        Eigen::VectorXd v = eig.eigenvectors().col(order[c]);
        Eigen::Index arg = 0;
        for (Eigen::Index r = 1; r < d; ++r)
            if (std::abs(v[r]) > std::abs(v[arg])) arg = r;
        if (v[arg] < 0.0) v = -v;
        basis.W.col(c) = v;
    }
    return basis;
}

Eigen::MatrixXd vabr_forward(const Eigen::MatrixXd& X, const VabrBasis& basis) {
    if (X.rows() != basis.dim())
        throw ValidationError("colour matrix has " + std::to_string(X.rows()) + " rows, basis expects " +
                              std::to_string(basis.dim()));
    return basis.W.transpose() * (basis.lambda.asDiagonal() * X);
}

Eigen::MatrixXd vabr_inverse(const Eigen::MatrixXd& Z, const VabrBasis& basis) {
    if (Z.rows() != basis.k())
        throw ValidationError("reduced matrix has " + std::to_string(Z.rows()) + " rows, basis keeps " +
                              std::to_string(basis.k()));
    return basis.lambda.cwiseInverse().asDiagonal() * (basis.W * Z);
}

VabrBasis round_to_f32(const VabrBasis& basis) {
    VabrBasis out = basis;
    out.lambda = basis.lambda.cast<float>().cast<double>();
    out.W = basis.W.cast<float>().cast<double>();
    return out;
}

Eigen::MatrixXd color_matrix(std::span<const GaussianRecord> records, int degree) {
    const int d = sh_coeff_count(degree);
    Eigen::MatrixXd X(d, static_cast<Eigen::Index>(records.size()));
    for (std::size_t m = 0; m < records.size(); ++m) {
        const auto& sh = records[m].sh;
        if (sh.size() != static_cast<std::size_t>(d)) throw ValidationError("record SH size mismatch");
        for (int r = 0; r < d; ++r) X(r, static_cast<Eigen::Index>(m)) = sh[r];
    }
    return X;
}

}  // namespace gsc
