#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gsc/model.hpp"

namespace gsc {

/// Visibility weights below this are raised to it so the synthesis side
/// (division by the weights) stays bounded.
inline constexpr double kVisibilityFloor = 1e-4;

/// Linear colour basis: analysis Z = W^T diag(lambda) X, synthesis
/// X = diag(lambda)^-1 W Z.
struct VabrBasis {
    int degree = 0;
    Eigen::VectorXd lambda;  // d
    Eigen::MatrixXd W;       // d x k, orthonormal columns
    bool uncentered = true;

    int dim() const { return static_cast<int>(lambda.size()); }
    int k() const { return static_cast<int>(W.cols()); }

    friend bool operator==(const VabrBasis& a, const VabrBasis& b) {
        return a.degree == b.degree && a.uncentered == b.uncentered && a.lambda.size() == b.lambda.size() &&
               a.W.rows() == b.W.rows() && a.W.cols() == b.W.cols() && a.lambda == b.lambda && a.W == b.W;
    }
};

/// Nine world-space ray directions per view through a 3x3 grid of pixel
/// positions ((c + 0.5) W / 3, (r + 0.5) H / 3), camera-to-scene.
std::vector<Eigen::Vector3d> sample_directions(std::span<const CameraView> views);

/// Mean |Y_j| over `dirs` for each basis function j, floored at
/// kVisibilityFloor and replicated over the three colour channels (index 3j + c).
Eigen::VectorXd visibility_weights(std::span<const Eigen::Vector3d> dirs, int degree);

/// Eigenbasis of the second moment of diag(lambda) X (mean-centred covariance
/// when `centered`). Columns sorted by descending eigenvalue, ties by index;
/// each column's largest-magnitude entry is positive.
VabrBasis fit_basis(const Eigen::MatrixXd& X, const Eigen::VectorXd& lambda, int k, bool centered = false);

Eigen::MatrixXd vabr_forward(const Eigen::MatrixXd& X, const VabrBasis& basis);
Eigen::MatrixXd vabr_inverse(const Eigen::MatrixXd& Z, const VabrBasis& basis);

/// The same basis with every value rounded through float32, as stored on disk.
VabrBasis round_to_f32(const VabrBasis& basis);

/// d x M matrix of the SH coefficients of all records, in order.
Eigen::MatrixXd color_matrix(std::span<const GaussianRecord> records, int degree);

}  // namespace gsc
