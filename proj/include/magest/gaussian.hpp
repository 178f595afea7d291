/**
 * @file gaussian.hpp
 * @brief Dimension-generic Gaussian belief and its three primitive updates.
 *
 * Covariances are stored in the doubled convention
 *   gamma_ij = 2 Re <(y_i - <y_i>)(y_j - <y_j>)>,
 * so the variance of coordinate i is gamma_ii / 2 everywhere in the library.
 */
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace magest {

using Index = Eigen::Index;

/// Raised when arguments violate an operation's preconditions.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GaussianBelief {
    Eigen::VectorXd mean;
    Eigen::MatrixXd gamma;

    GaussianBelief() = default;
    GaussianBelief(Eigen::VectorXd m, Eigen::MatrixXd g);

    /// Zero mean, gamma = identity (vacuum / coherent-state variances).
    static GaussianBelief vacuum(Index n);

    Index dim() const { return mean.size(); }
    double variance(Index i) const { return gamma(i, i) / 2.0; }
};

/**
 * Splits the coordinates into a retained block (A) and a measured/refreshed
 * block (B). The first entry of the B block is the measured coordinate.
 */
class BlockPartition {
public:
    BlockPartition(std::vector<Index> retained, std::vector<Index> measured, Index dim);

    /// Retained = every coordinate not in `measured`.
    static BlockPartition complement_of(std::vector<Index> measured, Index dim);

    const std::vector<Index>& retained() const { return retained_; }
    const std::vector<Index>& measured() const { return measured_; }
    Index measured_coordinate() const { return measured_.front(); }
    Index dim() const { return dim_; }

private:
    std::vector<Index> retained_;
    std::vector<Index> measured_;
    Index dim_;
};

/// y_target += coeff * y_source, one elementary shear of a linear map.
struct Shear {
    Index target;
    Index source;
    double coeff;
};

// ---------------------------------------------------------------------------
// Pure operations
// ---------------------------------------------------------------------------

/// mean <- M mean + v, gamma <- M gamma M^T.
GaussianBelief affine_transform(GaussianBelief belief, const Eigen::MatrixXd& M,
                                const Eigen::VectorXd& v);

/// gamma <- gamma + L. L must be symmetric PSD.
GaussianBelief add_diffusion(GaussianBelief belief, const Eigen::MatrixXd& L);

/**
 * Conditions on an outcome of the first measured coordinate, then refreshes
 * the measured block to vacuum (mean 0, gamma = identity, no cross terms).
 *
 * The pseudoinverse of the measured variance is exact: 1/gamma_mm, or 0 when
 * gamma_mm < 1e-14. In the latter case the update degenerates to a refresh.
 */
GaussianBelief condition_on_measurement(GaussianBelief belief, const BlockPartition& part,
                                        double x_meas);

// ---------------------------------------------------------------------------
// In-place structured forms used in the per-step hot paths. Each element is
// computed by the same arithmetic regardless of the total dimension, so shared
// coordinates of differently sized beliefs evolve bit-identically.
// ---------------------------------------------------------------------------

/**
 * Applies I + sum_k coeff_k e_target e_source^T as a sequence of elementary
 * shears, in order. Equals the simultaneous map when no shear's source is the
 * target of an earlier shear (checked).
 */
void apply_shears(GaussianBelief& belief, std::span<const Shear> shears);

/// y_i <- factor * y_i.
void scale_coordinate(GaussianBelief& belief, Index i, double factor);

/// gamma_ii += amount (amount >= 0).
void add_variance(GaussianBelief& belief, Index i, double amount);

void condition_in_place(GaussianBelief& belief, const BlockPartition& part, double x_meas);

/// gamma <- (gamma + gamma^T) / 2.
void symmetrize(Eigen::MatrixXd& gamma);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct Diagnostics {
    double max_asymmetry = 0.0;          // max |g_ij - g_ji|
    double relative_asymmetry = 0.0;     // max_asymmetry / max(1, max |g_ij|)
    double min_eigenvalue = 0.0;
    bool cholesky_ok = true;             // Cholesky of gamma + jitter*scale*I succeeded
    bool has_nan = false;
    bool symmetric = true;
    bool psd = true;

    bool ok() const { return symmetric && psd && !has_nan; }
    std::string describe() const;
};

Diagnostics validate(const GaussianBelief& belief, double tolerance = 1e-10);

/// Cheap PSD test: Cholesky of gamma + jitter * max(1, max|gamma_ii|) * I.
bool psd_by_cholesky(const Eigen::MatrixXd& gamma, double jitter = 1e-10);

} // namespace magest
