#include "magest/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magest {

namespace {

constexpr double kPinvThreshold = 1e-14;

void require_dims(const GaussianBelief& b)
{
    if (b.gamma.rows() != b.mean.size() || b.gamma.cols() != b.mean.size()) {
        throw ContractError("belief: gamma must be n x n with n = mean length");
    }
}

double max_abs(const Eigen::MatrixXd& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace

GaussianBelief::GaussianBelief(Eigen::VectorXd m, Eigen::MatrixXd g)
    : mean(std::move(m))
    , gamma(std::move(g))
{
    require_dims(*this);
}

GaussianBelief GaussianBelief::vacuum(Index n)
{
    return GaussianBelief(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n));
}

BlockPartition::BlockPartition(std::vector<Index> retained, std::vector<Index> measured, Index dim)
    : retained_(std::move(retained))
    , measured_(std::move(measured))
    , dim_(dim)
{
    if (retained_.empty()) throw ContractError("partition: retained block must be non-empty");
    if (measured_.empty()) throw ContractError("partition: measured block must be non-empty");
    std::vector<int> seen(static_cast<std::size_t>(dim), 0);
    auto mark = [&](Index i) {
        if (i < 0 || i >= dim) throw ContractError("partition: index out of range");
        if (seen[static_cast<std::size_t>(i)]++) throw ContractError("partition: blocks overlap");
    };
    for (Index i : retained_) mark(i);
    for (Index i : measured_) mark(i);
    if (static_cast<Index>(retained_.size() + measured_.size()) != dim) {
        throw ContractError("partition: blocks do not cover all coordinates");
    }
}

BlockPartition BlockPartition::complement_of(std::vector<Index> measured, Index dim)
{
    std::vector<Index> retained;
    for (Index i = 0; i < dim; ++i) {
        if (std::find(measured.begin(), measured.end(), i) == measured.end()) retained.push_back(i);
    }
    return BlockPartition(std::move(retained), std::move(measured), dim);
}

void symmetrize(Eigen::MatrixXd& gamma)
{
    const Index n = gamma.rows();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < j; ++i) {
            const double s = 0.5 * (gamma(i, j) + gamma(j, i));
            gamma(i, j) = s;
            gamma(j, i) = s;
        }
    }
}

GaussianBelief affine_transform(GaussianBelief belief, const Eigen::MatrixXd& M,
                                const Eigen::VectorXd& v)
{
    require_dims(belief);
    const Index n = belief.dim();
    if (M.rows() != n || M.cols() != n || v.size() != n) {
        throw ContractError("affine_transform: M must be n x n and v length n");
    }
    belief.mean = M * belief.mean + v;
    Eigen::MatrixXd g = M * belief.gamma * M.transpose();
    symmetrize(g);
    belief.gamma = std::move(g);
    return belief;
}

GaussianBelief add_diffusion(GaussianBelief belief, const Eigen::MatrixXd& L)
{
    require_dims(belief);
    const Index n = belief.dim();
    if (L.rows() != n || L.cols() != n) throw ContractError("add_diffusion: L must be n x n");
    const double scale = std::max(1.0, max_abs(L));
    if (max_abs(L - L.transpose()) > 1e-12 * scale) {
        throw ContractError("add_diffusion: L is not symmetric");
    }
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
            throw ContractError("add_diffusion: L is not positive semidefinite");
        }
    }
    belief.gamma += L;
    symmetrize(belief.gamma);
    return belief;
}

GaussianBelief condition_on_measurement(GaussianBelief belief, const BlockPartition& part,
                                        double x_meas)
{
    condition_in_place(belief, part, x_meas);
    return belief;
}

void apply_shears(GaussianBelief& belief, std::span<const Shear> shears)
{
    const Index n = belief.dim();
    for (std::size_t k = 0; k < shears.size(); ++k) {
        const Shear& s = shears[k];
        if (s.target < 0 || s.target >= n || s.source < 0 || s.source >= n || s.target == s.source) {
            throw ContractError("apply_shears: bad shear indices");
        }
        for (std::size_t e = 0; e < k; ++e) {
            if (shears[e].target == s.source) {
                throw ContractError("apply_shears: source modified by an earlier shear");
            }
        }
    }
    auto& g = belief.gamma;
    for (const Shear& s : shears) {
        if (s.coeff == 0.0) continue;
        belief.mean(s.target) += s.coeff * belief.mean(s.source);
        // Row then column operation: E gamma E^T. Off-diagonal pairs receive
        // the same arithmetic, so symmetry is kept exactly.
        for (Index j = 0; j < n; ++j) g(s.target, j) += s.coeff * g(s.source, j);
        for (Index i = 0; i < n; ++i) g(i, s.target) += s.coeff * g(i, s.source);
    }
    symmetrize(g);
}

void scale_coordinate(GaussianBelief& belief, Index i, double factor)
{
    if (i < 0 || i >= belief.dim()) throw ContractError("scale_coordinate: index out of range");
    auto& g = belief.gamma;
    const Index n = belief.dim();
    belief.mean(i) *= factor;
    for (Index j = 0; j < n; ++j) g(i, j) *= factor;
    for (Index j = 0; j < n; ++j) g(j, i) *= factor;
    symmetrize(g);
}

void add_variance(GaussianBelief& belief, Index i, double amount)
{
    if (i < 0 || i >= belief.dim()) throw ContractError("add_variance: index out of range");
    if (!(amount >= 0.0)) throw ContractError("add_variance: diffusion must be non-negative");
    belief.gamma(i, i) += amount;
}

void condition_in_place(GaussianBelief& belief, const BlockPartition& part, double x_meas)
{
    require_dims(belief);
    if (part.dim() != belief.dim()) throw ContractError("condition: partition dimension mismatch");

    auto& g = belief.gamma;
    auto& m = belief.mean;
    const Index mc = part.measured_coordinate();
    const auto& ret = part.retained();
    const std::size_t na = ret.size();

    const double b = g(mc, mc);
    const double pinv = std::abs(b) < kPinvThreshold ? 0.0 : 1.0 / b;
    const double innovation = x_meas - m(mc);

    thread_local std::vector<double> c, gain;
    c.resize(na);
    gain.resize(na);
    for (std::size_t a = 0; a < na; ++a) {
        c[a] = g(ret[a], mc);
        gain[a] = c[a] * pinv;
    }
    for (std::size_t a = 0; a < na; ++a) m(ret[a]) += gain[a] * innovation;
    for (std::size_t q = 0; q < na; ++q) {
        for (std::size_t p = 0; p <= q; ++p) {
            const double v = g(ret[p], ret[q]) - gain[p] * c[q];
            g(ret[p], ret[q]) = v;
            g(ret[q], ret[p]) = v;
        }
    }

    // Refresh the measured block.
    for (Index bi : part.measured()) {
        m(bi) = 0.0;
        for (Index j = 0; j < g.cols(); ++j) {
            g(bi, j) = 0.0;
            g(j, bi) = 0.0;
        }
    }
    for (Index bi : part.measured()) g(bi, bi) = 1.0;
}

bool psd_by_cholesky(const Eigen::MatrixXd& gamma, double jitter)
{
    if (gamma.size() == 0) return true;
    const double scale = std::max(1.0, gamma.diagonal().cwiseAbs().maxCoeff());
    Eigen::MatrixXd shifted = gamma;
    shifted.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    return llt.info() == Eigen::Success;
}

Diagnostics validate(const GaussianBelief& belief, double tolerance)
{
    Diagnostics d;
    const auto& g = belief.gamma;
    d.has_nan = !belief.mean.allFinite() || !g.allFinite();
    if (g.rows() != g.cols() || g.rows() != belief.mean.size()) {
        d.symmetric = false;
        d.psd = false;
        d.cholesky_ok = false;
        return d;
    }
    if (d.has_nan || g.size() == 0) {
        d.psd = !d.has_nan;
        d.symmetric = !d.has_nan;
        return d;
    }
    const double scale = std::max(1.0, max_abs(g));
    d.max_asymmetry = max_abs(g - g.transpose());
    d.relative_asymmetry = d.max_asymmetry / scale;
    d.symmetric = d.relative_asymmetry <= tolerance;

    const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = eig.eigenvalues().minCoeff();
    d.cholesky_ok = psd_by_cholesky(sym, tolerance);
    d.psd = d.min_eigenvalue >= -tolerance * scale;
    return d;
}

std::string Diagnostics::describe() const
{
    std::ostringstream os;
    os << "asymmetry=" << max_asymmetry << " (rel " << relative_asymmetry << ")"
       << " min_eig=" << min_eigenvalue << " cholesky=" << (cholesky_ok ? "ok" : "failed")
       << " nan=" << (has_nan ? "yes" : "no");
    if (!symmetric) os << " [ASYMMETRIC]";
    if (!psd) os << " [NOT PSD]";
    return os.str();
}

} // namespace magest
