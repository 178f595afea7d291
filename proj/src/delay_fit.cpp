#include "magest/delay_fit.hpp"

#include <algorithm>
#include <cmath>

namespace magest {

std::size_t LagErrorProfile::argmin() const
{
    return static_cast<std::size_t>(std::min_element(error_sq.begin(), error_sq.end()) - error_sq.begin());
}

LagErrorProfile lag_error_profile(std::span<const double> b_hat, std::span<const double> truth,
                                  double tau, std::span<const std::size_t> delay_steps,
                                  std::size_t skip)
{
    if (delay_steps.empty()) throw ContractError("lag_error_profile: no delays given");
    const std::size_t d_max = *std::max_element(delay_steps.begin(), delay_steps.end());
    // Entry k pairs with truth[k + 1 - d].
    const std::size_t begin = std::max(skip, d_max == 0 ? 0 : d_max - 1);
    const std::size_t end = std::min(b_hat.size(), truth.size() == 0 ? 0 : truth.size() - 1);
    if (begin >= end) throw ContractError("lag_error_profile: delay beyond record span");

    LagErrorProfile out;
    out.samples = end - begin;
    for (std::size_t d : delay_steps) {
        double acc = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const double e = b_hat[k] - truth[k + 1 - d];
            acc += e * e;
        }
        out.delay_steps.push_back(d);
        out.delay.push_back(static_cast<double>(d) * tau);
        out.error_sq.push_back(acc / static_cast<double>(out.samples));
    }
    return out;
}

DelayRegression::DelayRegression(std::size_t max_index, std::size_t stride, double tau)
    : max_index_(max_index)
    , stride_(stride)
    , gram_(Eigen::MatrixXd::Zero(static_cast<Index>(max_index + 1), static_cast<Index>(max_index + 1)))
    , cross_(Eigen::VectorXd::Zero(static_cast<Index>(max_index + 1)))
    , tau_(tau)
{
    if (stride < 1) throw ContractError("DelayRegression: stride must be >= 1");
}

void DelayRegression::add(std::span<const double> b_hat, std::span<const double> truth, std::size_t skip)
{
    // Target truth[j] pairs with b_hat[j - 1 + i stride].
    const std::size_t reach = max_index_ * stride_;
    const std::size_t j_begin = skip + 1;
    const std::size_t j_end = std::min(truth.size(), b_hat.size() + 1 > reach ? b_hat.size() + 1 - reach : 0);
    if (j_begin >= j_end) throw ContractError("DelayRegression: lag grid exceeds record span");

    const Index m = static_cast<Index>(terms());
    Eigen::VectorXd row(m);
    for (std::size_t j = j_begin; j < j_end; ++j) {
        for (Index i = 0; i < m; ++i) row(i) = b_hat[j - 1 + static_cast<std::size_t>(i) * stride_];
        gram_.selfadjointView<Eigen::Upper>().rankUpdate(row);
        cross_ += truth[j] * row;
        target_sq_ += truth[j] * truth[j];
    }
    samples_ += j_end - j_begin;
}

void DelayRegression::merge(const DelayRegression& other)
{
    if (other.max_index_ != max_index_ || other.stride_ != stride_) {
        throw ContractError("DelayRegression: merging different grids");
    }
    gram_ += other.gram_;
    cross_ += other.cross_;
    target_sq_ += other.target_sq_;
    samples_ += other.samples_;
}

double DelayRegression::error_sq(const std::vector<double>& weights) const
{
    if (weights.size() != terms()) throw ContractError("DelayRegression: weight count mismatch");
    if (samples_ == 0) throw ContractError("DelayRegression: no data");
    const Eigen::Map<const Eigen::VectorXd> a(weights.data(), static_cast<Index>(weights.size()));
    const Eigen::MatrixXd g = gram_.selfadjointView<Eigen::Upper>();
    const double sse = target_sq_ - 2.0 * a.dot(cross_) + a.dot(g * a);
    return std::max(0.0, sse) / static_cast<double>(samples_);
}

DelayWeights DelayRegression::solve() const
{
    if (samples_ == 0) throw ContractError("DelayRegression: no data");
    const Eigen::MatrixXd g = gram_.selfadjointView<Eigen::Upper>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double lmax = lambda.cwiseAbs().maxCoeff();
    const double threshold = lmax * 1e-13;

    DelayWeights out;
    out.collinear = lmax == 0.0 || lambda.minCoeff() <= threshold;
    // Pseudoinverse solve; reduces to the ordinary solution when G is regular.
    Eigen::VectorXd proj = eig.eigenvectors().transpose() * cross_;
    for (Index i = 0; i < proj.size(); ++i) proj(i) = lambda(i) > threshold ? proj(i) / lambda(i) : 0.0;
    const Eigen::VectorXd a = eig.eigenvectors() * proj;

    out.weights.assign(a.data(), a.data() + a.size());
    for (std::size_t i = 0; i < terms(); ++i) {
        out.delay_steps.push_back(i * stride_);
        out.delay.push_back(static_cast<double>(i * stride_) * tau_);
    }
    out.samples = samples_;
    out.error_sq = error_sq(out.weights);
    return out;
}

DelayWeights fit_delay_weights(const EstimateTrace& trace, std::span<const double> truth,
                               std::size_t max_index, std::size_t stride, std::size_t skip)
{
    DelayRegression reg(max_index, stride, trace.tau);
    reg.add(trace.b_hat, truth, skip);
    if ((max_index + 1) * 10 > reg.samples()) {
        throw ContractError("fit_delay_weights: need at least 10 samples per weight");
    }
    return reg.solve();
}

std::vector<double> apply_delay_weights(std::span<const double> b_hat, std::span<const double> weights,
                                        std::size_t stride)
{
    if (weights.empty()) return {b_hat.begin(), b_hat.end()};
    const std::size_t reach = (weights.size() - 1) * stride;
    if (b_hat.size() <= reach) return {};
    std::vector<double> out(b_hat.size() - reach, 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * b_hat[j + i * stride];
        out[j] = acc;
    }
    return out;
}

SlotScore score_smoothed(const SmoothedTrace& trace, std::span<const double> truth,
                         const LagConfig& lag, std::size_t skip)
{
    const std::size_t w = trace.width();
    SlotScore out;
    out.delay.assign(w, 0.0);
    out.error_sq.assign(w, 0.0);
    out.mean_var.assign(w, 0.0);
    for (std::size_t r = 0; r < trace.rows(); ++r) {
        const std::size_t k = trace.steps[r];
        if (k < skip || !history_filled(k, lag) || k + 1 >= truth.size()) continue;
        for (std::size_t i = 0; i < w; ++i) {
            const std::size_t d = slot_delay_steps(k, i, lag.slot_stride);
            const double e = trace.b_hat_at(r, i) - truth[k + 1 - d];
            out.error_sq[i] += e * e;
            out.mean_var[i] += trace.b_var_at(r, i);
            out.delay[i] += static_cast<double>(d) * trace.tau;
        }
        ++out.samples;
    }
    if (out.samples == 0) throw ContractError("score_smoothed: no scorable rows");
    const double n = static_cast<double>(out.samples);
    for (std::size_t i = 0; i < w; ++i) {
        out.error_sq[i] /= n;
        out.mean_var[i] /= n;
        out.delay[i] /= n;
    }
    return out;
}

} // namespace magest
