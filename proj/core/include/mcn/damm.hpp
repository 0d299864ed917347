#pragma once

#include "mcn/calendar.hpp"
#include "mcn/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mcn::damm {

/// Mixture parameters at one date, in both the natural and the unconstrained
/// coordinates. Natural: simplex weights, component means, positive scales.
/// Unconstrained: stick-breaking preimage of the weights and (mu, ln sigma).
struct MixtureState {
    Eigen::VectorXd weights;      // J, strictly inside the simplex
    Eigen::VectorXd means;        // J
    Eigen::VectorXd scales;       // J, > 0
    Eigen::VectorXd w_tilde;      // J-1
    Eigen::MatrixXd theta_tilde;  // 2 x J, rows (mu, ln sigma)

    int components() const { return static_cast<int>(weights.size()); }
};

/// Score-driven recursion coefficients: one block for the weight preimage,
/// one 2-vector block per component. A and B are diagonal, stored as vectors.
struct SdCoefficients {
    Eigen::VectorXd kappa_w, a_w, b_w;  // J-1 each
    Eigen::MatrixXd kappa_c, a_c, b_c;  // 2 x J
    double delta = 0.5;                 // component-block scaling exponent in {0, 1/2, 1}

    int components() const { return static_cast<int>(kappa_c.cols()); }
};

/// One score evaluation: gradient of the mixture log density, the simplex
/// Jacobian, and the scaled scores that drive the update.
struct ScoreStep {
    double log_density = 0;
    Eigen::VectorXd score_w;   // J, d ln p / d w_j = resp_j / w_j
    Eigen::MatrixXd score_c;   // 2 x J, d ln p / d (mu_j, sigma_j)
    Eigen::MatrixXd jacobian_w;  // J x (J-1)
    Eigen::VectorXd scaled_w;  // J-1, J_w' * score_w (weight-block scaling is identity)
    Eigen::MatrixXd scaled_c;  // 2 x J, Xi_j * J_j' * score_j
};

/// L + (U-L) / (1 + exp(-x)). Requires L < U.
double modified_logistic(double lower, double upper, double x);

/// Stick-breaking map from R^{J-1} into the interior of the J-simplex.
Eigen::VectorXd simplex_map(const Eigen::VectorXd& w_tilde);

/// J x (J-1) Jacobian of simplex_map. Columns sum to zero exactly.
Eigen::MatrixXd simplex_jacobian(const Eigen::VectorXd& w_tilde);

/// Rebuilds the natural coordinates from unconstrained ones.
MixtureState state_from_unconstrained(const Eigen::VectorXd& w_tilde,
                                      const Eigen::MatrixXd& theta_tilde);

/// Score of ln p(y | state) with the scaling described in SdCoefficients.
/// Throws numerical_error when the mixture density underflows to zero.
ScoreStep damm_score(double y, const MixtureState& state, double delta);

/// One score-driven update. Pure: returns the state for t+1.
MixtureState damm_step(double y, const MixtureState& state, const SdCoefficients& coeffs);

/// Unconstrained stationary point kappa / (1 - B), used to start the filter.
MixtureState initial_state(const SdCoefficients& coeffs);

struct FilterResult {
    std::vector<MixtureState> states;  // states[t] conditions y_t on past info
    double loglik = 0;
};

/// Filters a whole series; throws numerical_error with the offending date
/// index when the recursion diverges.
FilterResult damm_filter(const Eigen::VectorXd& series, const SdCoefficients& coeffs);

struct FitConfig {
    int components = 2;
    int max_iterations = 4000;     // optimizer iterations per start
    int starts = 5;                // seeded multi-start count
    double rel_tol = 1e-8;         // relative likelihood change over tol_window
    int tol_window = 10;
    std::uint64_t seed = 1;
    double delta = 0.5;
};

struct FitResult {
    SdCoefficients coeffs;
    std::vector<MixtureState> states;
    double loglik = 0;
    bool converged = false;
    int iterations = 0;
    int best_start = 0;
    std::uint64_t seed = 0;
};

/// Maximum likelihood over (kappa, diag A, diag B); A kept positive via exp,
/// B inside (-1,1) via tanh. Components are ordered by mean on return.
FitResult damm_fit(const Eigen::VectorXd& series, const FitConfig& config);

enum class MomentConvention {
    central,  // standard central standardized moments
    printed,  // literal raw-moment variant kept for comparison output
};

struct Moments {
    double vol = 0;   // conditional variance
    double skew = 0;  // standardized third central moment
    double kurt = 0;  // excess kurtosis
};

Moments mixture_moments(const Eigen::VectorXd& weights, const Eigen::VectorXd& means,
                        const Eigen::VectorXd& scales,
                        MomentConvention convention = MomentConvention::central);

/// Per-series conditional variance / skewness / excess kurtosis paths.
/// `vol` stores the raw variance; downstream layers apply the log transform.
struct MomentPanel {
    std::vector<Date> dates;
    std::vector<std::string> names;
    Eigen::MatrixXd vol, skew, kurt;  // T x N
};

struct FitDiagnostics {
    std::string series;
    double loglik = 0;
    bool converged = false;
    int iterations = 0;
    std::uint64_t seed = 0;
    SdCoefficients coeffs;
};

struct MomentPanelResult {
    MomentPanel panel;
    std::vector<FitDiagnostics> diagnostics;
};

/// Fits every series and evaluates the mixture moments along the filtered
/// path. Fit failures are rethrown with the series name attached.
/// `threads` <= 1 runs serially; series fits are independent.
MomentPanelResult extract_moment_panel(const ts::ReturnPanel& returns, const FitConfig& config,
                                       int threads = 1);

/// T x N matrix for one moment on the scale used by the VAR layer.
enum class MomentKind { volatility, skewness, kurtosis };
Eigen::MatrixXd layer_matrix(const MomentPanel& panel, MomentKind kind, bool log_volatility);

void write_moments_csv(const std::string& path, const MomentPanel& panel, bool log_volatility);
MomentPanel read_moments_csv(const std::string& path);

}  // namespace mcn::damm
