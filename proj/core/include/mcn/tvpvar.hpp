#pragma once

#include "mcn/calendar.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mcn::tvp {

struct TvpVarSpec {
    int p = 1;                 // lag order
    double lambda = 0.99;      // forgetting factor, 0 < lambda <= 1
    double kappa = 0.99;       // EWMA decay, 0 < kappa < 1
    double gamma = 0.01;       // Minnesota shrinkage on lag coefficients
    int horizon = 12;          // GFEVD horizon H
    double cond_limit = 1e12;  // reject the step when cond(F_t) exceeds this

    void validate() const;
};

struct MinnesotaPrior {
    Eigen::VectorXd mean;      // zeros, length N(Np+1)
    Eigen::VectorXd var_diag;  // 100 on intercepts, gamma/l^2 on lag-l coefficients
};

/// Prior layout matches beta = vec([c, B_1, ..., B_p]'): per equation,
/// [intercept, lag-1 row, ..., lag-p row].
MinnesotaPrior minnesota_prior(int n, int p, double gamma);

struct FilterState {
    Eigen::VectorXd beta;       // filtered coefficient mean
    Eigen::MatrixXd p_cov;      // filtered coefficient covariance (symmetric)
    Eigen::MatrixXd sigma;      // EWMA measurement covariance
    Eigen::VectorXd resid;      // one-step prediction residual
    Eigen::MatrixXd innov_cov;  // F_t
    Eigen::MatrixXd gain;       // K_t
};

/// One forgetting-factor Kalman update. `x` is the stacked regressor
/// [1, y'_{t-1}, ..., y'_{t-p}] shared by every equation (Z_t = I_N (x) x').
FilterState kalman_step(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                        const FilterState& prev, const TvpVarSpec& spec);

struct FilterPath {
    TvpVarSpec spec;
    int n = 0;
    std::vector<int> t_index;  // panel row filtered at each step (p..T-1)
    std::vector<FilterState> states;
    std::vector<std::string> warnings;
};

/// Runs the filter over a T x N panel. The state starts from the Minnesota
/// prior; the EWMA covariance from the demeaned sample covariance of the
/// first min(60, T/4) rows.
FilterPath fit_tvpvar(const Eigen::MatrixXd& panel, const TvpVarSpec& spec);

/// BIC lag selection on constant-coefficient OLS VAR fits sharing the
/// p_max-conditioned sample: ln det(Sigma_p) + k ln(T_eff)/T_eff.
int select_lag(const Eigen::MatrixXd& panel, int p_max);

struct VarCoeffs {
    Eigen::VectorXd intercept;          // N
    std::vector<Eigen::MatrixXd> lags;  // p matrices, N x N
};
VarCoeffs unpack_beta(const Eigen::VectorXd& beta, int n, int p);

/// VMA coefficients Psi_0..Psi_{H-1}; Psi_0 = I.
std::vector<Eigen::MatrixXd> vma_expand(const std::vector<Eigen::MatrixXd>& lag_coeffs,
                                        int horizon);

struct GfevdTable {
    Eigen::MatrixXd raw;         // theta_ij(H)
    Eigen::MatrixXd normalized;  // d_ij(H), rows sum to 1
};

/// Generalized FEVD: share of i's H-step forecast-error variance attributed
/// to shocks in j, row-normalized.
GfevdTable gfevd(const std::vector<Eigen::MatrixXd>& psi, const Eigen::MatrixXd& sigma);

/// Long format `date,from,to,share` with `share` = d(to, from).
void write_gfevd_csv(const std::string& path, const std::vector<Date>& dates,
                     const std::vector<std::string>& names,
                     const std::vector<Eigen::MatrixXd>& normalized);

struct GfevdSeries {
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<Eigen::MatrixXd> tables;  // normalized d per date
};
GfevdSeries read_gfevd_csv(const std::string& path);

}  // namespace mcn::tvp
