#pragma once

#include "mcn/calendar.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mcn::shock {

/// One FOMC meeting's high-frequency surprises (percent units), precomputed
/// by the user from the 30-minute windows.
struct MeetingSurprise {
    Date date;
    double fff = 0;  // fed-funds-future surprise
    double spx = 0;  // equity-index surprise
};

/// Monthly panel of aggregated surprises; meeting-free months are exact zeros.
struct SurprisePanel {
    int first_month = 0;  // month_index of row 0
    Eigen::MatrixX2d values;
    std::vector<bool> has_meeting;

    int months() const { return static_cast<int>(values.rows()); }
};

/// Sums per-meeting surprises within each calendar month over
/// [first_month, first_month + n_months). Duplicate meeting dates are a data
/// error.
SurprisePanel aggregate_surprises(const std::vector<MeetingSurprise>& events, int first_month,
                                  int n_months);

/// Monthly macro block: 1-year yield, equity index, CPI, excess bond premium,
/// industrial production — in that column order.
struct MacroPanel {
    int first_month = 0;
    Eigen::MatrixXd values;  // T x 5
    int months() const { return static_cast<int>(values.rows()); }
};

struct BvarConfig {
    int p = 12;
    int draws = 1000;
    int angles = 100;  // rotation angles tried per posterior draw
    std::uint64_t seed = 42;
};

/// One reduced-form posterior draw. The surprise equations are white noise by
/// construction, so only the macro-block coefficients are stored; the full
/// 7x7 lag matrices have zero first rows.
struct BvarDraw {
    Eigen::MatrixXd y_lag;       // 5 x 7p, lag-major [m_{t-1} y_{t-1} | m_{t-2} ...]
    Eigen::VectorXd y_intercept; // 5
    Eigen::MatrixXd sigma;       // 7 x 7, symmetric PD
};

/// Full 7x7 lag-l coefficient matrix of a draw (zero surprise-block rows).
Eigen::MatrixXd full_lag_matrix(const BvarDraw& draw, int p, int lag);

/// Conjugate posterior sampling of the block-restricted VAR: the surprise
/// block is white noise; the macro block regresses on the lags of both plus
/// an intercept and loads contemporaneously on the surprises through the
/// error covariance.
std::vector<BvarDraw> fit_restricted_bvar(const SurprisePanel& m, const MacroPanel& y,
                                          const BvarConfig& config);

/// An accepted rotation of one posterior draw. `impact` maps the two
/// structural shocks into the surprise equations: column 0 moves the rate up
/// and the equity index down (monetary policy), column 1 moves both up
/// (information).
struct StructuralDraw {
    int draw_index = 0;
    double angle = 0;
    Eigen::Matrix2d chol;    // lower Cholesky factor of the surprise block
    Eigen::Matrix2d impact;  // chol * rotation, sign-normalized to a positive rate row
};

std::vector<StructuralDraw> identify_signs(const std::vector<BvarDraw>& draws, int angles_per_draw,
                                           std::uint64_t seed);

/// Identified shock paths. s_mp + s_if == total exactly at every month.
struct ShockSeries {
    int first_month = 0;
    Eigen::VectorXd total;  // the rate surprise S_t
    Eigen::VectorXd mp;
    Eigen::VectorXd info;
    int n_accepted = 0;
    std::vector<int> sign_flagged;  // months where the raw medians disagreed in sign

    int months() const { return static_cast<int>(total.size()); }
};

/// Pointwise posterior medians of each draw's decomposition, rescaled per
/// month so the additive identity holds exactly.
ShockSeries decompose_shocks(const std::vector<StructuralDraw>& accepted, const SurprisePanel& m);

// CSV bindings.
std::vector<MeetingSurprise> read_surprises_csv(const std::string& path);
MacroPanel read_macro_csv(const std::string& path);
void write_shocks_csv(const std::string& path, const ShockSeries& shocks);
ShockSeries read_shocks_csv(const std::string& path);

}  // namespace mcn::shock
