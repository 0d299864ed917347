#pragma once

#include "mcn/calendar.hpp"
#include "mcn/shocks.hpp"
#include "mcn/timeseries.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mcn::lp {

/// Monthly 0/1 regime indicators derived from the FOMC calendar plus the
/// adjacency rule: an unchanged meeting adjacent to a directional one whose
/// month's shock shares that direction also flags the directional dummy.
struct RegimeDummies {
    int first_month = 0;
    Eigen::VectorXi hike, unch, cut;

    int months() const { return static_cast<int>(hike.size()); }
};

RegimeDummies build_dummies(const ts::EventCalendar& events, const shock::ShockSeries& shocks);

struct LpOptions {
    int h_max = 18;
    bool include_lagged_dep = true;
    bool include_controls = true;
    double band_inner = 0.68;
    double band_outer = 0.90;
};

/// Regressor order: intercept, lagged index (optional), shock x hike,
/// shock x unch, shock x cut, delta-CPI, delta-IP (optional).
enum RegressorIndex { kConst = 0, kLag, kHike, kUnch, kCut, kCpi, kIp, kRegressorCount };

struct HorizonFit {
    int h = 0;
    int nobs = 0;
    Eigen::VectorXd coef, se, pvalue;          // size kRegressorCount; NaN when absent
    Eigen::VectorXd inner_lo, inner_hi;        // band_inner
    Eigen::VectorXd outer_lo, outer_hi;        // band_outer
    std::vector<bool> identified;              // false = regressor dropped as not identified
    Eigen::VectorXd resid;
    bool hac_fallback = false;
};

/// Aligned monthly inputs for the projections; all vectors share first_month.
struct LpInput {
    int first_month = 0;
    Eigen::VectorXd index;   // dependent connectedness index
    Eigen::VectorXd shock;   // S^MP
    RegimeDummies dummies;
    Eigen::VectorXd d_cpi;   // first-differenced controls
    Eigen::VectorXd d_ip;
};

HorizonFit lp_regress(const LpInput& input, int h, const LpOptions& options);
std::vector<HorizonFit> run_horizons(const LpInput& input, const LpOptions& options);

/// Newey-West standard errors with Bartlett weights and truncation `lag`;
/// falls back to the heteroskedasticity-robust form if the HAC variance
/// turns nonpositive.
struct HacResult {
    Eigen::VectorXd se;
    bool fallback = false;
};
HacResult robust_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid, int lag);

/// Signed significance score sign(coef) * (1 - p)^7.
double heat_indicator(double coef, double pvalue);

/// Two-sided normal p-value and quantile helpers shared with the writers.
double normal_pvalue(double z);
double normal_quantile(double p);

enum class MonthlyAgg { end_of_month, mean };

struct MonthlySeries {
    int first_month = 0;
    Eigen::VectorXd values;
};

/// Collapses a daily series onto consecutive months.
MonthlySeries to_monthly(const std::vector<Date>& dates, const Eigen::VectorXd& daily,
                         MonthlyAgg agg);

void write_lp_csv(const std::string& path, const std::vector<HorizonFit>& fits);

struct HeatRow {
    std::string node;
    int h = 0;
    std::string regime;  // hike | unch | cut
    double s = 0;
};
void write_heat_csv(const std::string& path, const std::vector<HeatRow>& rows);

}  // namespace mcn::lp
