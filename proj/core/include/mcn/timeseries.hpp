#pragma once

#include "mcn/calendar.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace mcn::ts {

/// Daily closing prices on a common trading calendar. Rows are dates.
struct PricePanel {
    std::vector<Date> dates;
    Eigen::MatrixXd values;  // T x N, strictly positive
    std::vector<std::string> names;
};

/// Percent log returns, r_t = 100 * ln(P_t / P_{t-1}). One row fewer than prices.
struct ReturnPanel {
    std::vector<Date> dates;
    Eigen::MatrixXd values;  // (T-1) x N
    std::vector<std::string> names;
};

/// One raw series before calendar alignment.
struct RawSeries {
    std::string name;
    std::vector<Date> dates;
    std::vector<double> values;
};

struct SeriesStats {
    double mean = 0;
    double stddev = 0;  // sample (n-1) standard deviation
    double max = 0;
    double min = 0;
    double skewness = 0;         // m3 / m2^{3/2}, biased central moments
    double excess_kurtosis = 0;  // m4 / m2^2 - 3
    double adf_stat = 0;
    double adf_pvalue = 0;
    int adf_lags = 0;
    double jb_stat = 0;
    double jb_pvalue = 0;
};

struct SummaryStats {
    std::vector<std::string> names;
    std::vector<SeriesStats> stats;
};

enum class FomcDecision { hike, cut, unchanged };

struct EventCalendar {
    struct Record {
        Date date;
        FomcDecision decision;
    };
    std::vector<Record> records;  // dates unique and increasing
};

FomcDecision parse_decision(const std::string& text);
std::string decision_name(FomcDecision d);

/// Restricts all series to the intersection of their trading dates.
/// Throws data_error when the intersection is empty or a series has < 2 points.
PricePanel align_calendars(std::span<const RawSeries> series);

ReturnPanel log_returns(const PricePanel& panel);

/// Dickey-Fuller t-statistic of the lagged level in a regression with intercept.
/// `max_lag < 0` selects the Schwert default floor(12*(T/100)^{1/4});
/// the lag order itself is picked by AIC over 0..max_lag on a common sample.
struct AdfResult {
    double stat = 0;
    double pvalue = 0;
    int lags = 0;
};
AdfResult adf_test(std::span<const double> series, int max_lag = -1);

/// Jarque-Bera statistic n/6*(S^2 + K^2/4) with its chi-square(2) p-value.
struct JbResult {
    double stat = 0;
    double pvalue = 0;
};
JbResult jarque_bera(std::span<const double> series);

SummaryStats summary_stats(const ReturnPanel& returns, int adf_max_lag = -1);

// CSV bindings for the file formats consumed and produced by this module.
PricePanel read_price_csv(const std::string& path);
EventCalendar read_events_csv(const std::string& path);
void write_summary_csv(const std::string& path, const SummaryStats& summary);

}  // namespace mcn::ts
