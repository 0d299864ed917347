#include "mcn/timeseries.hpp"

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

namespace mcn::ts {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// MacKinnon (1994) response-surface p-value, constant-only Dickey-Fuller case.
double mackinnon_pvalue_c(double stat) {
    constexpr double tau_max = 2.74, tau_min = -18.83, tau_star = -1.61;
    if (stat > tau_max) return 1.0;
    if (stat < tau_min) return 0.0;
    double z;
    if (stat <= tau_star) {
        z = 2.1659 + 1.4412 * stat + 0.038269 * stat * stat;
    } else {
        z = 1.7339 + 0.93202 * stat - 0.12745 * stat * stat - 0.010368 * stat * stat * stat;
    }
    return norm_cdf(z);
}

struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    double ssr = 0;
    int nobs = 0;
};

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    OlsFit fit;
    fit.nobs = static_cast<int>(x.rows());
    const Eigen::MatrixXd xtx = x.transpose() * x;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    if (ldlt.info() != Eigen::Success) throw numerical_error("singular regressor matrix in OLS");
    fit.coef = ldlt.solve(x.transpose() * y);
    const Eigen::VectorXd resid = y - x * fit.coef;
    fit.ssr = resid.squaredNorm();
    const int dof = fit.nobs - static_cast<int>(x.cols());
    if (dof <= 0) throw data_error("OLS sample too small for regressor count");
    const double s2 = fit.ssr / dof;
    const Eigen::MatrixXd xtx_inv =
        ldlt.solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
    fit.se = (s2 * xtx_inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
    return fit;
}

// Dickey-Fuller design at lag k: rows start..n_d-1 of the differenced series,
// columns [1, y_{t-1}, dy_{t-1}, ..., dy_{t-k}].
void build_df_design(std::span<const double> y, const std::vector<double>& dy, int k, int start,
                     Eigen::MatrixXd& x, Eigen::VectorXd& b) {
    const int n_d = static_cast<int>(dy.size());
    const int rows = n_d - start;
    x.resize(rows, 2 + k);
    b.resize(rows);
    for (int t = start; t < n_d; ++t) {
        const int r = t - start;
        b(r) = dy[static_cast<size_t>(t)];
        x(r, 0) = 1.0;
        x(r, 1) = y[static_cast<size_t>(t)];  // level y_{t-1} relative to dy_t
        for (int i = 1; i <= k; ++i) x(r, 1 + i) = dy[static_cast<size_t>(t - i)];
    }
}

void central_moments(std::span<const double> v, double& mean, double& m2, double& m3, double& m4) {
    const double n = static_cast<double>(v.size());
    mean = 0;
    for (double x : v) mean += x;
    mean /= n;
    m2 = m3 = m4 = 0;
    for (double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
}

}  // namespace

FomcDecision parse_decision(const std::string& text) {
    if (text == "hike") return FomcDecision::hike;
    if (text == "cut") return FomcDecision::cut;
    if (text == "unchanged") return FomcDecision::unchanged;
    throw data_error("unknown FOMC decision: '" + text + "'");
}

std::string decision_name(FomcDecision d) {
    switch (d) {
        case FomcDecision::hike: return "hike";
        case FomcDecision::cut: return "cut";
        case FomcDecision::unchanged: return "unchanged";
    }
    return "?";
}

PricePanel align_calendars(std::span<const RawSeries> series) {
    if (series.empty()) throw data_error("align_calendars: no input series");
    for (const auto& s : series) {
        if (s.dates.size() < 2) throw data_error("series '" + s.name + "' has fewer than 2 observations");
        if (s.dates.size() != s.values.size())
            throw data_error("series '" + s.name + "' has mismatched dates/values");
        for (size_t i = 1; i < s.dates.size(); ++i) {
            if (!(s.dates[i - 1] < s.dates[i]))
                throw data_error("series '" + s.name + "' dates not strictly increasing");
        }
    }

    std::set<Date> common(series[0].dates.begin(), series[0].dates.end());
    for (size_t k = 1; k < series.size(); ++k) {
        std::set<Date> next;
        const std::set<Date> theirs(series[k].dates.begin(), series[k].dates.end());
        std::set_intersection(common.begin(), common.end(), theirs.begin(), theirs.end(),
                              std::inserter(next, next.begin()));
        common.swap(next);
    }
    if (common.empty()) throw data_error("calendar alignment failed: no common trading dates");

    PricePanel panel;
    panel.dates.assign(common.begin(), common.end());
    panel.values.resize(static_cast<Eigen::Index>(panel.dates.size()),
                        static_cast<Eigen::Index>(series.size()));
    for (size_t k = 0; k < series.size(); ++k) {
        panel.names.push_back(series[k].name);
        size_t src = 0;
        for (size_t t = 0; t < panel.dates.size(); ++t) {
            while (series[k].dates[src] < panel.dates[t]) ++src;
            panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) =
                series[k].values[src];
        }
    }
    return panel;
}

ReturnPanel log_returns(const PricePanel& panel) {
    const Eigen::Index t_count = panel.values.rows();
    const Eigen::Index n = panel.values.cols();
    if (t_count < 2) throw data_error("log_returns: need at least 2 price rows");
    if ((panel.values.array() <= 0.0).any())
        throw data_error("log_returns: nonpositive price encountered");

    ReturnPanel out;
    out.names = panel.names;
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.values.resize(t_count - 1, n);
    for (Eigen::Index t = 1; t < t_count; ++t) {
        out.values.row(t - 1) =
            100.0 * (panel.values.row(t).array() / panel.values.row(t - 1).array()).log();
    }
    return out;
}

AdfResult adf_test(std::span<const double> series, int max_lag) {
    const int n = static_cast<int>(series.size());
    if (n < 15) throw data_error("adf_test: series too short");
    if (max_lag < 0) {
        max_lag = static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25)));
    }
    // Keep enough rows on the common selection sample.
    max_lag = std::min(max_lag, (n - 1) / 2 - 2);
    if (max_lag < 0) max_lag = 0;

    std::vector<double> dy(static_cast<size_t>(n - 1));
    for (int t = 1; t < n; ++t) dy[static_cast<size_t>(t - 1)] = series[static_cast<size_t>(t)] - series[static_cast<size_t>(t - 1)];

    Eigen::MatrixXd x;
    Eigen::VectorXd b;
    int best_k = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= max_lag; ++k) {
        build_df_design(series, dy, k, max_lag, x, b);
        const OlsFit fit = ols(x, b);
        const double sigma2 = fit.ssr / fit.nobs;
        if (sigma2 <= 0) throw data_error("adf_test: degenerate variance");
        const double aic = fit.nobs * std::log(sigma2) + 2.0 * (k + 2);
        if (aic < best_aic) {
            best_aic = aic;
            best_k = k;
        }
    }

    // Refit at the chosen lag on the longest available sample.
    build_df_design(series, dy, best_k, best_k, x, b);
    const OlsFit fit = ols(x, b);
    AdfResult res;
    res.lags = best_k;
    res.stat = fit.coef(1) / fit.se(1);
    res.pvalue = mackinnon_pvalue_c(res.stat);
    return res;
}

JbResult jarque_bera(std::span<const double> series) {
    const double n = static_cast<double>(series.size());
    double mean, m2, m3, m4;
    central_moments(series, mean, m2, m3, m4);
    if (m2 <= 0) throw data_error("jarque_bera: degenerate variance (constant series)");
    const double s = m3 / std::pow(m2, 1.5);
    const double k = m4 / (m2 * m2) - 3.0;
    JbResult r;
    r.stat = n / 6.0 * (s * s + k * k / 4.0);
    r.pvalue = std::exp(-r.stat / 2.0);  // chi-square with 2 dof
    return r;
}

SummaryStats summary_stats(const ReturnPanel& returns, int adf_max_lag) {
    const Eigen::Index t_count = returns.values.rows();
    if (t_count < 30) throw data_error("summary_stats: need at least 30 observations per series");

    SummaryStats out;
    out.names = returns.names;
    for (Eigen::Index j = 0; j < returns.values.cols(); ++j) {
        std::vector<double> v(static_cast<size_t>(t_count));
        for (Eigen::Index t = 0; t < t_count; ++t) v[static_cast<size_t>(t)] = returns.values(t, j);

        SeriesStats s;
        double m2, m3, m4;
        central_moments(v, s.mean, m2, m3, m4);
        if (m2 <= 0)
            throw data_error("summary_stats: series '" + returns.names[static_cast<size_t>(j)] +
                             "' has degenerate variance");
        s.stddev = std::sqrt(m2 * t_count / (t_count - 1.0));
        s.max = *std::max_element(v.begin(), v.end());
        s.min = *std::min_element(v.begin(), v.end());
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        const JbResult jb = jarque_bera(v);
        s.jb_stat = jb.stat;
        s.jb_pvalue = jb.pvalue;
        const AdfResult adf = adf_test(v, adf_max_lag);
        s.adf_stat = adf.stat;
        s.adf_pvalue = adf.pvalue;
        s.adf_lags = adf.lags;
        out.stats.push_back(s);
    }
    return out;
}

PricePanel read_price_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    if (t.header.size() < 2 || t.header[0] != "date")
        throw data_error(path + ": expected header 'date,<name1>,...'");
    if (t.rows.empty()) throw data_error(path + ": no data rows");

    PricePanel panel;
    panel.names.assign(t.header.begin() + 1, t.header.end());
    panel.values.resize(static_cast<Eigen::Index>(t.rows.size()),
                        static_cast<Eigen::Index>(panel.names.size()));
    for (size_t r = 0; r < t.rows.size(); ++r) {
        panel.dates.push_back(parse_date(t.rows[r][0]));
        if (r > 0 && !(panel.dates[r - 1] < panel.dates[r]))
            throw data_error(path + ": dates not strictly increasing at row " + std::to_string(r + 2));
        for (size_t c = 1; c < t.rows[r].size(); ++c) {
            const double v = csv::to_double(t.rows[r][c], path);
            if (v <= 0) throw data_error(path + ": nonpositive price at row " + std::to_string(r + 2));
            panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = v;
        }
    }
    return panel;
}

EventCalendar read_events_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const int c_date = t.column("date");
    const int c_dec = t.column("decision");
    if (c_date < 0 || c_dec < 0) throw data_error(path + ": expected header 'date,decision'");

    EventCalendar cal;
    for (const auto& row : t.rows) {
        EventCalendar::Record rec;
        rec.date = parse_date(row[static_cast<size_t>(c_date)]);
        rec.decision = parse_decision(row[static_cast<size_t>(c_dec)]);
        if (!cal.records.empty() && !(cal.records.back().date < rec.date))
            throw data_error(path + ": event dates must be unique and increasing");
        cal.records.push_back(rec);
    }
    return cal;
}

void write_summary_csv(const std::string& path, const SummaryStats& summary) {
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < summary.names.size(); ++i) {
        const SeriesStats& s = summary.stats[i];
        rows.push_back({summary.names[i], csv::format_double(s.mean), csv::format_double(s.stddev),
                        csv::format_double(s.max), csv::format_double(s.min),
                        csv::format_double(s.skewness), csv::format_double(s.excess_kurtosis),
                        csv::format_double(s.adf_stat), csv::format_double(s.adf_pvalue),
                        std::to_string(s.adf_lags), csv::format_double(s.jb_stat),
                        csv::format_double(s.jb_pvalue)});
    }
    csv::write_file(path,
                    {"series", "mean", "std", "max", "min", "skew", "kurt", "adf", "adf_pvalue",
                     "adf_lags", "jb", "jb_pvalue"},
                    rows);
}

}  // namespace mcn::ts
