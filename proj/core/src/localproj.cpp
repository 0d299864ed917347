#include "mcn/localproj.hpp"

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace mcn::lp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const char* regressor_name(int r) {
    switch (r) {
        case kConst: return "const";
        case kLag: return "lagged_index";
        case kHike: return "shock_x_hike";
        case kUnch: return "shock_x_unch";
        case kCut: return "shock_x_cut";
        case kCpi: return "d_cpi";
        case kIp: return "d_ip";
    }
    return "?";
}

}  // namespace

double normal_pvalue(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

// Acklam's rational approximation refined by one Halley step; good to
// machine precision over (0, 1).
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw data_error("normal_quantile: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

RegimeDummies build_dummies(const ts::EventCalendar& events, const shock::ShockSeries& shocks) {
    RegimeDummies dummies;
    dummies.first_month = shocks.first_month;
    const int n = shocks.months();
    dummies.hike = Eigen::VectorXi::Zero(n);
    dummies.unch = Eigen::VectorXi::Zero(n);
    dummies.cut = Eigen::VectorXi::Zero(n);

    const auto month_of = [&](const ts::EventCalendar::Record& r) {
        return r.date.month_index() - shocks.first_month;
    };

    // Base dummies from the announcement decisions. A hike and a cut in the
    // same month is contradictory input.
    std::map<int, std::pair<bool, bool>> directional;  // month -> (hike seen, cut seen)
    for (const auto& rec : events.records) {
        const int at = month_of(rec);
        if (at < 0 || at >= n) continue;
        auto& [saw_hike, saw_cut] = directional[at];
        if (rec.decision == ts::FomcDecision::hike) saw_hike = true;
        if (rec.decision == ts::FomcDecision::cut) saw_cut = true;
        if (saw_hike && saw_cut)
            throw data_error("conflicting FOMC decisions in month " +
                             format_month(rec.date.month_index()));
    }
    for (const auto& rec : events.records) {
        const int at = month_of(rec);
        if (at < 0 || at >= n) continue;
        switch (rec.decision) {
            case ts::FomcDecision::hike: dummies.hike(at) = 1; break;
            case ts::FomcDecision::cut: dummies.cut(at) = 1; break;
            case ts::FomcDecision::unchanged: {
                const auto& [saw_hike, saw_cut] = directional[at];
                if (!saw_hike && !saw_cut) dummies.unch(at) = 1;
                break;
            }
        }
    }

    // Adjacency rule over the meeting sequence, both directions: an
    // unchanged meeting next to a directional one joins that regime when its
    // month's shock shares the direction.
    for (size_t i = 0; i < events.records.size(); ++i) {
        if (events.records[i].decision != ts::FomcDecision::unchanged) continue;
        const int at = month_of(events.records[i]);
        if (at < 0 || at >= n) continue;
        const double shock_here = shocks.mp(at);
        for (const int j : {static_cast<int>(i) - 1, static_cast<int>(i) + 1}) {
            if (j < 0 || j >= static_cast<int>(events.records.size())) continue;
            const auto adj = events.records[static_cast<size_t>(j)].decision;
            if (adj == ts::FomcDecision::hike && shock_here > 0) dummies.hike(at) = 1;
            if (adj == ts::FomcDecision::cut && shock_here < 0) dummies.cut(at) = 1;
        }
    }
    return dummies;
}

HorizonFit lp_regress(const LpInput& input, int h, const LpOptions& options) {
    if (h < 0) throw config_error("lp_regress: horizon must be >= 0");
    const int n = static_cast<int>(input.index.size());
    if (input.shock.size() != n || input.dummies.months() != n)
        throw data_error("lp_regress: inputs not aligned");
    if (options.include_controls && (input.d_cpi.size() != n || input.d_ip.size() != n))
        throw data_error("lp_regress: controls not aligned");

    const int t_start = options.include_lagged_dep ? 1 : 0;
    const int t_end = n - 1 - h;  // inclusive
    const int nobs = t_end - t_start + 1;

    std::vector<int> active{kConst};
    if (options.include_lagged_dep) active.push_back(kLag);
    active.push_back(kHike);
    active.push_back(kUnch);
    active.push_back(kCut);
    if (options.include_controls) {
        active.push_back(kCpi);
        active.push_back(kIp);
    }
    if (nobs < 10 + static_cast<int>(active.size()))
        throw data_error("lp_regress: horizon " + std::to_string(h) +
                         " leaves too small a sample (" + std::to_string(nobs) + " rows)");

    Eigen::MatrixXd x(nobs, static_cast<Eigen::Index>(active.size()));
    Eigen::VectorXd yv(nobs);
    for (int t = t_start; t <= t_end; ++t) {
        const int r = t - t_start;
        yv(r) = input.index(t + h);
        for (size_t c = 0; c < active.size(); ++c) {
            double v = 0;
            switch (active[c]) {
                case kConst: v = 1.0; break;
                case kLag: v = input.index(t - 1); break;
                case kHike: v = input.shock(t) * input.dummies.hike(t); break;
                case kUnch: v = input.shock(t) * input.dummies.unch(t); break;
                case kCut: v = input.shock(t) * input.dummies.cut(t); break;
                case kCpi: v = input.d_cpi(t); break;
                case kIp: v = input.d_ip(t); break;
            }
            x(r, static_cast<Eigen::Index>(c)) = v;
        }
    }

    HorizonFit fit;
    fit.h = h;
    fit.nobs = nobs;
    fit.coef = Eigen::VectorXd::Constant(kRegressorCount, kNan);
    fit.se = Eigen::VectorXd::Constant(kRegressorCount, kNan);
    fit.pvalue = Eigen::VectorXd::Constant(kRegressorCount, kNan);
    fit.inner_lo = Eigen::VectorXd::Constant(kRegressorCount, kNan);
    fit.inner_hi = Eigen::VectorXd::Constant(kRegressorCount, kNan);
    fit.outer_lo = Eigen::VectorXd::Constant(kRegressorCount, kNan);
    fit.outer_hi = Eigen::VectorXd::Constant(kRegressorCount, kNan);
    fit.identified.assign(kRegressorCount, false);

    // Exactly-zero columns cannot be estimated. A regime interaction that is
    // zero because its dummy never fires (while the shock itself varies) is
    // reported as not identified; any other zero column takes the
    // pseudoinverse convention: coefficient exactly 0.
    const bool shock_all_zero = (input.shock.array() == 0.0).all();
    std::vector<int> solving;
    for (size_t c = 0; c < active.size(); ++c) {
        const bool zero_col = (x.col(static_cast<Eigen::Index>(c)).array() == 0.0).all();
        const int reg = active[c];
        if (!zero_col) {
            solving.push_back(static_cast<int>(c));
            continue;
        }
        const bool regime = reg == kHike || reg == kUnch || reg == kCut;
        if (regime && !shock_all_zero) {
            fit.identified[static_cast<size_t>(reg)] = false;  // dropped, not identified
        } else {
            fit.coef(reg) = 0.0;
            fit.se(reg) = 0.0;
            fit.pvalue(reg) = 1.0;
            fit.identified[static_cast<size_t>(reg)] = true;
        }
    }

    Eigen::MatrixXd xs(nobs, static_cast<Eigen::Index>(solving.size()));
    for (size_t c = 0; c < solving.size(); ++c)
        xs.col(static_cast<Eigen::Index>(c)) = x.col(solving[c]);

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
    if (qr.rank() < static_cast<Eigen::Index>(solving.size())) {
        // Columns beyond the numerical rank, in pivot order, are the culprits.
        std::string names;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < perm.size(); ++k) {
            if (!names.empty()) names += ", ";
            names += regressor_name(active[static_cast<size_t>(solving[static_cast<size_t>(perm(k))])]);
        }
        throw data_error("lp_regress: collinear regressors at horizon " + std::to_string(h) + ": " +
                         names);
    }
    const Eigen::VectorXd beta = qr.solve(yv);
    fit.resid = yv - xs * beta;

    const HacResult hac = robust_se(xs, fit.resid, h);
    fit.hac_fallback = hac.fallback;

    const double z_inner = normal_quantile(0.5 + options.band_inner / 2.0);
    const double z_outer = normal_quantile(0.5 + options.band_outer / 2.0);
    for (size_t c = 0; c < solving.size(); ++c) {
        const int reg = active[static_cast<size_t>(solving[c])];
        const double b = beta(static_cast<Eigen::Index>(c));
        const double s = hac.se(static_cast<Eigen::Index>(c));
        fit.coef(reg) = b;
        fit.se(reg) = s;
        fit.pvalue(reg) = s > 0 ? normal_pvalue(b / s) : (b == 0.0 ? 1.0 : 0.0);
        fit.inner_lo(reg) = b - z_inner * s;
        fit.inner_hi(reg) = b + z_inner * s;
        fit.outer_lo(reg) = b - z_outer * s;
        fit.outer_hi(reg) = b + z_outer * s;
        fit.identified[static_cast<size_t>(reg)] = true;
    }
    // Bands for pseudo-zero columns collapse to the point.
    for (int reg = 0; reg < kRegressorCount; ++reg) {
        if (fit.identified[static_cast<size_t>(reg)] && fit.se(reg) == 0.0 && fit.coef(reg) == 0.0) {
            fit.inner_lo(reg) = fit.inner_hi(reg) = 0.0;
            fit.outer_lo(reg) = fit.outer_hi(reg) = 0.0;
        }
    }
    return fit;
}

std::vector<HorizonFit> run_horizons(const LpInput& input, const LpOptions& options) {
    std::vector<HorizonFit> fits;
    fits.reserve(static_cast<size_t>(options.h_max) + 1);
    for (int h = 0; h <= options.h_max; ++h) fits.push_back(lp_regress(input, h, options));
    return fits;
}

HacResult robust_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid, int lag) {
    const auto n = x.rows();
    const auto k = x.cols();
    if (resid.size() != n) throw data_error("robust_se: residual length mismatch");

    const Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(k, k));

    const auto meat = [&](int max_lag) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index t = 0; t < n; ++t)
            s.noalias() += resid(t) * resid(t) * x.row(t).transpose() * x.row(t);
        for (int l = 1; l <= max_lag; ++l) {
            const double w = 1.0 - static_cast<double>(l) / (max_lag + 1.0);
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
            for (Eigen::Index t = l; t < n; ++t)
                g.noalias() += resid(t) * resid(t - l) * x.row(t).transpose() * x.row(t - l);
            s.noalias() += w * (g + g.transpose());
        }
        return s;
    };

    HacResult out;
    Eigen::MatrixXd v = xtx_inv * meat(lag) * xtx_inv;
    if ((v.diagonal().array() <= 0).any() && lag > 0) {
        v = xtx_inv * meat(0) * xtx_inv;
        out.fallback = true;
    }
    out.se = v.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

double heat_indicator(double coef, double pvalue) {
    if (!(pvalue >= 0.0 && pvalue <= 1.0)) throw data_error("heat_indicator: p outside [0,1]");
    const double direction = coef > 0 ? 1.0 : (coef < 0 ? -1.0 : 0.0);
    return direction * std::pow(1.0 - pvalue, 7.0);
}

MonthlySeries to_monthly(const std::vector<Date>& dates, const Eigen::VectorXd& daily,
                         MonthlyAgg agg) {
    if (dates.empty() || static_cast<Eigen::Index>(dates.size()) != daily.size())
        throw data_error("to_monthly: dates/values mismatch");
    MonthlySeries out;
    out.first_month = dates.front().month_index();
    const int n_months = dates.back().month_index() - out.first_month + 1;
    out.values.setZero(n_months);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(n_months);
    for (size_t t = 0; t < dates.size(); ++t) {
        const int at = dates[t].month_index() - out.first_month;
        counts(at) += 1;
        if (agg == MonthlyAgg::end_of_month) {
            out.values(at) = daily(static_cast<Eigen::Index>(t));  // dates ascend, last wins
        } else {
            out.values(at) += daily(static_cast<Eigen::Index>(t));
        }
    }
    for (int m = 0; m < n_months; ++m) {
        if (counts(m) == 0)
            throw data_error("to_monthly: no observations in " + format_month(out.first_month + m));
        if (agg == MonthlyAgg::mean) out.values(m) /= counts(m);
    }
    return out;
}

void write_lp_csv(const std::string& path, const std::vector<HorizonFit>& fits) {
    const std::vector<std::pair<int, std::string>> regimes{
        {kHike, "hike"}, {kUnch, "unch"}, {kCut, "cut"}};
    std::vector<std::string> header{"h"};
    for (const auto& [reg, name] : regimes) {
        header.push_back("coef_" + name);
        header.push_back("se_" + name);
        header.push_back("p_" + name);
    }
    for (const auto& [reg, name] : regimes) {
        header.push_back("band68_lo_" + name);
        header.push_back("band68_hi_" + name);
        header.push_back("band90_lo_" + name);
        header.push_back("band90_hi_" + name);
    }

    std::vector<std::vector<std::string>> rows;
    for (const auto& fit : fits) {
        std::vector<std::string> row{std::to_string(fit.h)};
        for (const auto& [reg, name] : regimes) {
            row.push_back(csv::format_double(fit.coef(reg)));
            row.push_back(csv::format_double(fit.se(reg)));
            row.push_back(csv::format_double(fit.pvalue(reg)));
        }
        for (const auto& [reg, name] : regimes) {
            row.push_back(csv::format_double(fit.inner_lo(reg)));
            row.push_back(csv::format_double(fit.inner_hi(reg)));
            row.push_back(csv::format_double(fit.outer_lo(reg)));
            row.push_back(csv::format_double(fit.outer_hi(reg)));
        }
        rows.push_back(std::move(row));
    }
    csv::write_file(path, header, rows);
}

void write_heat_csv(const std::string& path, const std::vector<HeatRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.node, std::to_string(r.h), r.regime, csv::format_double(r.s)});
    csv::write_file(path, {"node", "h", "regime", "s"}, out);
}

}  // namespace mcn::lp
