#include "mcn/shocks.hpp"

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace mcn::shock {

namespace {

// Lower Cholesky with a positivity check.
Eigen::MatrixXd chol_lower(const Eigen::MatrixXd& a, const char* what) {
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw numerical_error(std::string(what) + ": matrix not positive definite");
    return llt.matrixL();
}

// Bartlett decomposition draw from Wishart(scale, dof); scale given by its
// lower Cholesky factor.
Eigen::MatrixXd wishart_draw(const Eigen::MatrixXd& scale_chol, double dof, std::mt19937_64& rng) {
    const auto d = scale_chol.rows();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        std::chi_squared_distribution<double> chi2(dof - static_cast<double>(i));
        a(i, i) = std::sqrt(chi2(rng));
        for (Eigen::Index j = 0; j < i; ++j) a(i, j) = normal(rng);
    }
    const Eigen::MatrixXd la = scale_chol * a;
    return la * la.transpose();
}

// Inverse-Wishart(scale, dof) via the Wishart of the inverted scale.
Eigen::MatrixXd inv_wishart_draw(const Eigen::MatrixXd& scale, double dof, std::mt19937_64& rng) {
    const Eigen::MatrixXd scale_inv = scale.llt().solve(Eigen::MatrixXd::Identity(scale.rows(), scale.cols()));
    const Eigen::MatrixXd w = wishart_draw(chol_lower(scale_inv, "inverse-Wishart scale"), dof, rng);
    return w.llt().solve(Eigen::MatrixXd::Identity(w.rows(), w.cols()));
}

double median_of(std::vector<double>& v) {
    const size_t n = v.size();
    const size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid - 1), v.end());
    return 0.5 * (v[mid - 1] + hi);
}

}  // namespace

SurprisePanel aggregate_surprises(const std::vector<MeetingSurprise>& events, int first_month,
                                  int n_months) {
    if (n_months < 1) throw data_error("aggregate_surprises: empty month range");
    std::set<Date> seen;
    SurprisePanel panel;
    panel.first_month = first_month;
    panel.values = Eigen::MatrixX2d::Zero(n_months, 2);
    panel.has_meeting.assign(static_cast<size_t>(n_months), false);
    for (const auto& e : events) {
        if (!seen.insert(e.date).second)
            throw data_error("duplicate meeting record on " + format_date(e.date));
        const int at = e.date.month_index() - first_month;
        if (at < 0 || at >= n_months) continue;  // outside the requested range
        panel.values(at, 0) += e.fff;
        panel.values(at, 1) += e.spx;
        panel.has_meeting[static_cast<size_t>(at)] = true;
    }
    return panel;
}

Eigen::MatrixXd full_lag_matrix(const BvarDraw& draw, int p, int lag) {
    if (lag < 1 || lag > p) throw data_error("full_lag_matrix: lag out of range");
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(7, 7);
    full.bottomRows(5) = draw.y_lag.middleCols(7 * (lag - 1), 7);
    return full;
}

std::vector<BvarDraw> fit_restricted_bvar(const SurprisePanel& m, const MacroPanel& y,
                                          const BvarConfig& config) {
    if (m.first_month != y.first_month || m.months() != y.months())
        throw data_error("fit_restricted_bvar: surprise and macro panels not aligned");
    if (config.p < 1) throw config_error("fit_restricted_bvar: p must be >= 1");
    const int t_total = m.months();
    const int p = config.p;
    const int t_eff = t_total - p;
    if (t_total <= 7 * p + 20) throw data_error("fit_restricted_bvar: sample too short");

    // Stacked regressors for the macro equations: intercept, p lags of
    // (m, y), and the contemporaneous surprises. Conditioning on m_t turns
    // the correlated system into two conjugate blocks.
    const int k = 1 + 7 * p + 2;
    Eigen::MatrixXd x(t_eff, k);
    Eigen::MatrixXd yy(t_eff, 5);
    Eigen::MatrixXd mm(t_eff, 2);
    for (int t = p; t < t_total; ++t) {
        const int r = t - p;
        yy.row(r) = y.values.row(t);
        mm.row(r) = m.values.row(t);
        x(r, 0) = 1.0;
        for (int l = 1; l <= p; ++l) {
            x.block(r, 1 + 7 * (l - 1), 1, 2) = m.values.row(t - l);
            x.block(r, 1 + 7 * (l - 1) + 2, 1, 5) = y.values.row(t - l);
        }
        x.block(r, 1 + 7 * p, 1, 2) = m.values.row(t);
    }

    const Eigen::MatrixXd xtx = x.transpose() * x;
    {
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
        if (lu.rank() < k) throw data_error("fit_restricted_bvar: rank-deficient regressor matrix");
    }

    // Surprise block: zero-mean white noise, inverse-Wishart posterior.
    Eigen::MatrixXd s_mm = mm.transpose() * mm;
    Eigen::MatrixXd mm_centered = mm.rowwise() - mm.colwise().mean();
    const Eigen::MatrixXd prior_mm =
        0.1 * (mm_centered.transpose() * mm_centered) / static_cast<double>(t_eff - 1);
    const double dof_mm = 2 + 2;

    // Macro block: conjugate normal-inverse-Wishart regression posterior.
    const double prior_coef_var = 100.0;
    Eigen::MatrixXd vn_inv = xtx;
    vn_inv.diagonal().array() += 1.0 / prior_coef_var;
    const Eigen::LLT<Eigen::MatrixXd> vn_llt(vn_inv);
    const Eigen::MatrixXd coef_mean = vn_llt.solve(x.transpose() * yy);  // k x 5
    const Eigen::MatrixXd resid = yy - x * coef_mean;
    const Eigen::MatrixXd prior_e = 0.1 * (resid.transpose() * resid) / static_cast<double>(t_eff - 1);
    const Eigen::MatrixXd s_e = prior_e + resid.transpose() * resid +
                                coef_mean.transpose() * (1.0 / prior_coef_var) * coef_mean;
    const double dof_e = 5 + 2;

    // Cholesky of V_n for the matrix-normal coefficient draws.
    const Eigen::MatrixXd vn = vn_llt.solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd vn_chol = chol_lower(0.5 * (vn + vn.transpose()), "coefficient covariance");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<BvarDraw> draws;
    draws.reserve(static_cast<size_t>(config.draws));
    for (int d = 0; d < config.draws; ++d) {
        const Eigen::MatrixXd sigma_mm =
            inv_wishart_draw(prior_mm + s_mm, dof_mm + t_eff, rng);
        const Eigen::MatrixXd sigma_e = inv_wishart_draw(s_e, dof_e + t_eff, rng);

        Eigen::MatrixXd noise(k, 5);
        for (Eigen::Index i = 0; i < noise.rows(); ++i)
            for (Eigen::Index j = 0; j < noise.cols(); ++j) noise(i, j) = normal(rng);
        const Eigen::MatrixXd coef =
            coef_mean + vn_chol * noise * chol_lower(sigma_e, "sigma_e").transpose();

        BvarDraw draw;
        draw.y_intercept = coef.row(0).transpose();
        draw.y_lag = coef.middleRows(1, 7 * p).transpose();  // 5 x 7p
        const Eigen::MatrixXd gamma = coef.bottomRows(2).transpose();  // 5 x 2

        draw.sigma.resize(7, 7);
        draw.sigma.topLeftCorner(2, 2) = sigma_mm;
        draw.sigma.topRightCorner(2, 5) = (gamma * sigma_mm).transpose();
        draw.sigma.bottomLeftCorner(5, 2) = gamma * sigma_mm;
        draw.sigma.bottomRightCorner(5, 5) = sigma_e + gamma * sigma_mm * gamma.transpose();
        draws.push_back(std::move(draw));
    }
    return draws;
}

std::vector<StructuralDraw> identify_signs(const std::vector<BvarDraw>& draws,
                                           int angles_per_draw, std::uint64_t seed) {
    if (angles_per_draw < 1) throw config_error("identify_signs: need at least one angle");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform_angle(0.0, 2.0 * std::numbers::pi);

    std::vector<StructuralDraw> accepted;
    for (size_t d = 0; d < draws.size(); ++d) {
        const Eigen::Matrix2d sigma_mm = draws[d].sigma.topLeftCorner(2, 2);
        const Eigen::Matrix2d chol = chol_lower(sigma_mm, "surprise covariance").topLeftCorner(2, 2);
        for (int a = 0; a < angles_per_draw; ++a) {
            const double theta = uniform_angle(rng);
            Eigen::Matrix2d rot;
            rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
            Eigen::Matrix2d impact = chol * rot;
            // Normalize both shocks to raise the rate, then test the equity
            // comovement: opposite for the policy shock, same for information.
            for (int c = 0; c < 2; ++c) {
                if (impact(0, c) < 0) impact.col(c) = -impact.col(c);
            }
            if (impact(0, 0) > 0 && impact(1, 0) < 0 && impact(0, 1) > 0 && impact(1, 1) > 0) {
                accepted.push_back({static_cast<int>(d), theta, chol, impact});
            }
        }
    }
    if (accepted.empty())
        throw numerical_error("identify_signs: no rotation satisfied the sign restrictions");
    return accepted;
}

ShockSeries decompose_shocks(const std::vector<StructuralDraw>& accepted, const SurprisePanel& m) {
    if (accepted.empty()) throw data_error("decompose_shocks: no accepted draws");
    const int t_total = m.months();

    // Within one draw the rate surprise splits linearly:
    //   S_mp = impact(0,0) * (impact^{-1} m)_0 = a*m1 + b*m2, S_if = c*m1 + d*m2.
    const size_t n_acc = accepted.size();
    std::vector<double> a(n_acc), b(n_acc), c(n_acc), dd(n_acc);
    for (size_t i = 0; i < n_acc; ++i) {
        const Eigen::Matrix2d inv = accepted[i].impact.inverse();
        if (!inv.allFinite())
            throw numerical_error("decompose_shocks: singular structural impact matrix");
        a[i] = accepted[i].impact(0, 0) * inv(0, 0);
        b[i] = accepted[i].impact(0, 0) * inv(0, 1);
        c[i] = accepted[i].impact(0, 1) * inv(1, 0);
        dd[i] = accepted[i].impact(0, 1) * inv(1, 1);
    }

    ShockSeries out;
    out.first_month = m.first_month;
    out.n_accepted = static_cast<int>(n_acc);
    out.total = m.values.col(0);
    out.mp.setZero(t_total);
    out.info.setZero(t_total);

    std::vector<double> mp_vals(n_acc), if_vals(n_acc);
    for (int t = 0; t < t_total; ++t) {
        const double m1 = m.values(t, 0);
        const double m2 = m.values(t, 1);
        if (m1 == 0.0 && m2 == 0.0) continue;  // meeting-free months stay exactly zero
        for (size_t i = 0; i < n_acc; ++i) {
            mp_vals[i] = a[i] * m1 + b[i] * m2;
            if_vals[i] = c[i] * m1 + dd[i] * m2;
        }
        const double mp_med = median_of(mp_vals);
        const double if_med = median_of(if_vals);
        const double s = out.total(t);
        const double sum = mp_med + if_med;
        if (sum == 0.0) {
            out.mp(t) = 0.5 * s;
            out.info(t) = s - out.mp(t);
            if (s != 0.0) out.sign_flagged.push_back(t);
            continue;
        }
        if (mp_med * if_med < 0 && s != 0.0) out.sign_flagged.push_back(t);
        out.mp(t) = s / sum * mp_med;
        out.info(t) = s - out.mp(t);  // keeps S = S_mp + S_if exact
    }
    return out;
}

std::vector<MeetingSurprise> read_surprises_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const int c_date = t.column("date"), c_fff = t.column("fff_surprise"),
              c_spx = t.column("spx_surprise");
    if (c_date < 0 || c_fff < 0 || c_spx < 0)
        throw data_error(path + ": expected header 'date,fff_surprise,spx_surprise'");
    std::vector<MeetingSurprise> events;
    for (const auto& row : t.rows) {
        events.push_back({parse_date(row[static_cast<size_t>(c_date)]),
                          csv::to_double(row[static_cast<size_t>(c_fff)], path),
                          csv::to_double(row[static_cast<size_t>(c_spx)], path)});
    }
    return events;
}

MacroPanel read_macro_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const std::vector<std::string> cols{"month", "gs1", "spx", "cpi", "ebp", "indpro"};
    std::vector<int> idx;
    for (const auto& c : cols) {
        const int at = t.column(c);
        if (at < 0) throw data_error(path + ": missing column '" + c + "'");
        idx.push_back(at);
    }
    MacroPanel panel;
    panel.values.resize(static_cast<Eigen::Index>(t.rows.size()), 5);
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const int month = parse_month(t.rows[r][static_cast<size_t>(idx[0])]);
        if (r == 0) {
            panel.first_month = month;
        } else if (month != panel.first_month + static_cast<int>(r)) {
            throw data_error(path + ": months must be consecutive at row " + std::to_string(r + 2));
        }
        for (int c = 0; c < 5; ++c) {
            panel.values(static_cast<Eigen::Index>(r), c) =
                csv::to_double(t.rows[r][static_cast<size_t>(idx[static_cast<size_t>(c + 1)])], path);
        }
    }
    return panel;
}

void write_shocks_csv(const std::string& path, const ShockSeries& shocks) {
    std::vector<std::vector<std::string>> rows;
    for (int t = 0; t < shocks.months(); ++t) {
        rows.push_back({format_month(shocks.first_month + t), csv::format_double(shocks.total(t)),
                        csv::format_double(shocks.mp(t)), csv::format_double(shocks.info(t)),
                        std::to_string(shocks.n_accepted)});
    }
    csv::write_file(path, {"month", "s_total", "s_mp", "s_if", "n_accepted"}, rows);
}

ShockSeries read_shocks_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const int c_month = t.column("month"), c_total = t.column("s_total"), c_mp = t.column("s_mp"),
              c_if = t.column("s_if"), c_acc = t.column("n_accepted");
    if (c_month < 0 || c_total < 0 || c_mp < 0 || c_if < 0)
        throw data_error(path + ": expected header 'month,s_total,s_mp,s_if,n_accepted'");
    ShockSeries s;
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    s.total.resize(n);
    s.mp.resize(n);
    s.info.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = t.rows[static_cast<size_t>(r)];
        const int month = parse_month(row[static_cast<size_t>(c_month)]);
        if (r == 0) {
            s.first_month = month;
        } else if (month != s.first_month + static_cast<int>(r)) {
            throw data_error(path + ": months must be consecutive");
        }
        s.total(r) = csv::to_double(row[static_cast<size_t>(c_total)], path);
        s.mp(r) = csv::to_double(row[static_cast<size_t>(c_mp)], path);
        s.info(r) = csv::to_double(row[static_cast<size_t>(c_if)], path);
        if (c_acc >= 0) s.n_accepted = static_cast<int>(csv::to_double(row[static_cast<size_t>(c_acc)], path));
    }
    return s;
}

}  // namespace mcn::shock
