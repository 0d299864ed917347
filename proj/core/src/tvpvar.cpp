#include "mcn/tvpvar.hpp"

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mcn::tvp {

void TvpVarSpec::validate() const {
    if (p < 1) throw config_error("tvpvar: lag order p must be >= 1");
    if (!(lambda > 0 && lambda <= 1)) throw config_error("tvpvar: lambda must be in (0, 1]");
    if (!(kappa > 0 && kappa < 1)) throw config_error("tvpvar: kappa must be in (0, 1)");
    if (!(gamma > 0)) throw config_error("tvpvar: gamma must be > 0");
    if (horizon < 1) throw config_error("tvpvar: horizon must be >= 1");
}

MinnesotaPrior minnesota_prior(int n, int p, double gamma) {
    const int m = n * p + 1;
    MinnesotaPrior prior;
    prior.mean = Eigen::VectorXd::Zero(n * m);
    prior.var_diag.resize(n * m);
    for (int eq = 0; eq < n; ++eq) {
        prior.var_diag(eq * m) = 100.0;  // intercept
        for (int l = 1; l <= p; ++l) {
            for (int j = 0; j < n; ++j) {
                prior.var_diag(eq * m + 1 + (l - 1) * n + j) = gamma / (l * l);
            }
        }
    }
    return prior;
}

FilterState kalman_step(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                        const FilterState& prev, const TvpVarSpec& spec) {
    const int n = static_cast<int>(y.size());
    const int m = static_cast<int>(x.size());
    const int dim = n * m;

    FilterState next;
    const Eigen::MatrixXd p_pred = prev.p_cov / spec.lambda;  // Q_t = (1/lambda - 1) P_{t-1|t-1}

    // Z_t = I_N (x) x' is applied blockwise instead of being materialized.
    next.resid.resize(n);
    for (int i = 0; i < n; ++i) next.resid(i) = y(i) - x.dot(prev.beta.segment(i * m, m));

    next.sigma = spec.kappa * prev.sigma + (1.0 - spec.kappa) * next.resid * next.resid.transpose();

    Eigen::MatrixXd zp(n, dim);  // Z P_pred
    for (int i = 0; i < n; ++i) zp.row(i) = x.transpose() * p_pred.middleRows(i * m, m);

    Eigen::MatrixXd f(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) f(i, j) = zp.row(i).segment(j * m, m).dot(x);
    }
    f += next.sigma;
    f = 0.5 * (f + f.transpose()).eval();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f);
    const double ev_min = es.eigenvalues().minCoeff();
    const double ev_max = es.eigenvalues().maxCoeff();
    if (!(ev_min > 0) || ev_max / ev_min > spec.cond_limit) {
        throw numerical_error("innovation covariance ill-conditioned (cond=" +
                              std::to_string(ev_min > 0 ? ev_max / ev_min
                                                        : std::numeric_limits<double>::infinity()) +
                              ")");
    }
    const Eigen::MatrixXd f_inv = es.eigenvectors() *
                                  es.eigenvalues().cwiseInverse().asDiagonal() *
                                  es.eigenvectors().transpose();

    next.gain = zp.transpose() * f_inv;          // K_t = P Z' F^{-1}
    next.beta = prev.beta + next.gain * next.resid;
    next.p_cov = p_pred - next.gain * zp;        // (I - K Z) P
    next.p_cov = 0.5 * (next.p_cov + next.p_cov.transpose()).eval();
    next.innov_cov = f;
    return next;
}

FilterPath fit_tvpvar(const Eigen::MatrixXd& panel, const TvpVarSpec& spec) {
    spec.validate();
    const int t_count = static_cast<int>(panel.rows());
    const int n = static_cast<int>(panel.cols());
    const int p = spec.p;
    const int m = n * p + 1;
    if (t_count <= n * p + 10) throw data_error("fit_tvpvar: sample too short for N*p");

    FilterPath path;
    path.spec = spec;
    path.n = n;

    const MinnesotaPrior prior = minnesota_prior(n, p, spec.gamma);
    FilterState state;
    state.beta = prior.mean;
    state.p_cov = prior.var_diag.asDiagonal();

    const int window = std::min(60, t_count / 4);
    const Eigen::MatrixXd head = panel.topRows(std::max(window, 2));
    const Eigen::MatrixXd centered = head.rowwise() - head.colwise().mean();
    state.sigma = centered.transpose() * centered / static_cast<double>(centered.rows() - 1);
    state.resid = Eigen::VectorXd::Zero(n);
    state.innov_cov = state.sigma;
    state.gain = Eigen::MatrixXd::Zero(n * m, n);

    Eigen::VectorXd x(m);
    for (int t = p; t < t_count; ++t) {
        x(0) = 1.0;
        for (int l = 1; l <= p; ++l) x.segment(1 + (l - 1) * n, n) = panel.row(t - l);
        try {
            state = kalman_step(panel.row(t), x, state, spec);
        } catch (const numerical_error& e) {
            throw numerical_error("tvpvar filter at row " + std::to_string(t) + ": " + e.what());
        }
        path.t_index.push_back(t);
        path.states.push_back(state);
    }
    return path;
}

int select_lag(const Eigen::MatrixXd& panel, int p_max) {
    if (p_max < 1) throw config_error("select_lag: p_max must be >= 1");
    const int t_count = static_cast<int>(panel.rows());
    const int n = static_cast<int>(panel.cols());
    const int t_eff = t_count - p_max;
    if (t_eff < n * p_max + n + 10) throw data_error("select_lag: sample too short for p_max");

    int best_p = 1;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= p_max; ++p) {
        const int m = n * p + 1;
        Eigen::MatrixXd x(t_eff, m);
        Eigen::MatrixXd y(t_eff, n);
        for (int t = p_max; t < t_count; ++t) {
            const int r = t - p_max;
            y.row(r) = panel.row(t);
            x(r, 0) = 1.0;
            for (int l = 1; l <= p; ++l) x.block(r, 1 + (l - 1) * n, 1, n) = panel.row(t - l);
        }
        const Eigen::MatrixXd coef = (x.transpose() * x)
                                         .ldlt()
                                         .solve(x.transpose() * y);
        const Eigen::MatrixXd resid = y - x * coef;
        const Eigen::MatrixXd sigma = resid.transpose() * resid / static_cast<double>(t_eff);
        const double log_det = sigma.ldlt().vectorD().array().max(1e-300).log().sum();
        const double k = static_cast<double>(n * m);
        const double bic = log_det + k * std::log(static_cast<double>(t_eff)) / t_eff;
        if (bic < best_bic) {
            best_bic = bic;
            best_p = p;
        }
    }
    return best_p;
}

VarCoeffs unpack_beta(const Eigen::VectorXd& beta, int n, int p) {
    const int m = n * p + 1;
    VarCoeffs c;
    c.intercept.resize(n);
    c.lags.assign(static_cast<size_t>(p), Eigen::MatrixXd(n, n));
    for (int i = 0; i < n; ++i) {
        const auto seg = beta.segment(i * m, m);
        c.intercept(i) = seg(0);
        for (int l = 1; l <= p; ++l)
            c.lags[static_cast<size_t>(l - 1)].row(i) = seg.segment(1 + (l - 1) * n, n).transpose();
    }
    return c;
}

std::vector<Eigen::MatrixXd> vma_expand(const std::vector<Eigen::MatrixXd>& lag_coeffs,
                                        int horizon) {
    const int p = static_cast<int>(lag_coeffs.size());
    const int n = p > 0 ? static_cast<int>(lag_coeffs[0].rows()) : 0;
    std::vector<Eigen::MatrixXd> psi;
    psi.reserve(static_cast<size_t>(horizon));
    psi.push_back(Eigen::MatrixXd::Identity(n, n));
    for (int h = 1; h < horizon; ++h) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
        for (int k = 1; k <= std::min(h, p); ++k)
            acc.noalias() += lag_coeffs[static_cast<size_t>(k - 1)] * psi[static_cast<size_t>(h - k)];
        psi.push_back(std::move(acc));
    }
    return psi;
}

GfevdTable gfevd(const std::vector<Eigen::MatrixXd>& psi, const Eigen::MatrixXd& sigma) {
    const int n = static_cast<int>(sigma.rows());
    GfevdTable table;
    table.raw.resize(n, n);

    std::vector<Eigen::MatrixXd> psi_sigma;
    psi_sigma.reserve(psi.size());
    for (const auto& ph : psi) psi_sigma.push_back(ph * sigma);

    for (int i = 0; i < n; ++i) {
        double denom = 0;
        for (size_t h = 0; h < psi.size(); ++h)
            denom += psi_sigma[h].row(i).dot(psi[h].row(i));  // e_i' Psi Sigma Psi' e_i
        if (!(denom > 0)) throw numerical_error("gfevd: degenerate forecast-error variance");
        for (int j = 0; j < n; ++j) {
            const double sjj = sigma(j, j);
            if (!(sjj > 0)) throw numerical_error("gfevd: nonpositive innovation variance");
            double num = 0;
            for (size_t h = 0; h < psi.size(); ++h) {
                const double v = psi_sigma[h](i, j);
                num += v * v;
            }
            table.raw(i, j) = num / (sjj * denom);
        }
    }

    table.normalized.resize(n, n);
    for (int i = 0; i < n; ++i) {
        const double row_sum = table.raw.row(i).sum();
        if (!(row_sum > 0)) throw numerical_error("gfevd: zero row in variance shares");
        table.normalized.row(i) = table.raw.row(i) / row_sum;
    }
    return table;
}

void write_gfevd_csv(const std::string& path, const std::vector<Date>& dates,
                     const std::vector<std::string>& names,
                     const std::vector<Eigen::MatrixXd>& normalized) {
    if (dates.size() != normalized.size())
        throw data_error("write_gfevd_csv: dates/tables size mismatch");
    std::vector<std::vector<std::string>> rows;
    rows.reserve(dates.size() * names.size() * names.size());
    for (size_t t = 0; t < dates.size(); ++t) {
        const std::string d = format_date(dates[t]);
        for (size_t i = 0; i < names.size(); ++i) {
            for (size_t j = 0; j < names.size(); ++j) {
                rows.push_back({d, names[j], names[i],
                                csv::format_double(normalized[t](static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(j)))});
            }
        }
    }
    csv::write_file(path, {"date", "from", "to", "share"}, rows);
}

GfevdSeries read_gfevd_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const int c_date = t.column("date"), c_from = t.column("from"), c_to = t.column("to"),
              c_share = t.column("share");
    if (c_date < 0 || c_from < 0 || c_to < 0 || c_share < 0)
        throw data_error(path + ": expected header 'date,from,to,share'");

    GfevdSeries series;
    std::map<std::string, size_t> date_index;
    std::map<std::string, size_t> name_index;
    for (const auto& row : t.rows) {
        for (int c : {c_from, c_to}) {
            const std::string& nm = row[static_cast<size_t>(c)];
            if (!name_index.count(nm)) {
                name_index[nm] = series.names.size();
                series.names.push_back(nm);
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(series.names.size());
    for (const auto& row : t.rows) {
        const std::string& d = row[static_cast<size_t>(c_date)];
        if (!date_index.count(d)) {
            date_index[d] = series.dates.size();
            series.dates.push_back(parse_date(d));
            series.tables.emplace_back(Eigen::MatrixXd::Zero(n, n));
        }
        const size_t at = date_index[d];
        const auto j = static_cast<Eigen::Index>(name_index[row[static_cast<size_t>(c_from)]]);
        const auto i = static_cast<Eigen::Index>(name_index[row[static_cast<size_t>(c_to)]]);
        series.tables[at](i, j) = csv::to_double(row[static_cast<size_t>(c_share)], path);
    }
    return series;
}

}  // namespace mcn::tvp
