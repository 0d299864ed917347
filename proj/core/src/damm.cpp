#include "mcn/damm.hpp"

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"
#include "mcn/nelder_mead.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace mcn::damm {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sigmoid(double x) {
    double s;
    if (x >= 0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    // Keep the map strictly interior even when the logistic saturates in
    // double precision; the stick-breaking invariants require w in (0,1).
    return std::clamp(s, 1e-15, 1.0 - 1e-15);
}

struct ScoreBuffers {
    Eigen::VectorXd ln_term, resp, score_w, scaled_w;
    Eigen::MatrixXd score_c, scaled_c, jac;

    explicit ScoreBuffers(int j_count)
        : ln_term(j_count),
          resp(j_count),
          score_w(j_count),
          scaled_w(std::max(j_count - 1, 0)),
          score_c(2, j_count),
          scaled_c(2, j_count),
          jac(j_count, std::max(j_count - 1, 0)) {}
};

// Log density and all score blocks at one observation. Returns -inf when the
// mixture density underflows; callers choose between penalty and throw.
double score_core(double y, const Eigen::VectorXd& w, const Eigen::VectorXd& mu,
                  const Eigen::VectorXd& sigma, const Eigen::VectorXd& w_tilde, double delta,
                  ScoreBuffers& buf) {
    const int j_count = static_cast<int>(w.size());
    double ln_max = kNegInf;
    for (int j = 0; j < j_count; ++j) {
        const double z = (y - mu(j)) / sigma(j);
        buf.ln_term(j) = std::log(w(j)) - 0.5 * kLogTwoPi - std::log(sigma(j)) - 0.5 * z * z;
        ln_max = std::max(ln_max, buf.ln_term(j));
    }
    if (!std::isfinite(ln_max)) return kNegInf;
    double sum = 0;
    for (int j = 0; j < j_count; ++j) sum += std::exp(buf.ln_term(j) - ln_max);
    const double lnp = ln_max + std::log(sum);
    if (!std::isfinite(lnp)) return kNegInf;

    const double comp_scale = std::pow(2.0, -delta);
    for (int j = 0; j < j_count; ++j) {
        const double r = std::exp(buf.ln_term(j) - lnp);  // posterior responsibility
        const double z = (y - mu(j)) / sigma(j);
        buf.resp(j) = r;
        buf.score_w(j) = r / w(j);
        buf.score_c(0, j) = r * (y - mu(j)) / (sigma(j) * sigma(j));
        buf.score_c(1, j) = r * (z * z - 1.0) / sigma(j);
        // Unconstrained gradient is (d/dmu, sigma * d/dsigma); the component
        // scaling [J' I J]^{-delta} is diag(sigma^{2 delta}, 2^{-delta}).
        buf.scaled_c(0, j) = std::pow(sigma(j), 2.0 * delta) * buf.score_c(0, j);
        buf.scaled_c(1, j) = comp_scale * sigma(j) * buf.score_c(1, j);
    }
    if (j_count > 1) {
        buf.jac = simplex_jacobian(w_tilde);
        buf.scaled_w.noalias() = buf.jac.transpose() * buf.score_w;
    }
    return lnp;
}

struct PsiLayout {
    int j_count;
    int dim() const { return 3 * (j_count - 1) + 6 * j_count; }
};

SdCoefficients decode_psi(const Eigen::VectorXd& psi, int j_count) {
    SdCoefficients c;
    const int jw = j_count - 1;
    c.kappa_w.resize(jw);
    c.a_w.resize(jw);
    c.b_w.resize(jw);
    int at = 0;
    for (int i = 0; i < jw; ++i) c.kappa_w(i) = psi(at++);
    for (int i = 0; i < jw; ++i) c.a_w(i) = std::exp(std::clamp(psi(at++), -30.0, 5.0));
    for (int i = 0; i < jw; ++i) c.b_w(i) = std::tanh(std::clamp(psi(at++), -15.0, 15.0));
    c.kappa_c.resize(2, j_count);
    c.a_c.resize(2, j_count);
    c.b_c.resize(2, j_count);
    for (int j = 0; j < j_count; ++j) {
        c.kappa_c(0, j) = psi(at++);
        c.kappa_c(1, j) = psi(at++);
        c.a_c(0, j) = std::exp(std::clamp(psi(at++), -30.0, 5.0));
        c.a_c(1, j) = std::exp(std::clamp(psi(at++), -30.0, 5.0));
        c.b_c(0, j) = std::tanh(std::clamp(psi(at++), -15.0, 15.0));
        c.b_c(1, j) = std::tanh(std::clamp(psi(at++), -15.0, 15.0));
    }
    return c;
}

// Filter pass without state storage; used inside the likelihood objective.
double filter_loglik(const Eigen::VectorXd& series, const SdCoefficients& coeffs) {
    const int j_count = coeffs.components();
    const int jw = j_count - 1;
    Eigen::VectorXd w_tilde(jw), theta_mu(j_count), theta_ls(j_count);
    for (int i = 0; i < jw; ++i) w_tilde(i) = coeffs.kappa_w(i) / (1.0 - coeffs.b_w(i));
    for (int j = 0; j < j_count; ++j) {
        theta_mu(j) = coeffs.kappa_c(0, j) / (1.0 - coeffs.b_c(0, j));
        theta_ls(j) = coeffs.kappa_c(1, j) / (1.0 - coeffs.b_c(1, j));
    }

    ScoreBuffers buf(j_count);
    Eigen::VectorXd w(j_count), mu(j_count), sigma(j_count);
    double loglik = 0;
    for (Eigen::Index t = 0; t < series.size(); ++t) {
        for (int j = 0; j < j_count; ++j) {
            if (std::abs(theta_ls(j)) > 30.0 || !std::isfinite(theta_mu(j))) return kNegInf;
            mu(j) = theta_mu(j);
            sigma(j) = std::exp(theta_ls(j));
        }
        if (jw > 0) {
            if (!w_tilde.allFinite()) return kNegInf;
            w = simplex_map(w_tilde);
        } else {
            w(0) = 1.0;
        }
        const double lnp = score_core(series(t), w, mu, sigma, w_tilde, coeffs.delta, buf);
        if (!std::isfinite(lnp)) return kNegInf;
        loglik += lnp;

        for (int i = 0; i < jw; ++i)
            w_tilde(i) = coeffs.kappa_w(i) + coeffs.a_w(i) * buf.scaled_w(i) + coeffs.b_w(i) * w_tilde(i);
        for (int j = 0; j < j_count; ++j) {
            theta_mu(j) = coeffs.kappa_c(0, j) + coeffs.a_c(0, j) * buf.scaled_c(0, j) +
                          coeffs.b_c(0, j) * theta_mu(j);
            theta_ls(j) = coeffs.kappa_c(1, j) + coeffs.a_c(1, j) * buf.scaled_c(1, j) +
                          coeffs.b_c(1, j) * theta_ls(j);
        }
    }
    return loglik;
}

Eigen::VectorXd starting_psi(const Eigen::VectorXd& series, int j_count) {
    const double m0 = series.mean();
    const double s0 = std::max(std::sqrt((series.array() - m0).square().mean()), 1e-6);

    const PsiLayout layout{j_count};
    Eigen::VectorXd psi(layout.dim());
    int at = 0;
    const int jw = j_count - 1;
    for (int i = 0; i < jw; ++i) psi(at++) = 0.0;                 // kappa_w -> equal-ish weights
    for (int i = 0; i < jw; ++i) psi(at++) = std::log(0.05);      // a_w
    for (int i = 0; i < jw; ++i) psi(at++) = std::atanh(0.95);    // b_w
    for (int j = 0; j < j_count; ++j) {
        const double frac = j_count == 1 ? 0.0 : -0.8 + 1.6 * j / (j_count - 1.0);
        const double target_mu = m0 + 0.5 * s0 * frac;
        const double target_ls = std::log(s0 * (1.0 + 0.3 * frac));
        const double b0 = 0.97;
        psi(at++) = (1.0 - b0) * target_mu;   // kappa_mu
        psi(at++) = (1.0 - b0) * target_ls;   // kappa_ln_sigma
        psi(at++) = std::log(0.03);           // a_mu
        psi(at++) = std::log(0.03);           // a_ln_sigma
        psi(at++) = std::atanh(b0);           // b_mu
        psi(at++) = std::atanh(b0);           // b_ln_sigma
    }
    return psi;
}

}  // namespace

double modified_logistic(double lower, double upper, double x) {
    if (!(lower < upper)) throw data_error("modified_logistic: requires L < U");
    return lower + (upper - lower) * sigmoid(x);
}

Eigen::VectorXd simplex_map(const Eigen::VectorXd& w_tilde) {
    const int j_count = static_cast<int>(w_tilde.size()) + 1;
    Eigen::VectorXd w(j_count);
    double remaining = 1.0;  // b_1 = 1, b_j = b_{j-1} - w_{j-1}
    for (int j = 0; j + 1 < j_count; ++j) {
        w(j) = remaining * sigmoid(w_tilde(j));
        remaining -= w(j);
    }
    w(j_count - 1) = remaining;
    return w;
}

Eigen::MatrixXd simplex_jacobian(const Eigen::VectorXd& w_tilde) {
    const int j_count = static_cast<int>(w_tilde.size()) + 1;
    const int cols = j_count - 1;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(j_count, cols);

    Eigen::VectorXd s(cols), ds(cols);
    double remaining = 1.0;
    for (int j = 0; j < cols; ++j) {
        s(j) = sigmoid(w_tilde(j));
        ds(j) = s(j) * (1.0 - s(j));
        jac(j, j) = remaining * ds(j);  // d w_j / d w~_j = b_j * logistic'
        remaining -= remaining * s(j);
    }
    // Rows below the diagonal propagate through the shrinking stick; the last
    // row closes each column to a zero sum.
    for (int j = 1; j < cols; ++j) {
        for (int b = 0; b < j; ++b) {
            double partial = 0;
            for (int k = 0; k < j; ++k) partial += jac(k, b);
            jac(j, b) = -partial * s(j);
        }
    }
    for (int b = 0; b < cols; ++b) {
        double partial = 0;
        for (int k = 0; k < cols; ++k) partial += jac(k, b);
        jac(j_count - 1, b) = -partial;
    }
    return jac;
}

MixtureState state_from_unconstrained(const Eigen::VectorXd& w_tilde,
                                      const Eigen::MatrixXd& theta_tilde) {
    MixtureState st;
    st.w_tilde = w_tilde;
    st.theta_tilde = theta_tilde;
    st.weights = simplex_map(w_tilde);
    st.means = theta_tilde.row(0).transpose();
    st.scales = theta_tilde.row(1).transpose().array().exp();
    return st;
}

ScoreStep damm_score(double y, const MixtureState& state, double delta) {
    const int j_count = state.components();
    ScoreBuffers buf(j_count);
    const double lnp =
        score_core(y, state.weights, state.means, state.scales, state.w_tilde, delta, buf);
    if (!std::isfinite(lnp))
        throw numerical_error("damm_score: mixture density underflowed to zero");
    ScoreStep step;
    step.log_density = lnp;
    step.score_w = buf.score_w;
    step.score_c = buf.score_c;
    step.jacobian_w = j_count > 1 ? buf.jac : Eigen::MatrixXd(j_count, 0);
    step.scaled_w = j_count > 1 ? buf.scaled_w : Eigen::VectorXd(0);
    step.scaled_c = buf.scaled_c;
    return step;
}

MixtureState damm_step(double y, const MixtureState& state, const SdCoefficients& coeffs) {
    const ScoreStep score = damm_score(y, state, coeffs.delta);
    const int j_count = state.components();

    Eigen::VectorXd w_tilde(state.w_tilde.size());
    for (Eigen::Index i = 0; i < w_tilde.size(); ++i)
        w_tilde(i) = coeffs.kappa_w(i) + coeffs.a_w(i) * score.scaled_w(i) +
                     coeffs.b_w(i) * state.w_tilde(i);

    Eigen::MatrixXd theta(2, j_count);
    for (int j = 0; j < j_count; ++j) {
        theta(0, j) = coeffs.kappa_c(0, j) + coeffs.a_c(0, j) * score.scaled_c(0, j) +
                      coeffs.b_c(0, j) * state.theta_tilde(0, j);
        theta(1, j) = coeffs.kappa_c(1, j) + coeffs.a_c(1, j) * score.scaled_c(1, j) +
                      coeffs.b_c(1, j) * state.theta_tilde(1, j);
    }
    if (!w_tilde.allFinite() || !theta.allFinite())
        throw numerical_error("damm_step: non-finite updated state");
    return state_from_unconstrained(w_tilde, theta);
}

MixtureState initial_state(const SdCoefficients& coeffs) {
    const int j_count = coeffs.components();
    Eigen::VectorXd w_tilde(j_count - 1);
    for (Eigen::Index i = 0; i < w_tilde.size(); ++i)
        w_tilde(i) = coeffs.kappa_w(i) / (1.0 - coeffs.b_w(i));
    Eigen::MatrixXd theta(2, j_count);
    for (int j = 0; j < j_count; ++j) {
        theta(0, j) = coeffs.kappa_c(0, j) / (1.0 - coeffs.b_c(0, j));
        theta(1, j) = coeffs.kappa_c(1, j) / (1.0 - coeffs.b_c(1, j));
    }
    return state_from_unconstrained(w_tilde, theta);
}

FilterResult damm_filter(const Eigen::VectorXd& series, const SdCoefficients& coeffs) {
    FilterResult out;
    out.states.reserve(static_cast<size_t>(series.size()));
    MixtureState state = initial_state(coeffs);
    for (Eigen::Index t = 0; t < series.size(); ++t) {
        out.states.push_back(state);
        try {
            const ScoreStep score = damm_score(series(t), state, coeffs.delta);
            out.loglik += score.log_density;
            state = damm_step(series(t), state, coeffs);
        } catch (const numerical_error& e) {
            throw numerical_error("damm filter diverged at index " + std::to_string(t) + ": " +
                                  e.what());
        }
    }
    return out;
}

FitResult damm_fit(const Eigen::VectorXd& series, const FitConfig& config) {
    if (config.components < 1) throw config_error("damm_fit: components must be >= 1");
    if (series.size() < 250) throw data_error("damm_fit: need at least 250 observations");

    const int j_count = config.components;
    const Eigen::VectorXd psi0 = starting_psi(series, j_count);

    const auto objective = [&](const Eigen::VectorXd& psi) {
        const double ll = filter_loglik(series, decode_psi(psi, j_count));
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    opt::NelderMeadOptions nm_opts;
    nm_opts.max_iterations = config.max_iterations;
    nm_opts.rel_tol = config.rel_tol;
    nm_opts.tol_window = config.tol_window;

    opt::NelderMeadResult best;
    int best_start = -1;
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> jitter(0.0, 0.25);
    for (int s = 0; s < std::max(config.starts, 1); ++s) {
        Eigen::VectorXd start = psi0;
        if (s > 0) {
            for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += jitter(rng);
        }
        if (!std::isfinite(objective(start))) continue;  // skip divergent perturbations
        const opt::NelderMeadResult run = opt::nelder_mead(objective, start, nm_opts);
        if (run.value < best.value) {
            best = run;
            best_start = s;
        }
    }
    if (best_start < 0)
        throw numerical_error("damm_fit: no admissible starting point (filter diverged)");

    FitResult result;
    result.coeffs = decode_psi(best.x, j_count);
    result.loglik = -best.value;
    result.converged = best.converged;
    result.iterations = best.iterations;
    result.best_start = best_start;
    result.seed = config.seed;

    FilterResult path = damm_filter(series, result.coeffs);
    result.states = std::move(path.states);
    return result;
}

Moments mixture_moments(const Eigen::VectorXd& weights, const Eigen::VectorXd& means,
                        const Eigen::VectorXd& scales, MomentConvention convention) {
    const int j_count = static_cast<int>(weights.size());
    Moments mo;
    if (convention == MomentConvention::printed) {
        double vol = 0, s3 = 0, s4 = 0;
        for (int j = 0; j < j_count; ++j) {
            const double m = means(j), v = scales(j) * scales(j);
            vol += weights(j) * (v + m * m);
            s3 += weights(j) * m * (3.0 * v + m * m);
            s4 += weights(j) * (m * m * m * m + 6.0 * m * v + 3.0 * v * v);
        }
        if (vol <= 0) throw data_error("mixture_moments: degenerate variance");
        mo.vol = vol;
        mo.skew = s3 / (vol * vol);
        mo.kurt = s4 / (vol * vol * vol * vol) - 3.0;
        return mo;
    }

    const double mean = weights.dot(means);
    double m2 = 0, m3 = 0, m4 = 0;
    for (int j = 0; j < j_count; ++j) {
        const double d = means(j) - mean;
        const double v = scales(j) * scales(j);
        m2 += weights(j) * (v + d * d);
        m3 += weights(j) * (d * d * d + 3.0 * d * v);
        m4 += weights(j) * (d * d * d * d + 6.0 * d * d * v + 3.0 * v * v);
    }
    if (m2 <= 0) throw data_error("mixture_moments: degenerate variance");
    mo.vol = m2;
    mo.skew = m3 / std::pow(m2, 1.5);
    mo.kurt = m4 / (m2 * m2) - 3.0;
    return mo;
}

MomentPanelResult extract_moment_panel(const ts::ReturnPanel& returns, const FitConfig& config,
                                       int threads) {
    const Eigen::Index t_count = returns.values.rows();
    const Eigen::Index n = returns.values.cols();

    MomentPanelResult out;
    out.panel.dates = returns.dates;
    out.panel.names = returns.names;
    out.panel.vol.resize(t_count, n);
    out.panel.skew.resize(t_count, n);
    out.panel.kurt.resize(t_count, n);
    out.diagnostics.resize(static_cast<size_t>(n));

    const auto fit_one = [&](Eigen::Index j) {
        FitConfig cfg = config;
        cfg.seed = config.seed + static_cast<std::uint64_t>(j) * 0x9e3779b97f4a7c15ull;
        try {
            const FitResult fit = damm_fit(returns.values.col(j), cfg);
            for (Eigen::Index t = 0; t < t_count; ++t) {
                const MixtureState& st = fit.states[static_cast<size_t>(t)];
                const Moments mo = mixture_moments(st.weights, st.means, st.scales);
                out.panel.vol(t, j) = mo.vol;
                out.panel.skew(t, j) = mo.skew;
                out.panel.kurt(t, j) = mo.kurt;
            }
            FitDiagnostics diag;
            diag.series = returns.names[static_cast<size_t>(j)];
            diag.loglik = fit.loglik;
            diag.converged = fit.converged;
            diag.iterations = fit.iterations;
            diag.seed = cfg.seed;
            diag.coeffs = fit.coeffs;
            out.diagnostics[static_cast<size_t>(j)] = std::move(diag);
        } catch (const std::exception& e) {
            throw numerical_error("series '" + returns.names[static_cast<size_t>(j)] +
                                  "': " + e.what());
        }
    };

    if (threads <= 1 || n == 1) {
        for (Eigen::Index j = 0; j < n; ++j) fit_one(j);
    } else {
        std::vector<std::future<void>> futs;
        std::atomic<Eigen::Index> next{0};
        const int workers = std::min<int>(threads, static_cast<int>(n));
        for (int w = 0; w < workers; ++w) {
            futs.push_back(std::async(std::launch::async, [&] {
                for (Eigen::Index j = next++; j < n; j = next++) fit_one(j);
            }));
        }
        for (auto& f : futs) f.get();  // rethrows the first failure
    }
    return out;
}

Eigen::MatrixXd layer_matrix(const MomentPanel& panel, MomentKind kind, bool log_volatility) {
    switch (kind) {
        case MomentKind::volatility:
            return log_volatility ? panel.vol.array().log().matrix() : panel.vol;
        case MomentKind::skewness: return panel.skew;
        case MomentKind::kurtosis: return panel.kurt;
    }
    throw config_error("layer_matrix: unknown moment kind");
}

void write_moments_csv(const std::string& path, const MomentPanel& panel, bool log_volatility) {
    std::vector<std::vector<std::string>> rows;
    for (size_t t = 0; t < panel.dates.size(); ++t) {
        for (size_t j = 0; j < panel.names.size(); ++j) {
            const double vol = panel.vol(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
            rows.push_back({format_date(panel.dates[t]), panel.names[j],
                            csv::format_double(log_volatility ? std::log(vol) : vol),
                            csv::format_double(panel.skew(static_cast<Eigen::Index>(t),
                                                          static_cast<Eigen::Index>(j))),
                            csv::format_double(panel.kurt(static_cast<Eigen::Index>(t),
                                                          static_cast<Eigen::Index>(j)))});
        }
    }
    csv::write_file(path, {"date", "series", "vol", "skew", "kurt"}, rows);
}

MomentPanel read_moments_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const int c_date = t.column("date"), c_series = t.column("series"), c_vol = t.column("vol"),
              c_skew = t.column("skew"), c_kurt = t.column("kurt");
    if (c_date < 0 || c_series < 0 || c_vol < 0 || c_skew < 0 || c_kurt < 0)
        throw data_error(path + ": expected header 'date,series,vol,skew,kurt'");

    std::vector<Date> dates;
    std::vector<std::string> names;
    std::map<std::string, size_t> name_index;
    std::map<std::string, size_t> date_index;
    for (const auto& row : t.rows) {
        const std::string& d = row[static_cast<size_t>(c_date)];
        const std::string& s = row[static_cast<size_t>(c_series)];
        if (!date_index.count(d)) {
            date_index[d] = dates.size();
            dates.push_back(parse_date(d));
        }
        if (!name_index.count(s)) {
            name_index[s] = names.size();
            names.push_back(s);
        }
    }

    MomentPanel panel;
    panel.dates = dates;
    panel.names = names;
    const auto t_count = static_cast<Eigen::Index>(dates.size());
    const auto n = static_cast<Eigen::Index>(names.size());
    panel.vol.setConstant(t_count, n, std::numeric_limits<double>::quiet_NaN());
    panel.skew.setConstant(t_count, n, std::numeric_limits<double>::quiet_NaN());
    panel.kurt.setConstant(t_count, n, std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : t.rows) {
        const auto r = static_cast<Eigen::Index>(date_index[row[static_cast<size_t>(c_date)]]);
        const auto c = static_cast<Eigen::Index>(name_index[row[static_cast<size_t>(c_series)]]);
        panel.vol(r, c) = csv::to_double(row[static_cast<size_t>(c_vol)], path);
        panel.skew(r, c) = csv::to_double(row[static_cast<size_t>(c_skew)], path);
        panel.kurt(r, c) = csv::to_double(row[static_cast<size_t>(c_kurt)], path);
    }
    if (panel.vol.hasNaN() || panel.skew.hasNaN() || panel.kurt.hasNaN())
        throw data_error(path + ": incomplete moment panel (missing date/series cells)");
    return panel;
}

}  // namespace mcn::damm
