#include "mcn/synth.hpp"

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

namespace mcn::synth {

namespace {

using nlohmann::json;

Eigen::MatrixXd build_coupling(const PriceConfig& cfg, double cross_mass) {
    const int n = cfg.n;
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const bool bond_i = i < cfg.bond_count;
        const int within_n = bond_i ? cfg.bond_count : n - cfg.bond_count;
        const int cross_n = n - within_n;
        phi(i, i) = cfg.own_persistence;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool bond_j = j < cfg.bond_count;
            if (bond_i == bond_j) {
                phi(i, j) = cfg.within_coupling / std::max(within_n - 1, 1);
            } else {
                phi(i, j) = cross_mass / std::max(cross_n, 1);
            }
        }
    }
    return phi;
}

Eigen::MatrixXd build_innovation_cov(const PriceConfig& cfg) {
    const int n = cfg.n;
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
        const double vol_i = i < cfg.bond_count ? cfg.bond_vol : cfg.equity_vol;
        for (int j = 0; j < n; ++j) {
            const double vol_j = j < cfg.bond_count ? cfg.bond_vol : cfg.equity_vol;
            const bool same_block = (i < cfg.bond_count) == (j < cfg.bond_count);
            const double corr = i == j ? 1.0 : (same_block ? cfg.within_corr : 0.0);
            cov(i, j) = corr * vol_i * vol_j;
        }
    }
    return cov;
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open output file: " + path);
    out << doc.dump(2) << '\n';
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& coupling) {
    const Eigen::EigenSolver<Eigen::MatrixXd> es(coupling);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

PriceTruth gen_price_panel(const PriceConfig& cfg) {
    if (cfg.n < 2 || cfg.bond_count < 1 || cfg.bond_count >= cfg.n)
        throw config_error("gen_price_panel: need two nonempty blocks");
    if (cfg.t_days < 10) throw config_error("gen_price_panel: t_days too small");

    PriceTruth truth;
    truth.seed = cfg.seed;
    truth.base_coupling = build_coupling(cfg, cfg.cross_coupling);
    truth.innovation_cov = build_innovation_cov(cfg);

    const double base_radius = spectral_radius(truth.base_coupling);
    if (base_radius >= 1.0)
        throw config_error("gen_price_panel: unstable VAR, spectral radius " +
                           std::to_string(base_radius));
    for (const auto& ev : cfg.events) {
        const double r = spectral_radius(build_coupling(cfg, ev.coupling));
        if (r >= 1.0)
            throw config_error("gen_price_panel: unstable event window, spectral radius " +
                               std::to_string(r));
    }

    const std::vector<Date> calendar = weekday_calendar(cfg.start_date, cfg.t_days + 1);
    const Eigen::MatrixXd chol = truth.innovation_cov.llt().matrixL();

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Daily returns with event-windowed cross coupling.
    Eigen::MatrixXd returns(cfg.t_days, cfg.n);
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(cfg.n);
    Eigen::VectorXd noise(cfg.n);
    for (int t = 0; t < cfg.t_days; ++t) {
        double cross = cfg.cross_coupling;
        for (const auto& ev : cfg.events) {
            if (t >= ev.start_day && t < ev.start_day + ev.length) cross = ev.coupling;
        }
        const Eigen::MatrixXd phi =
            cross == cfg.cross_coupling ? truth.base_coupling : build_coupling(cfg, cross);
        for (int i = 0; i < cfg.n; ++i) noise(i) = normal(rng);
        const Eigen::VectorXd r = phi * prev + chol * noise;
        returns.row(t) = r.transpose();
        prev = r;
    }

    // Integrate to prices on the full calendar.
    ts::PricePanel panel;
    panel.dates = calendar;
    panel.values.resize(cfg.t_days + 1, cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
        truth.block.push_back(i < cfg.bond_count ? 0 : 1);
        const std::string prefix = i < cfg.bond_count ? "BOND" : "EQTY";
        panel.names.push_back(prefix + std::to_string(i < cfg.bond_count ? i + 1 : i + 1 - cfg.bond_count));
        double price = 100.0;
        panel.values(0, i) = price;
        for (int t = 0; t < cfg.t_days; ++t) {
            price *= std::exp(returns(t, i) / 100.0);
            panel.values(t + 1, i) = price;
        }
    }
    truth.panel = panel;

    // Per-series calendars with optional random holidays.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < cfg.n; ++i) {
        ts::RawSeries s;
        s.name = panel.names[static_cast<size_t>(i)];
        for (int t = 0; t <= cfg.t_days; ++t) {
            if (cfg.holiday_rate > 0 && unit(rng) < cfg.holiday_rate) continue;
            s.dates.push_back(panel.dates[static_cast<size_t>(t)]);
            s.values.push_back(panel.values(t, i));
        }
        if (s.dates.size() < 2) throw config_error("gen_price_panel: holiday_rate too aggressive");
        truth.series.push_back(std::move(s));
    }

    // FOMC-style meetings every `meeting_every` trading days; meetings whose
    // index opens an event window announce a direction, others mostly hold.
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    for (int t = cfg.meeting_every; t < cfg.t_days; t += cfg.meeting_every) {
        ts::EventCalendar::Record rec;
        rec.date = calendar[static_cast<size_t>(t)];
        bool opens_event = false;
        for (size_t e = 0; e < cfg.events.size(); ++e) {
            if (std::abs(cfg.events[e].start_day - t) < cfg.meeting_every / 2) {
                opens_event = true;
                truth.event_meetings.push_back(static_cast<int>(truth.events.records.size()));
            }
        }
        const double u = pick(rng);
        if (opens_event) {
            rec.decision = u < 0.5 ? ts::FomcDecision::hike : ts::FomcDecision::cut;
        } else {
            rec.decision = u < 0.3   ? ts::FomcDecision::hike
                           : u < 0.6 ? ts::FomcDecision::cut
                                     : ts::FomcDecision::unchanged;
        }
        truth.events.records.push_back(rec);
    }
    return truth;
}

ShockTruth gen_shock_dataset(const ShockConfig& cfg) {
    if (cfg.t_months < 30) throw config_error("gen_shock_dataset: t_months too small");
    ShockTruth truth;
    truth.seed = cfg.seed;
    truth.impact = cfg.impact;

    // The two structural shocks must satisfy the identifying sign pattern.
    if (!(cfg.impact(0, 0) > 0 && cfg.impact(1, 0) < 0 && cfg.impact(0, 1) > 0 &&
          cfg.impact(1, 1) > 0))
        throw config_error("gen_shock_dataset: impact signs must be (+,-) and (+,+)");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> day_pick(5, 25);

    truth.true_mp.setZero(cfg.t_months);
    truth.true_if.setZero(cfg.t_months);
    Eigen::MatrixXd m_values = Eigen::MatrixXd::Zero(cfg.t_months, 2);

    std::vector<bool> fixed_meeting(static_cast<size_t>(cfg.t_months), false);
    if (!cfg.meeting_dates.empty()) {
        for (const auto& d : cfg.meeting_dates) {
            const int at = d.month_index() - cfg.first_month;
            if (at >= 0 && at < cfg.t_months) fixed_meeting[static_cast<size_t>(at)] = true;
        }
    }

    for (int t = 0; t < cfg.t_months; ++t) {
        const bool meets = cfg.meeting_dates.empty() ? unit(rng) < cfg.meeting_rate
                                                     : fixed_meeting[static_cast<size_t>(t)];
        const int month = cfg.first_month + t;
        if (!meets) continue;

        const double eps_mp = normal(rng);
        const double eps_if = cfg.if_scale * normal(rng);
        const Eigen::Vector2d m = cfg.impact * Eigen::Vector2d(eps_mp, eps_if);
        m_values.row(t) = m.transpose();
        truth.true_mp(t) = cfg.impact(0, 0) * eps_mp;  // contribution to the rate surprise
        truth.true_if(t) = cfg.impact(0, 1) * eps_if;

        shock::MeetingSurprise meeting;
        meeting.date = Date{month / 12, month % 12 + 1, day_pick(rng)};
        meeting.fff = m(0);
        meeting.spx = m(1);
        truth.meetings.push_back(meeting);

        ts::EventCalendar::Record rec;
        rec.date = meeting.date;
        rec.decision = truth.true_mp(t) > cfg.decision_threshold    ? ts::FomcDecision::hike
                       : truth.true_mp(t) < -cfg.decision_threshold ? ts::FomcDecision::cut
                                                                    : ts::FomcDecision::unchanged;
        truth.events.records.push_back(rec);
    }

    truth.surprises = shock::aggregate_surprises(truth.meetings, cfg.first_month, cfg.t_months);

    // Macro block: stable AR dynamics, contemporaneous loading on the
    // surprise innovations, one lag of the surprises, and I(1) CPI / IP so
    // the differenced controls are stationary.
    Eigen::MatrixXd gamma(5, 2);
    gamma << 0.6, 0.3, -0.8, 0.9, 0.1, 0.05, 0.3, -0.2, -0.15, 0.1;
    Eigen::MatrixXd lag_m(5, 2);
    lag_m << 0.2, 0.1, -0.25, 0.2, 0.05, 0.02, 0.1, -0.05, -0.05, 0.03;

    truth.macro.first_month = cfg.first_month;
    truth.macro.values.setZero(cfg.t_months, 5);
    Eigen::VectorXd level{{0.5, 100.0, 100.0, 1.0, 100.0}};  // gs1, spx, cpi, ebp, indpro
    const Eigen::VectorXd persistence{{0.9, 0.85, 1.0, 0.8, 1.0}};
    const Eigen::VectorXd drift{{0.05, 15.0, 0.2, 0.2, 0.1}};
    const Eigen::VectorXd noise_scale{{0.15, 2.0, 0.3, 0.1, 0.4}};
    Eigen::Vector2d prev_m = Eigen::Vector2d::Zero();
    for (int t = 0; t < cfg.t_months; ++t) {
        Eigen::VectorXd next(5);
        for (int i = 0; i < 5; ++i) {
            // persistence 1 marks a random walk with drift (CPI, IP levels).
            const double base = persistence(i) == 1.0 ? level(i) + drift(i)
                                                      : drift(i) + persistence(i) * level(i);
            next(i) = base + noise_scale(i) * normal(rng);
        }
        next += gamma * m_values.row(t).transpose() + lag_m * prev_m;
        truth.macro.values.row(t) = next.transpose();
        level = next;
        prev_m = m_values.row(t).transpose();
    }
    return truth;
}

void write_price_files(const std::string& out_dir, const PriceTruth& truth) {
    {
        std::vector<std::string> header{"date"};
        header.insert(header.end(), truth.panel.names.begin(), truth.panel.names.end());
        std::vector<std::vector<std::string>> rows;
        for (size_t t = 0; t < truth.panel.dates.size(); ++t) {
            std::vector<std::string> row{format_date(truth.panel.dates[t])};
            for (Eigen::Index j = 0; j < truth.panel.values.cols(); ++j)
                row.push_back(csv::format_double(truth.panel.values(static_cast<Eigen::Index>(t), j)));
            rows.push_back(std::move(row));
        }
        csv::write_file(out_dir + "/prices.csv", header, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& rec : truth.events.records)
            rows.push_back({format_date(rec.date), ts::decision_name(rec.decision)});
        csv::write_file(out_dir + "/fomc_events.csv", {"date", "decision"}, rows);
    }
    json doc;
    doc["seed"] = truth.seed;
    doc["block"] = truth.block;
    doc["base_coupling"] = matrix_to_json(truth.base_coupling);
    doc["innovation_cov"] = matrix_to_json(truth.innovation_cov);
    doc["event_meetings"] = truth.event_meetings;
    write_json(out_dir + "/prices_truth.json", doc);
}

void write_shock_files(const std::string& out_dir, const ShockTruth& truth) {
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& m : truth.meetings)
            rows.push_back({format_date(m.date), csv::format_double(m.fff),
                            csv::format_double(m.spx)});
        csv::write_file(out_dir + "/surprises.csv", {"date", "fff_surprise", "spx_surprise"}, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (int t = 0; t < truth.macro.months(); ++t) {
            std::vector<std::string> row{format_month(truth.macro.first_month + t)};
            for (int c = 0; c < 5; ++c) row.push_back(csv::format_double(truth.macro.values(t, c)));
            rows.push_back(std::move(row));
        }
        csv::write_file(out_dir + "/macro.csv", {"month", "gs1", "spx", "cpi", "ebp", "indpro"},
                        rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& rec : truth.events.records)
            rows.push_back({format_date(rec.date), ts::decision_name(rec.decision)});
        csv::write_file(out_dir + "/fomc_events.csv", {"date", "decision"}, rows);
    }
    json doc;
    doc["seed"] = truth.seed;
    doc["impact"] = matrix_to_json(truth.impact);
    json mp = json::array(), info = json::array();
    for (int t = 0; t < truth.true_mp.size(); ++t) {
        mp.push_back(truth.true_mp(t));
        info.push_back(truth.true_if(t));
    }
    doc["true_mp"] = mp;
    doc["true_if"] = info;
    doc["first_month"] = format_month(truth.macro.first_month);
    write_json(out_dir + "/shocks_truth.json", doc);
}

}  // namespace mcn::synth
