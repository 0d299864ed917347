#pragma once

#include "mcn/calendar.hpp"
#include "mcn/shocks.hpp"
#include "mcn/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mcn::synth {

/// Block-structured daily price panel: a bond-like block and an equity-like
/// block with strong within-block and weak cross-block VAR(1) coupling.
/// Events open temporary windows of elevated cross-block coupling.
struct PriceConfig {
    std::uint64_t seed = 7;
    int n = 9;
    int t_days = 2000;
    int bond_count = 5;            // first block; the rest is the equity block
    Date start_date{2015, 1, 2};
    double own_persistence = 0.05;
    double within_coupling = 0.30;  // row mass spread over within-block neighbours
    double cross_coupling = 0.01;   // baseline cross-block row mass
    double within_corr = 0.5;       // innovation correlation inside a block
    double bond_vol = 0.4;          // daily percent innovation scale
    double equity_vol = 1.5;
    double holiday_rate = 0.0;      // per-series chance of dropping a date

    struct Event {
        int start_day = 0;  // row index into the trading calendar
        int length = 0;
        double coupling = 0.0;  // cross-block row mass inside the window
    };
    std::vector<Event> events;

    int meeting_every = 42;  // trading days between FOMC-style meetings
};

struct PriceTruth {
    std::vector<ts::RawSeries> series;   // per-series calendars (holidays removed)
    ts::PricePanel panel;                // aligned panel
    ts::EventCalendar events;            // synthetic FOMC calendar
    Eigen::MatrixXd base_coupling;       // baseline VAR(1) matrix
    Eigen::MatrixXd innovation_cov;
    std::vector<int> block;              // 0 = bond-like, 1 = equity-like
    std::vector<int> event_meetings;     // calendar indices carrying coupling windows
    std::uint64_t seed = 0;
};

PriceTruth gen_price_panel(const PriceConfig& config);

/// Monthly dataset for the shock-identification stage with known orthogonal
/// structural shocks of configured impact signs.
struct ShockConfig {
    std::uint64_t seed = 11;
    int t_months = 400;
    int first_month = 2015 * 12;     // January 2015
    double meeting_rate = 0.9;       // chance a month has a meeting
    Eigen::Matrix2d impact{{0.8, 0.6}, {-0.9, 0.7}};  // columns: MP, IF
    double if_scale = 1.0;           // 0 silences the information shock
    double decision_threshold = 0.4; // |MP shock| above this flips hike/cut

    /// Use an externally fixed meeting calendar (dates inside months).
    std::vector<Date> meeting_dates;  // empty = draw from meeting_rate
};

struct ShockTruth {
    std::vector<shock::MeetingSurprise> meetings;
    shock::SurprisePanel surprises;
    shock::MacroPanel macro;
    ts::EventCalendar events;
    Eigen::VectorXd true_mp, true_if;  // contributions to the rate surprise
    Eigen::Matrix2d impact;
    std::uint64_t seed = 0;
};

ShockTruth gen_shock_dataset(const ShockConfig& config);

/// Companion-form spectral radius of a VAR(1) coefficient matrix.
double spectral_radius(const Eigen::MatrixXd& coupling);

// File emission for the CLI: prices.csv, fomc_events.csv, surprises.csv,
// macro.csv plus truth sidecars.
void write_price_files(const std::string& out_dir, const PriceTruth& truth);
void write_shock_files(const std::string& out_dir, const ShockTruth& truth);

}  // namespace mcn::synth
