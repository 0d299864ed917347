#pragma once

#include "mcn/calendar.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mcn::conn {

// Convention for `d` everywhere in this module: row i = receiver, column j =
// sender, rows sum to 1 (fractions). Emitted tables are in percent.

struct PairwiseIndices {
    Eigen::MatrixXd net;    // d_ij - d_ji, antisymmetric
    Eigen::MatrixXd total;  // d_ij + d_ji, symmetric
};
PairwiseIndices pairwise_indices(const Eigen::MatrixXd& d);

/// Total connectedness index in percent: (100/N) * sum of off-diagonal d.
double total_index(const Eigen::MatrixXd& d);

/// Table convention (plain sums, Table-2 margins) vs the 1/N-scaled index
/// form; both exclude the own share.
enum class IndexScale { table_sum, per_n };

struct DirectionalIndices {
    Eigen::VectorXd to, from, net, total;  // percent
    double total_index = 0;                // mean of `from`
};
DirectionalIndices directional_indices(const Eigen::MatrixXd& d,
                                       IndexScale scale = IndexScale::table_sum);

struct ConnectednessTable {
    std::vector<std::string> names;
    Eigen::MatrixXd d;  // percent
    Eigen::VectorXd to, from, net;
    double total = 0;
};

/// Builds the percent table with its margins from a fractional d.
ConnectednessTable make_table(const std::vector<std::string>& names, const Eigen::MatrixXd& d);

/// Sub-block restriction without renormalization. Rectangular blocks (e.g.
/// bond rows x equity columns) have no Net row or corner total.
struct LocalTable {
    std::vector<std::string> receivers, senders;
    Eigen::MatrixXd block;   // percent
    Eigen::VectorXd from;    // per receiver, off-own-name sums
    Eigen::VectorXd to;      // per sender
    Eigen::VectorXd net;     // square case only
    double total = 0;        // square case only: mean of `from`
    bool square = false;
};
LocalTable local_table(const ConnectednessTable& table, const std::vector<std::string>& receivers,
                       const std::vector<std::string>& senders);
LocalTable local_table(const ConnectednessTable& table, const std::vector<std::string>& subset);

/// Elementwise arithmetic mean over dates.
Eigen::MatrixXd average_d(const std::vector<Eigen::MatrixXd>& tables);

/// Table-2 style layout: pairwise block with a From column, then To and Net
/// rows; two-decimal percent cells.
void write_table_csv(const std::string& path, const ConnectednessTable& table);

void write_total_series_csv(const std::string& path, const std::vector<Date>& dates,
                            const Eigen::VectorXd& totals);

/// Long format `date,node,net`.
void write_net_series_csv(const std::string& path, const std::vector<Date>& dates,
                          const std::vector<std::string>& names, const Eigen::MatrixXd& net);

}  // namespace mcn::conn
