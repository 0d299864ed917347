#include "mcn/connectedness.hpp"

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mcn::conn {

namespace {

int find_name(const std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw data_error("unknown node name: '" + name + "'");
    return static_cast<int>(it - names.begin());
}

}  // namespace

PairwiseIndices pairwise_indices(const Eigen::MatrixXd& d) {
    PairwiseIndices out;
    out.net = d - d.transpose();
    out.total = d + d.transpose();
    return out;
}

double total_index(const Eigen::MatrixXd& d) {
    const auto n = d.rows();
    double off_diag = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) off_diag += d(i, j);
        }
    }
    return 100.0 * off_diag / static_cast<double>(n);
}

DirectionalIndices directional_indices(const Eigen::MatrixXd& d, IndexScale scale) {
    const auto n = d.rows();
    DirectionalIndices out;
    out.to.setZero(n);
    out.from.setZero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            out.from(i) += d(i, j) * 100.0;
            out.to(j) += d(i, j) * 100.0;
        }
    }
    if (scale == IndexScale::per_n) {
        out.to /= static_cast<double>(n);
        out.from /= static_cast<double>(n);
    }
    out.net = out.to - out.from;
    out.total = out.to + out.from;
    out.total_index = out.from.mean();
    return out;
}

ConnectednessTable make_table(const std::vector<std::string>& names, const Eigen::MatrixXd& d) {
    if (static_cast<Eigen::Index>(names.size()) != d.rows() || d.rows() != d.cols())
        throw data_error("make_table: names/matrix dimension mismatch");
    ConnectednessTable t;
    t.names = names;
    t.d = 100.0 * d;
    const DirectionalIndices dir = directional_indices(d);
    t.to = dir.to;
    t.from = dir.from;
    t.net = dir.net;
    t.total = dir.total_index;
    return t;
}

LocalTable local_table(const ConnectednessTable& table, const std::vector<std::string>& receivers,
                       const std::vector<std::string>& senders) {
    if (receivers.empty() || senders.empty()) throw data_error("local_table: empty subset");
    LocalTable local;
    local.receivers = receivers;
    local.senders = senders;
    local.block.resize(static_cast<Eigen::Index>(receivers.size()),
                       static_cast<Eigen::Index>(senders.size()));
    for (size_t r = 0; r < receivers.size(); ++r) {
        const int i = find_name(table.names, receivers[r]);
        for (size_t c = 0; c < senders.size(); ++c) {
            const int j = find_name(table.names, senders[c]);
            local.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.d(i, j);
        }
    }

    local.from.setZero(static_cast<Eigen::Index>(receivers.size()));
    local.to.setZero(static_cast<Eigen::Index>(senders.size()));
    for (size_t r = 0; r < receivers.size(); ++r) {
        for (size_t c = 0; c < senders.size(); ++c) {
            if (receivers[r] == senders[c]) continue;  // own share never counts
            const double v = local.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            local.from(static_cast<Eigen::Index>(r)) += v;
            local.to(static_cast<Eigen::Index>(c)) += v;
        }
    }

    local.square = receivers == senders;
    if (local.square) {
        local.net = local.to - local.from;
        local.total = local.from.mean();
    }
    return local;
}

LocalTable local_table(const ConnectednessTable& table, const std::vector<std::string>& subset) {
    return local_table(table, subset, subset);
}

Eigen::MatrixXd average_d(const std::vector<Eigen::MatrixXd>& tables) {
    if (tables.empty()) throw data_error("average_d: no tables");
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(tables[0].rows(), tables[0].cols());
    for (const auto& t : tables) acc += t;
    return acc / static_cast<double>(tables.size());
}

void write_table_csv(const std::string& path, const ConnectednessTable& table) {
    const auto n = static_cast<Eigen::Index>(table.names.size());
    std::vector<std::string> header{"node"};
    header.insert(header.end(), table.names.begin(), table.names.end());
    header.push_back("from_others");

    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<std::string> row{table.names[static_cast<size_t>(i)]};
        for (Eigen::Index j = 0; j < n; ++j) row.push_back(csv::format_fixed(table.d(i, j), 2));
        row.push_back(csv::format_fixed(table.from(i), 2));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> to_row{"to_others"};
    for (Eigen::Index j = 0; j < n; ++j) to_row.push_back(csv::format_fixed(table.to(j), 2));
    to_row.push_back(csv::format_fixed(table.total, 2));
    rows.push_back(std::move(to_row));

    std::vector<std::string> net_row{"net"};
    for (Eigen::Index j = 0; j < n; ++j) net_row.push_back(csv::format_fixed(table.net(j), 2));
    net_row.emplace_back();
    rows.push_back(std::move(net_row));

    csv::write_file(path, header, rows);
}

void write_total_series_csv(const std::string& path, const std::vector<Date>& dates,
                            const Eigen::VectorXd& totals) {
    if (static_cast<Eigen::Index>(dates.size()) != totals.size())
        throw data_error("write_total_series_csv: dates/values size mismatch");
    std::vector<std::vector<std::string>> rows;
    for (size_t t = 0; t < dates.size(); ++t)
        rows.push_back({format_date(dates[t]), csv::format_double(totals(static_cast<Eigen::Index>(t)))});
    csv::write_file(path, {"date", "total"}, rows);
}

void write_net_series_csv(const std::string& path, const std::vector<Date>& dates,
                          const std::vector<std::string>& names, const Eigen::MatrixXd& net) {
    if (static_cast<Eigen::Index>(dates.size()) != net.rows() ||
        static_cast<Eigen::Index>(names.size()) != net.cols())
        throw data_error("write_net_series_csv: dimension mismatch");
    std::vector<std::vector<std::string>> rows;
    for (size_t t = 0; t < dates.size(); ++t) {
        for (size_t j = 0; j < names.size(); ++j) {
            rows.push_back({format_date(dates[t]), names[j],
                            csv::format_double(net(static_cast<Eigen::Index>(t),
                                                   static_cast<Eigen::Index>(j)))});
        }
    }
    csv::write_file(path, {"date", "node", "net"}, rows);
}

}  // namespace mcn::conn
