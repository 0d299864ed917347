#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace mcn::opt {

struct NelderMeadOptions {
    int max_iterations = 4000;
    double rel_tol = 1e-8;   // relative best-value change over tol_window iterations
    int tol_window = 10;
    double initial_step = 0.25;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Standard Nelder-Mead simplex minimizer. Deterministic given the start
/// point. The objective may return +inf to reject a region.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {}) {
    const int n = static_cast<int>(x0.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

    std::vector<Eigen::VectorXd> pts(static_cast<size_t>(n) + 1, x0);
    std::vector<double> vals(static_cast<size_t>(n) + 1);
    for (int i = 0; i < n; ++i) {
        double step = opts.initial_step;
        if (std::abs(x0(i)) > 1.0) step *= std::abs(x0(i));
        pts[static_cast<size_t>(i) + 1](i) += step;
    }
    for (size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

    std::vector<int> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    auto sort_simplex = [&] {
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return vals[static_cast<size_t>(a)] < vals[static_cast<size_t>(b)]; });
    };

    NelderMeadResult res;
    double window_best = std::numeric_limits<double>::infinity();
    int window_mark = 0;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        sort_simplex();
        const int best = order[0];
        const int worst = order[static_cast<size_t>(n)];
        const int second_worst = order[static_cast<size_t>(n) - 1];

        // Convergence: relative improvement of the best value over a window.
        if (iter - window_mark >= opts.tol_window) {
            const double denom = std::max(1.0, std::abs(vals[static_cast<size_t>(best)]));
            if (window_best - vals[static_cast<size_t>(best)] < opts.rel_tol * denom) {
                res.converged = true;
                res.iterations = iter;
                break;
            }
            window_best = vals[static_cast<size_t>(best)];
            window_mark = iter;
        }
        if (iter == 0) window_best = vals[static_cast<size_t>(best)];

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (size_t i = 0; i < order.size(); ++i) {
            if (order[i] != worst) centroid += pts[static_cast<size_t>(order[i])];
        }
        centroid /= n;

        const Eigen::VectorXd reflected = centroid + alpha * (centroid - pts[static_cast<size_t>(worst)]);
        const double f_r = f(reflected);

        if (f_r < vals[static_cast<size_t>(best)]) {
            const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
            const double f_e = f(expanded);
            if (f_e < f_r) {
                pts[static_cast<size_t>(worst)] = expanded;
                vals[static_cast<size_t>(worst)] = f_e;
            } else {
                pts[static_cast<size_t>(worst)] = reflected;
                vals[static_cast<size_t>(worst)] = f_r;
            }
        } else if (f_r < vals[static_cast<size_t>(second_worst)]) {
            pts[static_cast<size_t>(worst)] = reflected;
            vals[static_cast<size_t>(worst)] = f_r;
        } else {
            const Eigen::VectorXd contracted =
                centroid + rho * (pts[static_cast<size_t>(worst)] - centroid);
            const double f_c = f(contracted);
            if (f_c < vals[static_cast<size_t>(worst)]) {
                pts[static_cast<size_t>(worst)] = contracted;
                vals[static_cast<size_t>(worst)] = f_c;
            } else {
                const Eigen::VectorXd& x_best = pts[static_cast<size_t>(best)];
                for (size_t i = 0; i < pts.size(); ++i) {
                    if (order[i] == best) continue;
                    auto& p = pts[static_cast<size_t>(order[i])];
                    p = x_best + shrink * (p - x_best);
                    vals[static_cast<size_t>(order[i])] = f(p);
                }
            }
        }
        res.iterations = iter + 1;
    }

    sort_simplex();
    res.x = pts[static_cast<size_t>(order[0])];
    res.value = vals[static_cast<size_t>(order[0])];
    return res;
}

}  // namespace mcn::opt
