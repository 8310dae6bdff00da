#include "sanova/draws.hpp"

#include <algorithm>
#include <cmath>

namespace sanova {

void RunConfig::validate() const {
    if (n_chains < 2) throw std::invalid_argument("need >= 2 chains for R-hat");
    if (burn_in < 0 || burn_in >= n_iter) {
        throw std::invalid_argument("burn_in must lie in [0, n_iter)");
    }
    if (thin < 1) throw std::invalid_argument("thin must be >= 1");
    if (adapt_window < 1) throw std::invalid_argument("adapt_window must be >= 1");
}

RunConfig RunConfig::paper_preset(std::uint64_t seed) {
    RunConfig cfg;
    cfg.seed = seed;
    return cfg;
}

RunConfig RunConfig::reduced_preset(std::uint64_t seed) {
    RunConfig cfg;
    cfg.n_iter = 4000;
    cfg.burn_in = 1000;
    cfg.seed = seed;
    return cfg;
}

int PosteriorDraws::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("no such parameter: " + name);
    return static_cast<int>(it - names.begin());
}

Matrix PosteriorDraws::merged() const {
    Matrix out(total_kept(), n_params());
    int row = 0;
    for (const auto& c : chains) {
        out.middleRows(row, c.rows()) = c;
        row += static_cast<int>(c.rows());
    }
    return out;
}

Vector PosteriorDraws::merged_loglik() const {
    Vector out(total_kept());
    int row = 0;
    for (const auto& l : loglik) {
        out.segment(row, l.size()) = l;
        row += static_cast<int>(l.size());
    }
    return out;
}

Vector PosteriorDraws::pooled_column(int param) const {
    Vector out(total_kept());
    int row = 0;
    for (const auto& c : chains) {
        out.segment(row, c.rows()) = c.col(param);
        row += static_cast<int>(c.rows());
    }
    return out;
}

void PosteriorDraws::check_finite() const {
    for (const auto& c : chains) {
        if (!c.allFinite()) throw std::runtime_error("non-finite posterior draw");
    }
    for (const auto& l : loglik) {
        if (!l.allFinite()) throw std::runtime_error("non-finite log-likelihood draw");
    }
}

double quantile(Vector values, double p) {
    if (values.size() == 0) throw std::invalid_argument("quantile of empty vector");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile level must be in [0,1]");
    std::sort(values.data(), values.data() + values.size());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(h));
    if (lo + 1 >= values.size()) return values[values.size() - 1];
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Vector gelman_rubin(const PosteriorDraws& draws) {
    const int m = draws.n_chains();
    const int k = draws.kept_per_chain();
    if (m < 2) throw std::invalid_argument("gelman_rubin needs >= 2 chains");
    if (k < 10) throw std::invalid_argument("gelman_rubin needs >= 10 kept draws");
    Vector rhat(draws.n_params());
    for (int p = 0; p < draws.n_params(); ++p) {
        double grand = 0.0;
        Vector means(m), vars(m);
        for (int c = 0; c < m; ++c) {
            const auto col = draws.chains[c].col(p);
            means[c] = col.mean();
            vars[c] = (col.array() - means[c]).square().sum() / (k - 1);
            grand += means[c];
        }
        grand /= m;
        const double w = vars.mean();
        const double b = static_cast<double>(k) / (m - 1) *
                         (means.array() - grand).square().sum();
        if (w <= 0.0) {
            rhat[p] = 1.0;  // constant parameter
            continue;
        }
        const double vhat =
            (k - 1.0) / k * w + (1.0 + 1.0 / m) * b / k;
        rhat[p] = std::sqrt(std::max(1.0, vhat / w));
    }
    return rhat;
}

std::vector<ParamSummary> summarize(const PosteriorDraws& draws) {
    const Vector rhat = gelman_rubin(draws);
    std::vector<ParamSummary> out;
    out.reserve(draws.n_params());
    for (int p = 0; p < draws.n_params(); ++p) {
        ParamSummary s;
        s.name = draws.names[p];
        const Vector col = draws.pooled_column(p);
        s.median = quantile(col, 0.5);
        s.q025 = quantile(col, 0.025);
        s.q975 = quantile(col, 0.975);
        s.rhat = rhat[p];
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace sanova
