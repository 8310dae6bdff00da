#pragma once

#include "sanova/draws.hpp"
#include "sanova/rng.hpp"

#include <functional>
#include <thread>

namespace sanova::detail {

// Run one worker per chain (bounded by cfg.n_threads / hardware) and merge
// results by chain index.  chain_fn must only touch its own outputs, so the
// merged draws are identical whatever the scheduling.
template <typename ChainFn>
PosteriorDraws run_chains(const RunConfig& cfg, std::vector<std::string> names,
                          ChainFn chain_fn) {
    cfg.validate();
    PosteriorDraws out;
    out.names = std::move(names);
    const int kept = cfg.kept_per_chain();
    out.chains.assign(cfg.n_chains, Matrix::Zero(kept, static_cast<int>(out.names.size())));
    out.loglik.assign(cfg.n_chains, Vector::Zero(kept));

    auto work = [&](int chain) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(chain)));
        chain_fn(chain, rng, out.chains[chain], out.loglik[chain]);
    };

    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    const int workers = cfg.n_threads > 0 ? std::min(cfg.n_threads, cfg.n_chains)
                                          : std::min(hw, cfg.n_chains);
    if (workers <= 1) {
        for (int c = 0; c < cfg.n_chains; ++c) work(c);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(cfg.n_chains);
        for (int c = 0; c < cfg.n_chains; ++c) pool.emplace_back(work, c);
        for (auto& t : pool) t.join();
    }
    out.check_finite();
    return out;
}

// Step-size controller for random-walk blocks: multiplicative adjustment
// toward the 0.2-0.5 acceptance band, applied every adapt_window sweeps
// during burn-in and frozen afterwards.
struct AdaptiveScale {
    double scale = 1.0;
    long proposed = 0;
    long accepted = 0;

    void record(bool accept) {
        ++proposed;
        if (accept) ++accepted;
    }
    void adapt() {
        if (proposed == 0) return;
        const double rate = static_cast<double>(accepted) / static_cast<double>(proposed);
        if (rate < 0.2) scale *= 0.7;
        else if (rate > 0.5) scale *= 1.4;
        scale = std::clamp(scale, 1e-4, 1e4);
        proposed = accepted = 0;
    }
    double rate() const {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed;
    }
};

}  // namespace sanova::detail
