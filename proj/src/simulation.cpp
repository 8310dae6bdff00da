#include "sanova/simulation.hpp"

#include "sanova/rng.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace sanova {

DesignCell DesignCell::by_name(const std::string& name) {
    DesignCell cell;
    cell.name = name;
    cell.ratios = Vector(3);
    if (name == "Data1") {
        cell.likelihood = Likelihood::normal;
        cell.eta0 = 1.0;
        cell.ratios << 100, 100, 0.1;
    } else if (name == "Data2") {
        cell.likelihood = Likelihood::normal;
        cell.eta0 = 1.0;
        cell.ratios << 0.1, 100, 0.1;
    } else if (name == "Data3") {
        cell.likelihood = Likelihood::normal;
        cell.eta0 = 10.0;
        cell.ratios << 100, 100, 0.1;
    } else if (name == "Data4") {
        cell.likelihood = Likelihood::normal;
        cell.eta0 = 10.0;
        cell.ratios << 0.1, 100, 0.1;
    } else if (name == "Data5") {
        cell.likelihood = Likelihood::poisson;
        cell.ratios << 100, 100, 0.1;
    } else if (name == "Data6") {
        cell.likelihood = Likelihood::poisson;
        cell.ratios << 0.1, 100, 0.1;
    } else {
        throw std::invalid_argument("unknown design cell: " + name +
                                    " (expected Data1..Data6)");
    }
    return cell;
}

std::vector<DesignCell> DesignCell::all() {
    std::vector<DesignCell> cells;
    for (int k = 1; k <= 6; ++k) cells.push_back(by_name("Data" + std::to_string(k)));
    return cells;
}

std::vector<Subject> generate_subjects(std::uint64_t seed, int count, Likelihood lik,
                                       const CarStructure& car, int n_diseases) {
    if (count < 1) throw std::invalid_argument("need at least one subject");
    const int block = car.n_regions() - 1;
    const Vector d_minus = car.contrast_eigenvalues();
    if ((d_minus.array() <= 0).any()) {
        throw std::invalid_argument("subject generation expects a connected graph");
    }
    const int dim = n_diseases + n_diseases * block;
    Rng rng(derive_seed(seed, 0x5ab7ec75ULL));
    std::vector<Subject> subjects;
    subjects.reserve(count);
    for (int s = 0; s < count; ++s) {
        Subject subj;
        subj.delta = Vector::Constant(dim, 5.0);
        // Smoothed entries: N(0, (I kron D^-)^{-1}), coordinate variance 1/d_k.
        for (int g = 0; g < n_diseases; ++g) {
            for (int k = 0; k < block; ++k) {
                subj.delta[n_diseases + g * block + k] =
                    rng.normal() / std::sqrt(d_minus[k]);
            }
        }
        if (lik == Likelihood::normal) {
            subj.gamma = rng.normal_vector(car.n_regions() * n_diseases);
        }
        subjects.push_back(std::move(subj));
    }
    return subjects;
}

SimulatedDataset make_dataset(const Subject& subject, const DesignCell& cell,
                              const SanovaDesign& design, const Vector& expected,
                              std::uint64_t count_seed) {
    const int cells = design.n_cells();
    const int n = design.n_diseases();
    const int block = design.smoothed_block_size();
    if (subject.delta.size() != n + n * block) {
        throw std::invalid_argument("subject dimension does not match design");
    }
    const Vector tau = cell.true_tau();
    if (tau.size() != n) throw std::invalid_argument("cell has wrong number of precisions");

    // Theta = diag(1_n, tau0^{-1/2} 1, tau1^{-1/2} 1, ...) delta.
    Vector theta = subject.delta;
    for (int g = 0; g < n; ++g) {
        theta.segment(n + g * block, block) /= std::sqrt(tau[g]);
    }
    SimulatedDataset out;
    out.truth = design.X * theta;

    if (cell.likelihood == Likelihood::normal) {
        if (subject.gamma.size() != cells) {
            throw std::invalid_argument("normal subject needs a gamma draw");
        }
        out.y = out.truth + subject.gamma / std::sqrt(cell.eta0);
    } else {
        if (expected.size() != cells) {
            throw std::invalid_argument("poisson cell needs expected counts");
        }
        Rng rng(count_seed);
        out.y.resize(cells);
        for (int c = 0; c < cells; ++c) {
            out.y[c] = static_cast<double>(
                rng.poisson(expected[c] * std::exp(out.truth[c])));
        }
    }
    return out;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::sanova_ha1: return "SANOVA-HA1";
        case Method::sanova_ha2: return "SANOVA-HA2";
        case Method::sanova_ham: return "SANOVA-HAM";
        case Method::mcar_0_002: return "MCAR-0.002";
        case Method::mcar_1: return "MCAR-1";
        case Method::mcar_200: return "MCAR-200";
    }
    throw std::logic_error("unreachable");
}

Method method_from_string(const std::string& s) {
    for (Method m : all_methods()) {
        if (to_string(m) == s) return m;
    }
    throw std::invalid_argument("unknown method: " + s);
}

std::vector<Method> all_methods() {
    return {Method::sanova_ha1, Method::sanova_ha2,  Method::sanova_ham,
            Method::mcar_0_002, Method::mcar_1,      Method::mcar_200};
}

const CellMethodResult& TournamentResult::lookup(const std::string& cell, Method m) const {
    for (const auto& r : table) {
        if (r.cell == cell && r.method == m) return r;
    }
    throw std::invalid_argument("no tournament entry for " + cell + "/" + to_string(m));
}

namespace {

struct FitSummary {
    Vector median, lower, upper;
    bool ok = false;
    std::string error;
};

// Per-cell posterior median and equal-tailed 95% interval of the cell-level
// fit.
FitSummary summarize_cells(const Matrix& cell_draw_matrix) {
    FitSummary out;
    const auto cells = cell_draw_matrix.cols();
    out.median.resize(cells);
    out.lower.resize(cells);
    out.upper.resize(cells);
    for (Eigen::Index c = 0; c < cells; ++c) {
        Vector col = cell_draw_matrix.col(c);
        out.median[c] = quantile(col, 0.5);
        out.lower[c] = quantile(col, 0.025);
        out.upper[c] = quantile(col, 0.975);
    }
    out.ok = true;
    return out;
}

}  // namespace

TournamentResult run_tournament(const TournamentConfig& cfg, const SanovaDesign& design,
                                const Vector& expected) {
    if (cfg.cells.empty() || cfg.methods.empty()) {
        throw std::invalid_argument("tournament needs at least one cell and method");
    }
    const int n = design.n_diseases();
    const int n_regions = design.n_regions();
    const int cells_dim = design.n_cells();

    // Subjects are drawn once per likelihood family and shared across cells
    // and methods (paired comparisons).
    auto normal_subjects =
        generate_subjects(cfg.seed, cfg.n_subjects, Likelihood::normal, design.car, n);
    auto poisson_subjects = generate_subjects(derive_seed(cfg.seed, 0x90155ULL),
                                              cfg.n_subjects, Likelihood::poisson,
                                              design.car, n);

    // Fitting machinery, built once.
    const RegionGraph graph = [&] {
        // Recover the neighbor structure from Q.
        RegionGraph g;
        g.n_regions = n_regions;
        g.neighbors.resize(n_regions);
        for (int i = 0; i < n_regions; ++i) {
            for (int j = 0; j < n_regions; ++j) {
                if (i != j && design.car.Q(i, j) != 0.0) g.neighbors[i].push_back(j);
            }
        }
        return g;
    }();
    const SanovaDesign design_ha2 = build_design(design.car, make_contrasts("HA2"));
    const SanovaDesign design_ham = build_design(design.car, make_contrasts("HAM"));

    struct Task {
        int cell_idx, subject_idx;
    };
    std::vector<Task> tasks;
    for (int c = 0; c < static_cast<int>(cfg.cells.size()); ++c) {
        for (int s = 0; s < cfg.n_subjects; ++s) tasks.push_back({c, s});
    }

    // results[cell][method][subject]
    std::vector<std::vector<std::vector<FitSummary>>> results(
        cfg.cells.size(),
        std::vector<std::vector<FitSummary>>(cfg.methods.size(),
                                             std::vector<FitSummary>(cfg.n_subjects)));
    std::vector<std::vector<Vector>> truths(cfg.cells.size(),
                                            std::vector<Vector>(cfg.n_subjects));

    auto run_task = [&](const Task& task) {
        const DesignCell& cell = cfg.cells[task.cell_idx];
        const Subject& subject = cell.likelihood == Likelihood::normal
                                     ? normal_subjects[task.subject_idx]
                                     : poisson_subjects[task.subject_idx];
        const std::uint64_t data_seed = derive_seed(
            cfg.seed, 0xda7aULL ^ (static_cast<std::uint64_t>(task.cell_idx) << 32) ^
                          static_cast<std::uint64_t>(task.subject_idx));
        const SimulatedDataset data =
            make_dataset(subject, cell, design, expected, data_seed);
        truths[task.cell_idx][task.subject_idx] = data.truth;

        for (int m = 0; m < static_cast<int>(cfg.methods.size()); ++m) {
            const Method method = cfg.methods[m];
            RunConfig mcmc = cfg.mcmc;
            mcmc.n_threads = 1;  // parallelism lives at the task level
            mcmc.seed = derive_seed(
                cfg.seed, 0xf17ULL ^ (static_cast<std::uint64_t>(task.cell_idx) << 40) ^
                              (static_cast<std::uint64_t>(m) << 20) ^
                              static_cast<std::uint64_t>(task.subject_idx));
            FitSummary& slot = results[task.cell_idx][m][task.subject_idx];
            try {
                Matrix cell_draw_matrix;
                switch (method) {
                    case Method::sanova_ha1:
                    case Method::sanova_ha2:
                    case Method::sanova_ham: {
                        const SanovaDesign& fit_design =
                            method == Method::sanova_ha1
                                ? design
                                : (method == Method::sanova_ha2 ? design_ha2 : design_ham);
                        if (cell.likelihood == Likelihood::normal) {
                            SanovaSpec spec = SanovaSpec::normal_model(fit_design);
                            auto draws = gibbs_sanova_normal(spec, data.y, mcmc);
                            cell_draw_matrix = cell_draws(spec, draws);
                        } else {
                            SanovaSpec spec = SanovaSpec::poisson_model(fit_design);
                            auto draws = mh_sanova_poisson(spec, data.y, expected, mcmc);
                            cell_draw_matrix = cell_draws(spec, draws);
                        }
                        break;
                    }
                    case Method::mcar_0_002:
                    case Method::mcar_1:
                    case Method::mcar_200: {
                        const double r = method == Method::mcar_0_002
                                             ? 0.002
                                             : (method == Method::mcar_1 ? 1.0 : 200.0);
                        McarSpec spec =
                            McarSpec::with_identity_rate(cell.likelihood, graph, n, r);
                        Matrix y_mat(n_regions, n), e_mat(n_regions, n);
                        for (int i = 0; i < n_regions; ++i) {
                            for (int j = 0; j < n; ++j) {
                                y_mat(i, j) = data.y[cell_index(i, j, n)];
                                e_mat(i, j) = expected.size() == cells_dim
                                                  ? expected[cell_index(i, j, n)]
                                                  : 1.0;
                            }
                        }
                        auto draws =
                            cell.likelihood == Likelihood::normal
                                ? gibbs_mcar_normal(spec, y_mat, mcmc)
                                : mh_mcar_poisson(spec, y_mat, e_mat, mcmc);
                        cell_draw_matrix = cell_draws(spec, draws);
                        break;
                    }
                }
                slot = summarize_cells(cell_draw_matrix);
            } catch (const std::exception& e) {
                slot.ok = false;
                slot.error = to_string(method) + "/" + cell.name + "/subject " +
                             std::to_string(task.subject_idx) + ": " + e.what();
            }
        }
    };

    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    const int workers = cfg.n_workers > 0 ? cfg.n_workers : hw;
    if (workers <= 1) {
        for (const auto& t : tasks) run_task(t);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const size_t k = next.fetch_add(1);
                if (k >= tasks.size()) return;
                run_task(tasks[k]);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Deterministic reduction by (cell, method).
    TournamentResult out;
    for (int c = 0; c < static_cast<int>(cfg.cells.size()); ++c) {
        for (int m = 0; m < static_cast<int>(cfg.methods.size()); ++m) {
            CellMethodResult r;
            r.cell = cfg.cells[c].name;
            r.method = cfg.methods[m];
            std::vector<int> good;
            for (int s = 0; s < cfg.n_subjects; ++s) {
                if (results[c][m][s].ok) good.push_back(s);
                else r.failures.push_back(results[c][m][s].error);
            }
            r.n_subjects = static_cast<int>(good.size());
            if (r.n_subjects >= 2) {
                Matrix est(r.n_subjects, cells_dim), tru(r.n_subjects, cells_dim);
                Matrix lo(r.n_subjects, cells_dim), hi(r.n_subjects, cells_dim);
                for (int k = 0; k < r.n_subjects; ++k) {
                    const auto& f = results[c][m][good[k]];
                    est.row(k) = f.median.transpose();
                    lo.row(k) = f.lower.transpose();
                    hi.row(k) = f.upper.transpose();
                    tru.row(k) = truths[c][good[k]].transpose();
                }
                r.amse = amse(est, tru);
                r.mbias = mbias(est, tru);
                r.pi_rate = pi_rate(lo, hi, tru);
            }
            out.table.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace sanova
