// Python bindings for the core operations: graphs, designs, samplers,
// simulation and metrics.  Matrices cross the boundary as numpy arrays.
#include "sanova/dataset.hpp"
#include "sanova/run_io.hpp"
#include "sanova/samplers.hpp"
#include "sanova/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sanova;

namespace {

RunConfig config_from_kwargs(int chains, int iters, int burn_in, int thin,
                             std::uint64_t seed, int adapt_window, int threads) {
    RunConfig cfg;
    cfg.n_chains = chains;
    cfg.n_iter = iters;
    cfg.burn_in = burn_in;
    cfg.thin = thin;
    cfg.seed = seed;
    cfg.adapt_window = adapt_window;
    cfg.n_threads = threads;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_sanova, m) {
    m.doc() = "Smoothed-ANOVA spatial disease mapping core";

    py::class_<RegionGraph>(m, "RegionGraph")
        .def_readonly("n_regions", &RegionGraph::n_regions)
        .def_readonly("neighbors", &RegionGraph::neighbors)
        .def_readonly("warnings", &RegionGraph::warnings)
        .def("degree", &RegionGraph::degree);

    py::class_<CarStructure>(m, "CarStructure")
        .def_readonly("Q", &CarStructure::Q)
        .def_readonly("V", &CarStructure::V)
        .def_readonly("eigenvalues", &CarStructure::eigenvalues)
        .def_readonly("islands", &CarStructure::islands)
        .def_property_readonly("n_regions", &CarStructure::n_regions)
        .def_property_readonly("rank", &CarStructure::rank);

    py::class_<ContrastMatrix>(m, "ContrastMatrix")
        .def_readonly("name", &ContrastMatrix::name)
        .def_readonly("h_plus", &ContrastMatrix::h_plus)
        .def_readonly("max_adjustment", &ContrastMatrix::max_adjustment);

    py::class_<SanovaDesign>(m, "SanovaDesign")
        .def_readonly("X", &SanovaDesign::X)
        .def_readonly("car", &SanovaDesign::car)
        .def_readonly("contrasts", &SanovaDesign::contrasts)
        .def_property_readonly("n_regions", &SanovaDesign::n_regions)
        .def_property_readonly("n_diseases", &SanovaDesign::n_diseases)
        .def_property_readonly("n_cells", &SanovaDesign::n_cells);

    py::class_<ArealDataset>(m, "ArealDataset")
        .def_readonly("region_ids", &ArealDataset::region_ids)
        .def_readonly("disease_names", &ArealDataset::disease_names)
        .def_readonly("population", &ArealDataset::population)
        .def_readonly("counts", &ArealDataset::counts)
        .def("expected_matrix", &ArealDataset::expected_matrix);

    py::class_<PosteriorDraws>(m, "PosteriorDraws")
        .def_readonly("names", &PosteriorDraws::names)
        .def("merged", &PosteriorDraws::merged)
        .def("merged_loglik", &PosteriorDraws::merged_loglik)
        .def("pooled_column", &PosteriorDraws::pooled_column)
        .def("index_of", &PosteriorDraws::index_of)
        .def_property_readonly("n_chains", &PosteriorDraws::n_chains)
        .def_property_readonly("total_kept", &PosteriorDraws::total_kept);

    py::class_<AmseResult>(m, "AmseResult")
        .def_readonly("amse", &AmseResult::amse)
        .def_readonly("mcse", &AmseResult::mcse);
    py::class_<MbiasResult>(m, "MbiasResult")
        .def_readonly("p025", &MbiasResult::p025)
        .def_readonly("p50", &MbiasResult::p50)
        .def_readonly("p975", &MbiasResult::p975);
    py::class_<DicResult>(m, "DicResult")
        .def_readonly("dbar", &DicResult::dbar)
        .def_readonly("pd", &DicResult::pd)
        .def_readonly("dic", &DicResult::dic);

    // Graph and spectral structure.
    m.def("build_graph", &build_graph, py::arg("n_regions"), py::arg("pairs"));
    m.def("load_adjacency", &load_adjacency, py::arg("path"));
    m.def("count_islands", &count_islands);
    m.def("car_precision", &car_precision);
    m.def("build_car", &build_car);
    m.def("spectral_car", &spectral_car, py::arg("Q"), py::arg("islands"));
    m.def("car_log_kernel", &car_log_kernel, py::arg("car"), py::arg("phi"),
          py::arg("tau"));

    // Contrasts and design.
    m.def("make_contrasts", &make_contrasts, py::arg("name"), py::arg("n") = 3);
    m.def("load_contrasts", &load_contrasts, py::arg("path"));
    m.def("helmert_basis", &helmert_basis);
    m.def("ham_verbatim", &ham_verbatim);
    m.def("build_design", &build_design, py::arg("car"), py::arg("contrasts"));
    m.def("induced_phi_precision", &induced_phi_precision, py::arg("car"),
          py::arg("contrasts"), py::arg("tau"));
    m.def("kronecker", &kronecker);

    // Data handling.
    m.def("load_dataset", &load_dataset, py::arg("counts_path"), py::arg("adjacency_path"));
    m.def("load_counts", &load_counts, py::arg("path"));
    m.def("internal_standardization", &internal_standardization);

    // Samplers.  Hyperparameters follow the defaults used throughout:
    // Gamma(0.1, 0.1) smoothing/noise precisions, flat or N(0, 1e6) fixed
    // effects depending on the likelihood.
    const auto cfg_args = [](py::module_&) {};
    (void)cfg_args;
    m.def(
        "fit_sanova_normal",
        [](const SanovaDesign& design, const Vector& y, int chains, int iters, int burn_in,
           int thin, std::uint64_t seed, int adapt_window, int threads,
           bool include_interactions) {
            SanovaSpec spec = SanovaSpec::normal_model(design);
            spec.include_interactions = include_interactions;
            auto draws = gibbs_sanova_normal(
                spec, y,
                config_from_kwargs(chains, iters, burn_in, thin, seed, adapt_window,
                                   threads));
            return py::make_tuple(draws, cell_draws(spec, draws));
        },
        py::arg("design"), py::arg("y"), py::arg("chains") = 3, py::arg("iters") = 10000,
        py::arg("burn_in") = 2000, py::arg("thin") = 1, py::arg("seed") = 0,
        py::arg("adapt_window") = 100, py::arg("threads") = 0,
        py::arg("include_interactions") = true,
        "Returns (draws, cell_fit_draws) for the normal-likelihood model.");
    m.def(
        "fit_sanova_poisson",
        [](const SanovaDesign& design, const Vector& counts, const Vector& expected,
           int chains, int iters, int burn_in, int thin, std::uint64_t seed,
           int adapt_window, int threads, bool include_interactions) {
            SanovaSpec spec = SanovaSpec::poisson_model(design);
            spec.include_interactions = include_interactions;
            auto cfg = config_from_kwargs(chains, iters, burn_in, thin, seed, adapt_window,
                                          threads);
            auto draws = mh_sanova_poisson(spec, counts, expected, cfg);
            CellData data{counts, expected};
            auto d = dic_from_fit(spec, draws, data);
            return py::make_tuple(draws, cell_draws(spec, draws), d);
        },
        py::arg("design"), py::arg("counts"), py::arg("expected"), py::arg("chains") = 3,
        py::arg("iters") = 10000, py::arg("burn_in") = 2000, py::arg("thin") = 1,
        py::arg("seed") = 0, py::arg("adapt_window") = 100, py::arg("threads") = 0,
        py::arg("include_interactions") = true,
        "Returns (draws, cell_fit_draws, dic) for the Poisson-likelihood model.");
    m.def(
        "fit_mcar",
        [](const RegionGraph& graph, const Matrix& y, const Matrix& expected,
           const std::string& likelihood, double wishart_r, double wishart_df, int chains,
           int iters, int burn_in, int thin, std::uint64_t seed, int adapt_window,
           int threads) {
            const Likelihood lik = likelihood_from_string(likelihood);
            auto spec = McarSpec::with_identity_rate(lik, graph,
                                                     static_cast<int>(y.cols()), wishart_r,
                                                     wishart_df);
            auto cfg = config_from_kwargs(chains, iters, burn_in, thin, seed, adapt_window,
                                          threads);
            auto draws = lik == Likelihood::normal
                             ? gibbs_mcar_normal(spec, y, cfg)
                             : mh_mcar_poisson(spec, y, expected, cfg);
            return py::make_tuple(draws, cell_draws(spec, draws));
        },
        py::arg("graph"), py::arg("y"), py::arg("expected") = Matrix(),
        py::arg("likelihood") = "poisson", py::arg("wishart_r") = 1.0,
        py::arg("wishart_df") = -1.0, py::arg("chains") = 3, py::arg("iters") = 10000,
        py::arg("burn_in") = 2000, py::arg("thin") = 1, py::arg("seed") = 0,
        py::arg("adapt_window") = 100, py::arg("threads") = 0,
        "Returns (draws, cell_fit_draws) for the separable multivariate model.");
    m.def(
        "fit_univariate_car",
        [](const RegionGraph& graph, const Vector& counts, const Vector& expected, double a,
           int chains, int iters, int burn_in, int thin, std::uint64_t seed,
           int adapt_window, int threads) {
            return fit_univariate_car(
                graph, counts, expected, GammaPrior{a, a},
                config_from_kwargs(chains, iters, burn_in, thin, seed, adapt_window,
                                   threads));
        },
        py::arg("graph"), py::arg("counts"), py::arg("expected"), py::arg("a") = 1.0,
        py::arg("chains") = 3, py::arg("iters") = 10000, py::arg("burn_in") = 2000,
        py::arg("thin") = 1, py::arg("seed") = 0, py::arg("adapt_window") = 100,
        py::arg("threads") = 0);

    m.def("gelman_rubin", &gelman_rubin);
    m.def("quantile", &quantile, py::arg("values"), py::arg("p"));

    // Metrics.
    m.def("amse", &amse, py::arg("estimates"), py::arg("truths"));
    m.def("mbias", &mbias, py::arg("estimates"), py::arg("truths"));
    m.def("pi_rate", &pi_rate, py::arg("lower"), py::arg("upper"), py::arg("truths"));
    m.def("dic", &dic, py::arg("loglik_draws"), py::arg("loglik_at_posterior_mean"));

    // Simulation study.
    m.def(
        "run_tournament",
        [](const SanovaDesign& design, const Vector& expected,
           const std::vector<std::string>& cells, const std::vector<std::string>& methods,
           int subjects, std::uint64_t seed, int iters, int burn_in, int workers) {
            TournamentConfig cfg;
            for (const auto& c : cells) cfg.cells.push_back(DesignCell::by_name(c));
            for (const auto& mth : methods) cfg.methods.push_back(method_from_string(mth));
            cfg.n_subjects = subjects;
            cfg.seed = seed;
            cfg.mcmc = RunConfig::reduced_preset(seed);
            cfg.mcmc.n_iter = iters;
            cfg.mcmc.burn_in = burn_in;
            cfg.n_workers = workers;
            auto result = run_tournament(cfg, design, expected);
            py::list rows;
            for (const auto& r : result.table) {
                py::dict d;
                d["cell"] = r.cell;
                d["method"] = to_string(r.method);
                d["amse"] = r.amse.amse;
                d["amse_mcse"] = r.amse.mcse;
                d["mbias"] = py::make_tuple(r.mbias.p025, r.mbias.p50, r.mbias.p975);
                d["pi_rate"] = r.pi_rate;
                d["subjects"] = r.n_subjects;
                d["failures"] = r.failures;
                rows.append(d);
            }
            return rows;
        },
        py::arg("design"), py::arg("expected"), py::arg("cells"), py::arg("methods"),
        py::arg("subjects") = 100, py::arg("seed") = 0, py::arg("iters") = 4000,
        py::arg("burn_in") = 1000, py::arg("workers") = 0);

    m.def("save_draws", &save_draws, py::arg("path"), py::arg("draws"));
    m.def("load_draws", &load_draws, py::arg("path"));
}
