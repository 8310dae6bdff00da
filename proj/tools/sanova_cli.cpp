// Command-line front end: model fitting, simulation study, metrics and DIC.
#include "sanova/dataset.hpp"
#include "sanova/run_io.hpp"
#include "sanova/samplers.hpp"
#include "sanova/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sanova;

namespace {

// Resolve a data path: as given, then under SANOVA_DATA_DIR.
std::string resolve_path(const std::string& path) {
    if (path.empty() || fs::exists(path)) return path;
    if (const char* dir = std::getenv("SANOVA_DATA_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

struct CommonFitOptions {
    std::string data_path, adjacency_path, config_path, out_dir;
    std::string likelihood = "poisson";
    std::uint64_t seed = 0;
    int chains = 3, iters = 10000, burn_in = 2000, thin = 1, adapt_window = 100;
    int threads = 0;
};

void add_mcmc_options(CLI::App* cmd, CommonFitOptions& opt) {
    cmd->add_option("--data", opt.data_path, "counts file (region,disease,count,population)")
        ->required();
    cmd->add_option("--adjacency", opt.adjacency_path, "adjacency file")->required();
    cmd->add_option("--seed", opt.seed, "RNG master seed")->required();
    cmd->add_option("--config", opt.config_path, "key = value configuration file");
    cmd->add_option("--out", opt.out_dir, "output directory (draws/, summary/, manifest)");
    cmd->add_option("--likelihood", opt.likelihood, "normal or poisson");
    cmd->add_option("--chains", opt.chains, "number of chains");
    cmd->add_option("--iters", opt.iters, "iterations per chain");
    cmd->add_option("--burn-in", opt.burn_in, "burn-in iterations");
    cmd->add_option("--thin", opt.thin, "thinning interval");
    cmd->add_option("--adapt-window", opt.adapt_window, "Metropolis adaptation window");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = auto)");
}

// Config file values fill any option the user did not pass on the command
// line; flags win.
void apply_config(const CLI::App* cmd, CommonFitOptions& opt, std::string& contrasts,
                  std::string& wishart_r) {
    if (opt.config_path.empty()) return;
    for (const auto& [key, value] : read_config(opt.config_path)) {
        auto unset = [&](const std::string& flag) {
            const auto* o = cmd->get_option_no_throw(flag);
            return o == nullptr || o->count() == 0;
        };
        if (key == "likelihood") {
            if (unset("--likelihood")) opt.likelihood = value;
        } else if (key == "contrasts") {
            if (unset("--contrasts")) contrasts = value;
        } else if (key == "wishart_r") {
            if (unset("--wishart-r")) wishart_r = value;
        } else if (key == "chains") {
            if (unset("--chains")) opt.chains = std::stoi(value);
        } else if (key == "iters") {
            if (unset("--iters")) opt.iters = std::stoi(value);
        } else if (key == "burn_in") {
            if (unset("--burn-in")) opt.burn_in = std::stoi(value);
        } else if (key == "thin") {
            if (unset("--thin")) opt.thin = std::stoi(value);
        } else if (key == "adapt_window") {
            if (unset("--adapt-window")) opt.adapt_window = std::stoi(value);
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
}

RunConfig make_run_config(const CommonFitOptions& opt) {
    RunConfig cfg;
    cfg.n_chains = opt.chains;
    cfg.n_iter = opt.iters;
    cfg.burn_in = opt.burn_in;
    cfg.thin = opt.thin;
    cfg.seed = opt.seed;
    cfg.adapt_window = opt.adapt_window;
    cfg.n_threads = opt.threads;
    cfg.validate();
    return cfg;
}

json base_manifest(const std::string& command, const CommonFitOptions& opt) {
    json m;
    m["command"] = command;
    m["seed"] = opt.seed;
    m["mcmc"] = {{"chains", opt.chains},
                 {"iters", opt.iters},
                 {"burn_in", opt.burn_in},
                 {"thin", opt.thin},
                 {"threads", opt.threads}};
    if (!opt.data_path.empty()) {
        m["data"] = {{"path", opt.data_path}, {"checksum", file_checksum(opt.data_path)}};
    }
    if (!opt.adjacency_path.empty()) {
        m["adjacency"] = {{"path", opt.adjacency_path},
                          {"checksum", file_checksum(opt.adjacency_path)}};
    }
    return m;
}

// Write draws, summary and manifest under out_dir; print a compact report.
void persist_fit(const std::string& out_dir, const std::string& name,
                 const PosteriorDraws& draws, json manifest) {
    const auto summary = summarize(draws);
    double worst_rhat = 1.0;
    for (const auto& s : summary) worst_rhat = std::max(worst_rhat, s.rhat);
    std::cout << "kept draws: " << draws.total_kept() << " (" << draws.n_chains()
              << " chains), max R-hat " << worst_rhat << "\n";
    if (out_dir.empty()) return;
    fs::create_directories(fs::path(out_dir) / "draws");
    fs::create_directories(fs::path(out_dir) / "summary");
    const auto draws_path = (fs::path(out_dir) / "draws" / (name + ".txt")).string();
    const auto summary_path = (fs::path(out_dir) / "summary" / (name + ".txt")).string();
    save_draws(draws_path, draws);
    save_summary(summary_path, summary);
    manifest["outputs"] = {draws_path, summary_path};
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << '\n';
    std::cout << "wrote " << draws_path << "\n";
}

ContrastMatrix contrasts_by_spec(const std::string& spec, int n) {
    if (spec == "HA1" || spec == "HA2" || spec == "HAM") return make_contrasts(spec);
    if (spec == "helmert") return make_contrasts("helmert", n);
    return load_contrasts(resolve_path(spec));  // treat as a matrix file
}

Matrix read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument(path + ": empty table");
    Matrix m(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) {
            throw std::invalid_argument(path + ": ragged table");
        }
        for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

int run_fit_sanova(const CLI::App* cmd, CommonFitOptions opt, std::string contrasts,
                   bool no_interactions) {
    std::string unused;
    apply_config(cmd, opt, contrasts, unused);
    opt.data_path = resolve_path(opt.data_path);
    opt.adjacency_path = resolve_path(opt.adjacency_path);
    auto [data, graph] = load_dataset(opt.data_path, opt.adjacency_path);
    auto design =
        build_design(build_car(graph), contrasts_by_spec(contrasts, data.n_diseases()));
    const CellData cells = data.to_cell_data();
    const RunConfig cfg = make_run_config(opt);

    PosteriorDraws draws;
    SanovaSpec spec;
    if (likelihood_from_string(opt.likelihood) == Likelihood::normal) {
        spec = SanovaSpec::normal_model(std::move(design));
        spec.include_interactions = !no_interactions;
        draws = gibbs_sanova_normal(spec, cells.y, cfg);
    } else {
        spec = SanovaSpec::poisson_model(std::move(design));
        spec.include_interactions = !no_interactions;
        draws = mh_sanova_poisson(spec, cells.y, cells.expected, cfg);
    }
    const DicResult d = dic_from_fit(spec, draws, cells);
    std::cout << "Dbar " << d.dbar << "  pD " << d.pd << "  DIC " << d.dic << "\n";

    json manifest = base_manifest("fit-sanova", opt);
    manifest["contrasts"] = contrasts;
    manifest["likelihood"] = opt.likelihood;
    manifest["interactions"] = !no_interactions;
    manifest["dic"] = {{"dbar", d.dbar}, {"pd", d.pd}, {"dic", d.dic}};
    persist_fit(opt.out_dir, "sanova", draws, manifest);
    return 0;
}

int run_fit_mcar(const CLI::App* cmd, CommonFitOptions opt, std::string wishart_r,
                 double wishart_df) {
    std::string unused;
    apply_config(cmd, opt, unused, wishart_r);
    opt.data_path = resolve_path(opt.data_path);
    opt.adjacency_path = resolve_path(opt.adjacency_path);
    auto [data, graph] = load_dataset(opt.data_path, opt.adjacency_path);
    const int n = data.n_diseases();
    const Likelihood lik = likelihood_from_string(opt.likelihood);

    McarSpec spec;
    bool numeric_rate = true;
    double r_value = 0.0;
    try {
        size_t pos = 0;
        r_value = std::stod(wishart_r, &pos);
        numeric_rate = pos == wishart_r.size();
    } catch (const std::exception&) {
        numeric_rate = false;
    }
    if (numeric_rate) {
        spec = McarSpec::with_identity_rate(lik, graph, n, r_value, wishart_df);
    } else {
        spec = McarSpec::with_identity_rate(lik, graph, n, 1.0, wishart_df);
        const Matrix r = read_table(resolve_path(wishart_r));
        if (r.rows() != n || r.cols() != n) {
            throw std::invalid_argument("wishart rate matrix must be n x n");
        }
        spec.omega_prior.rate = r;
    }
    const RunConfig cfg = make_run_config(opt);
    const CellData cells = data.to_cell_data();
    PosteriorDraws draws =
        lik == Likelihood::normal
            ? gibbs_mcar_normal(spec, data.counts_matrix(), cfg)
            : mh_mcar_poisson(spec, data.counts_matrix(), data.expected_matrix(), cfg);
    const DicResult d = dic_from_fit(spec, draws, cells);
    std::cout << "Dbar " << d.dbar << "  pD " << d.pd << "  DIC " << d.dic << "\n";

    json manifest = base_manifest("fit-mcar", opt);
    manifest["wishart_r"] = wishart_r;
    manifest["wishart_df"] = spec.omega_prior.df;
    manifest["likelihood"] = opt.likelihood;
    manifest["dic"] = {{"dbar", d.dbar}, {"pd", d.pd}, {"dic", d.dic}};
    persist_fit(opt.out_dir, "mcar", draws, manifest);
    return 0;
}

int run_fit_car(const CLI::App* cmd, CommonFitOptions opt, std::string disease, double a) {
    std::string u1, u2;
    apply_config(cmd, opt, u1, u2);
    opt.data_path = resolve_path(opt.data_path);
    opt.adjacency_path = resolve_path(opt.adjacency_path);
    auto [data, graph] = load_dataset(opt.data_path, opt.adjacency_path);
    int j = -1;
    for (int k = 0; k < data.n_diseases(); ++k) {
        if (data.disease_names[k] == disease) j = k;
    }
    if (j < 0) {
        try {
            j = std::stoi(disease);
        } catch (const std::exception&) {
            throw std::invalid_argument("unknown disease: " + disease);
        }
    }
    if (j < 0 || j >= data.n_diseases()) throw std::invalid_argument("disease out of range");

    const Matrix e = data.expected_matrix();
    const RunConfig cfg = make_run_config(opt);
    auto draws =
        fit_univariate_car(graph, data.counts.col(j), e.col(j), GammaPrior{a, a}, cfg);
    const DicResult d = dic_univariate_car(draws, data.counts.col(j), e.col(j));
    std::cout << "disease " << data.disease_names[j] << ": Dbar " << d.dbar << "  pD "
              << d.pd << "  DIC " << d.dic << "\n";

    json manifest = base_manifest("fit-car", opt);
    manifest["disease"] = data.disease_names[j];
    manifest["tau_prior_a"] = a;
    manifest["dic"] = {{"dbar", d.dbar}, {"pd", d.pd}, {"dic", d.dic}};
    persist_fit(opt.out_dir, "car_" + data.disease_names[j], draws, manifest);
    return 0;
}

int run_simulate(CommonFitOptions opt, const std::string& cells_arg,
                 const std::string& methods_arg, int subjects, const std::string& preset) {
    opt.data_path = resolve_path(opt.data_path);
    opt.adjacency_path = resolve_path(opt.adjacency_path);
    auto [data, graph] = load_dataset(opt.data_path, opt.adjacency_path);
    auto design = build_design(build_car(graph), make_contrasts("HA1"));

    TournamentConfig cfg;
    if (cells_arg == "all") {
        cfg.cells = DesignCell::all();
    } else {
        std::istringstream ls(cells_arg);
        std::string tok;
        while (std::getline(ls, tok, ',')) cfg.cells.push_back(DesignCell::by_name(tok));
    }
    if (methods_arg == "all") {
        cfg.methods = all_methods();
    } else {
        std::istringstream ls(methods_arg);
        std::string tok;
        while (std::getline(ls, tok, ',')) cfg.methods.push_back(method_from_string(tok));
    }
    cfg.n_subjects = subjects;
    cfg.seed = opt.seed;
    cfg.n_workers = opt.threads;
    cfg.mcmc = preset == "paper" ? RunConfig::paper_preset(opt.seed)
                                 : RunConfig::reduced_preset(opt.seed);

    const auto t0 = std::chrono::steady_clock::now();
    auto result = run_tournament(cfg, design, data.to_cell_data().expected);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_metric_table(std::cout, result);
    std::cout << "tournament wall time: " << secs << " s\n";

    if (!opt.out_dir.empty()) {
        fs::create_directories(fs::path(opt.out_dir) / "metrics");
        {
            std::ofstream t(fs::path(opt.out_dir) / "metrics" / "tournament.txt");
            write_metric_table(t, result);
            std::ofstream d(fs::path(opt.out_dir) / "metrics" / "tournament.tsv");
            write_metric_table_delimited(d, result);
        }
        json manifest = base_manifest("simulate", opt);
        manifest["cells"] = cells_arg;
        manifest["methods"] = methods_arg;
        manifest["subjects"] = subjects;
        manifest["preset"] = preset;
        std::ofstream mf(fs::path(opt.out_dir) / "manifest.json");
        mf << manifest.dump(2) << '\n';
    }
    return 0;
}

int run_metrics(const std::string& estimates_path, const std::string& truths_path,
                const std::string& lower_path, const std::string& upper_path) {
    const Matrix est = read_table(estimates_path);
    const Matrix tru = read_table(truths_path);
    const auto a = amse(est, tru);
    const auto b = mbias(est, tru);
    std::cout << "amse " << format_double(a.amse) << "\n";
    std::cout << "amse_mcse " << format_double(a.mcse) << "\n";
    std::cout << "mbias2.5 " << format_double(b.p025) << "\n";
    std::cout << "mbias50 " << format_double(b.p50) << "\n";
    std::cout << "mbias97.5 " << format_double(b.p975) << "\n";
    if (!lower_path.empty() && !upper_path.empty()) {
        const double rate = pi_rate(read_table(lower_path), read_table(upper_path), tru);
        std::cout << "pi_rate " << format_double(rate) << "\n";
    }
    return 0;
}

int run_dic(const std::string& draws_path, CommonFitOptions opt,
            const std::string& contrasts, bool no_interactions) {
    opt.data_path = resolve_path(opt.data_path);
    opt.adjacency_path = resolve_path(opt.adjacency_path);
    auto [data, graph] = load_dataset(opt.data_path, opt.adjacency_path);
    const PosteriorDraws draws = load_draws(resolve_path(draws_path));
    const CellData cells = data.to_cell_data();
    const Likelihood lik = likelihood_from_string(opt.likelihood);

    DicResult d;
    const auto& names = draws.names;
    auto has = [&](const std::string& n) {
        return std::find(names.begin(), names.end(), n) != names.end();
    };
    if (has("theta[0]")) {
        auto design = build_design(build_car(graph),
                                   contrasts_by_spec(contrasts, data.n_diseases()));
        SanovaSpec spec = lik == Likelihood::normal ? SanovaSpec::normal_model(design)
                                                    : SanovaSpec::poisson_model(design);
        spec.include_interactions = !no_interactions;
        d = dic_from_fit(spec, draws, cells);
    } else if (has("omega[0,0]")) {
        McarSpec spec = McarSpec::with_identity_rate(lik, graph, data.n_diseases(), 1.0);
        d = dic_from_fit(spec, draws, cells);
    } else {
        throw std::invalid_argument("draws file does not look like a sanova or mcar fit");
    }
    std::cout << "Dbar " << format_double(d.dbar) << "\npD " << format_double(d.pd)
              << "\nDIC " << format_double(d.dic) << "\n";
    return 0;
}

int run_check_design(const std::string& adjacency_path, const std::string& contrasts) {
    auto graph = load_adjacency(resolve_path(adjacency_path));
    auto car = build_car(graph);
    auto h = contrasts_by_spec(contrasts, 3);
    auto design = build_design(car, h);
    const int cells = design.n_cells();
    const double residual =
        (design.X.transpose() * design.X - Matrix::Identity(cells, cells))
            .cwiseAbs()
            .maxCoeff();
    std::cout << "regions " << design.n_regions() << ", diseases " << design.n_diseases()
              << ", islands " << car.islands << "\n";
    std::cout << "block widths: 1/" << design.n_diseases() - 1 << "/"
              << design.n_regions() - 1 << "/"
              << (design.n_regions() - 1) * (design.n_diseases() - 1) << "\n";
    std::cout << "orthonormality residual " << format_double(residual) << "\n";
    if (h.max_adjustment > 0) {
        std::cout << "contrast orthogonalization adjustment "
                  << format_double(h.max_adjustment) << "\n";
    }
    return residual < 1e-10 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smoothed-ANOVA spatial disease mapping toolkit"};
    app.require_subcommand(1);

    CommonFitOptions sanova_opt;
    std::string sanova_contrasts = "HA1";
    bool sanova_no_interactions = false;
    auto* fit_sanova = app.add_subcommand("fit-sanova", "fit the smoothed-ANOVA model");
    add_mcmc_options(fit_sanova, sanova_opt);
    fit_sanova->add_option("--contrasts", sanova_contrasts,
                           "HA1, HA2, HAM, helmert, or a matrix file");
    fit_sanova->add_flag("--no-interactions", sanova_no_interactions,
                         "drop the region-by-disease interaction block");

    CommonFitOptions mcar_opt;
    std::string wishart_r = "1";
    double wishart_df = -1.0;
    auto* fit_mcar =
        app.add_subcommand("fit-mcar", "fit the separable multivariate CAR model");
    add_mcmc_options(fit_mcar, mcar_opt);
    fit_mcar->add_option("--wishart-r", wishart_r,
                         "rate multiplier (0.002, 1, 200) or a matrix file");
    fit_mcar->add_option("--wishart-df", wishart_df, "degrees of freedom (default n)");

    CommonFitOptions car_opt;
    std::string car_disease = "0";
    double car_a = 1.0;
    auto* fit_car = app.add_subcommand("fit-car", "fit a univariate CAR baseline");
    add_mcmc_options(fit_car, car_opt);
    fit_car->add_option("--disease", car_disease, "disease name or column index");
    fit_car->add_option("--a", car_a, "tau ~ Gamma(a, a) hyperparameter");

    CommonFitOptions sim_opt;
    std::string sim_cells = "all", sim_methods = "all", sim_preset = "reduced";
    int sim_subjects = 100;
    auto* simulate = app.add_subcommand("simulate", "run the method-comparison tournament");
    add_mcmc_options(simulate, sim_opt);
    simulate->add_option("--cells", sim_cells, "comma-separated Data1..Data6, or all");
    simulate->add_option("--methods", sim_methods, "comma-separated method names, or all");
    simulate->add_option("--subjects", sim_subjects, "replicates per cell");
    simulate->add_option("--preset", sim_preset, "reduced (3x4000) or paper (3x10000)");

    std::string m_est, m_tru, m_lo, m_hi;
    auto* metrics_cmd =
        app.add_subcommand("metrics", "compute comparison metrics from tables");
    metrics_cmd->add_option("--estimates", m_est, "replicates x cells table")->required();
    metrics_cmd->add_option("--truths", m_tru, "replicates x cells table")->required();
    metrics_cmd->add_option("--lower", m_lo, "interval lower bounds");
    metrics_cmd->add_option("--upper", m_hi, "interval upper bounds");

    CommonFitOptions dic_opt;
    std::string dic_draws, dic_contrasts = "HA1";
    bool dic_no_interactions = false;
    auto* dic_cmd = app.add_subcommand("dic", "recompute DIC from a stored draws file");
    dic_cmd->add_option("--draws", dic_draws, "draws file from a fit")->required();
    dic_cmd->add_option("--data", dic_opt.data_path, "counts file")->required();
    dic_cmd->add_option("--adjacency", dic_opt.adjacency_path, "adjacency file")->required();
    dic_cmd->add_option("--likelihood", dic_opt.likelihood, "normal or poisson");
    dic_cmd->add_option("--contrasts", dic_contrasts, "contrast spec for sanova draws");
    dic_cmd->add_flag("--no-interactions", dic_no_interactions,
                      "draws came from a no-interaction fit");

    std::string cd_adjacency, cd_contrasts = "HA1";
    auto* check = app.add_subcommand("check-design", "verify design orthonormality");
    check->add_option("--adjacency", cd_adjacency, "adjacency file")->required();
    check->add_option("--contrasts", cd_contrasts, "contrast spec");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_sanova->parsed()) {
            return run_fit_sanova(fit_sanova, sanova_opt, sanova_contrasts,
                                  sanova_no_interactions);
        }
        if (fit_mcar->parsed()) {
            return run_fit_mcar(fit_mcar, mcar_opt, wishart_r, wishart_df);
        }
        if (fit_car->parsed()) return run_fit_car(fit_car, car_opt, car_disease, car_a);
        if (simulate->parsed()) {
            return run_simulate(sim_opt, sim_cells, sim_methods, sim_subjects, sim_preset);
        }
        if (metrics_cmd->parsed()) return run_metrics(m_est, m_tru, m_lo, m_hi);
        if (dic_cmd->parsed()) {
            return run_dic(dic_draws, dic_opt, dic_contrasts, dic_no_interactions);
        }
        if (check->parsed()) return run_check_design(cd_adjacency, cd_contrasts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
