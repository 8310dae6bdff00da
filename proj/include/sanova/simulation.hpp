#pragma once

#include "sanova/metrics.hpp"
#include "sanova/samplers.hpp"

#include <cstdint>

namespace sanova {

// One experimental condition: normal cells fix the noise precision eta0 and
// the smoothing ratios tau/eta0; Poisson cells fix tau directly.
struct DesignCell {
    std::string name;
    Likelihood likelihood = Likelihood::normal;
    double eta0 = 1.0;     // unused for poisson
    Vector ratios;         // (tau0, tau1, tau2) for poisson; tau/eta0 for normal

    // Actual smoothing precisions used to scale the generated effects.
    Vector true_tau() const {
        return likelihood == Likelihood::normal ? Vector(ratios * eta0) : ratios;
    }

    static DesignCell by_name(const std::string& name);  // Data1..Data6
    static std::vector<DesignCell> all();
};

// A simulation "subject": one draw of the constraint-case and data-case
// errors, shared across every cell and method (repeated-measures design).
// delta has the three unsmoothed entries pinned to 5 and the remaining
// 3 x (N-1) entries drawn from the spectral CAR prior with unit precision;
// gamma is standard normal noise, absent for Poisson subjects.
struct Subject {
    Vector delta;
    Vector gamma;  // size 0 for poisson subjects
};

std::vector<Subject> generate_subjects(std::uint64_t seed, int count, Likelihood lik,
                                       const CarStructure& car, int n_diseases = 3);

// y and the true cell-level values (cell means for normal; log-relative risks
// for Poisson, whose counts are drawn with the given stream seed).
struct SimulatedDataset {
    Vector y;
    Vector truth;
};

SimulatedDataset make_dataset(const Subject& subject, const DesignCell& cell,
                              const SanovaDesign& design, const Vector& expected,
                              std::uint64_t count_seed);

// The six comparison methods.
enum class Method {
    sanova_ha1,
    sanova_ha2,
    sanova_ham,
    mcar_0_002,
    mcar_1,
    mcar_200,
};
std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> all_methods();

struct TournamentConfig {
    std::vector<DesignCell> cells;
    std::vector<Method> methods;
    int n_subjects = 100;
    RunConfig mcmc = RunConfig::reduced_preset(0);
    std::uint64_t seed = 0;
    int n_workers = 0;  // 0 = hardware concurrency
};

struct CellMethodResult {
    std::string cell;
    Method method = Method::sanova_ha1;
    AmseResult amse;
    MbiasResult mbias;
    double pi_rate = 0.0;
    int n_subjects = 0;
    std::vector<std::string> failures;  // per-(subject, method) errors, run continues
};

struct TournamentResult {
    std::vector<CellMethodResult> table;

    const CellMethodResult& lookup(const std::string& cell, Method m) const;
};

// Run every method on every subject's dataset in every cell.  `design` must
// be the generating design (correct contrasts); fitting designs and MCAR
// specs are built internally on the same graph.  `expected` supplies the
// Poisson offsets, county-major.
TournamentResult run_tournament(const TournamentConfig& cfg, const SanovaDesign& design,
                                const Vector& expected);

}  // namespace sanova
