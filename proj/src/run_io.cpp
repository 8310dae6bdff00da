#include "sanova/run_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sanova {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_draws(std::ostream& out, const PosteriorDraws& draws) {
    out << "chain";
    for (const auto& n : draws.names) out << ' ' << n;
    out << " loglik\n";
    for (int c = 0; c < draws.n_chains(); ++c) {
        const auto& m = draws.chains[c];
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            out << c;
            for (Eigen::Index p = 0; p < m.cols(); ++p) out << ' ' << format_double(m(r, p));
            out << ' ' << format_double(draws.loglik[c][r]) << '\n';
        }
    }
}

void save_draws(const std::string& path, const PosteriorDraws& draws) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write draws file: " + path);
    write_draws(out, draws);
}

PosteriorDraws read_draws(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty draws file");
    std::istringstream header(line);
    std::string tok;
    header >> tok;
    if (tok != "chain") throw std::invalid_argument("draws file must start with `chain`");
    std::vector<std::string> cols;
    while (header >> tok) cols.push_back(tok);
    if (cols.empty() || cols.back() != "loglik") {
        throw std::invalid_argument("draws file must end with a loglik column");
    }
    cols.pop_back();

    std::vector<std::vector<Eigen::RowVectorXd>> per_chain;
    std::vector<std::vector<double>> ll_per_chain;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int chain;
        if (!(ls >> chain) || chain < 0) throw std::invalid_argument("bad chain id: " + line);
        Eigen::RowVectorXd row(cols.size());
        for (size_t p = 0; p < cols.size(); ++p) {
            if (!(ls >> row[static_cast<Eigen::Index>(p)])) {
                throw std::invalid_argument("short draws row: " + line);
            }
        }
        double ll;
        if (!(ls >> ll)) throw std::invalid_argument("missing loglik: " + line);
        if (static_cast<size_t>(chain) >= per_chain.size()) {
            per_chain.resize(chain + 1);
            ll_per_chain.resize(chain + 1);
        }
        per_chain[chain].push_back(std::move(row));
        ll_per_chain[chain].push_back(ll);
    }
    PosteriorDraws draws;
    draws.names = cols;
    for (size_t c = 0; c < per_chain.size(); ++c) {
        Matrix m(per_chain[c].size(), cols.size());
        Vector l(per_chain[c].size());
        for (size_t r = 0; r < per_chain[c].size(); ++r) {
            m.row(static_cast<Eigen::Index>(r)) = per_chain[c][r];
            l[static_cast<Eigen::Index>(r)] = ll_per_chain[c][r];
        }
        draws.chains.push_back(std::move(m));
        draws.loglik.push_back(std::move(l));
    }
    return draws;
}

PosteriorDraws load_draws(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open draws file: " + path);
    return read_draws(in);
}

void write_summary(std::ostream& out, const std::vector<ParamSummary>& summary) {
    out << "parameter median q2.5 q97.5 rhat\n";
    for (const auto& s : summary) {
        out << s.name << ' ' << format_double(s.median) << ' ' << format_double(s.q025)
            << ' ' << format_double(s.q975) << ' ' << format_double(s.rhat) << '\n';
    }
}

void save_summary(const std::string& path, const std::vector<ParamSummary>& summary) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write summary file: " + path);
    write_summary(out, summary);
}

namespace {

void print_row(std::ostream& out, const CellMethodResult& r, const char* sep) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s%s%s%s%.4f%s%.4f%s%.3f%s%.3f%s%.3f%s%.3f%s%d",
                  r.cell.c_str(), sep, to_string(r.method).c_str(), sep, r.amse.amse, sep,
                  r.amse.mcse, sep, r.mbias.p025, sep, r.mbias.p50, sep, r.mbias.p975, sep,
                  r.pi_rate, sep, r.n_subjects);
    out << buf << '\n';
}

}  // namespace

void write_metric_table(std::ostream& out, const TournamentResult& result) {
    out << "cell method amse amse_mcse mbias2.5 mbias50 mbias97.5 pi_rate subjects\n";
    for (const auto& r : result.table) print_row(out, r, " ");
    for (const auto& r : result.table) {
        for (const auto& f : r.failures) out << "# failure: " << f << '\n';
    }
}

void write_metric_table_delimited(std::ostream& out, const TournamentResult& result) {
    out << "cell\tmethod\tamse\tamse_mcse\tmbias2.5\tmbias50\tmbias97.5\tpi_rate\tsubjects\n";
    for (const auto& r : result.table) print_row(out, r, "\t");
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for checksum: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
    return buf;
}

}  // namespace sanova
