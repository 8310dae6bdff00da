#include "sanova/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sanova {

CellData ArealDataset::to_cell_data() const {
    CellData data;
    const int n = n_diseases();
    data.y.resize(n_regions() * n);
    for (int i = 0; i < n_regions(); ++i) {
        for (int j = 0; j < n; ++j) data.y[cell_index(i, j, n)] = counts(i, j);
    }
    const Matrix e = expected_matrix();
    data.expected.resize(n_regions() * n);
    for (int i = 0; i < n_regions(); ++i) {
        for (int j = 0; j < n; ++j) data.expected[cell_index(i, j, n)] = e(i, j);
    }
    return data;
}

Matrix ArealDataset::expected_matrix() const {
    return expected ? *expected : internal_standardization(*this);
}

Matrix internal_standardization(const ArealDataset& data) {
    if ((data.population.array() <= 0).any()) {
        throw std::invalid_argument("populations must be positive");
    }
    const double total_pop = data.population.sum();
    Matrix e(data.n_regions(), data.n_diseases());
    for (int j = 0; j < data.n_diseases(); ++j) {
        const double total = data.counts.col(j).sum();
        if (total <= 0) {
            throw std::invalid_argument("disease " + data.disease_names[j] +
                                        " has zero total count; rate undefined");
        }
        e.col(j) = data.population * (total / total_pop);
    }
    return e;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) {
        // trim
        const auto a = field.find_first_not_of(" \t\r");
        const auto b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
    }
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed " + what + ": `" + s + "`");
    }
}

}  // namespace

ArealDataset read_counts(std::istream& in) {
    std::string line;
    bool have_header = false;
    bool has_expected = false;
    struct Row {
        std::string region, disease;
        double count, population, expected;
    };
    std::vector<Row> rows;
    std::set<std::pair<std::string, std::string>> seen;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv(line);
        if (!have_header) {
            if (fields.size() < 4 || fields[0] != "region" || fields[1] != "disease" ||
                fields[2] != "count" || fields[3] != "population") {
                throw std::invalid_argument(
                    "counts file must start with header region,disease,count,population");
            }
            if (fields.size() == 5 && fields[4] == "expected") has_expected = true;
            else if (fields.size() > 4) throw std::invalid_argument("unexpected header columns");
            have_header = true;
            continue;
        }
        if (fields.size() != (has_expected ? 5u : 4u)) {
            throw std::invalid_argument("malformed row: " + line);
        }
        Row r;
        r.region = fields[0];
        r.disease = fields[1];
        r.count = parse_number(fields[2], "count");
        r.population = parse_number(fields[3], "population");
        r.expected = has_expected ? parse_number(fields[4], "expected count") : 0.0;
        if (r.count < 0 || r.count != std::floor(r.count)) {
            throw std::invalid_argument("counts must be nonnegative integers: " + line);
        }
        if (r.population <= 0) {
            throw std::invalid_argument("populations must be positive: " + line);
        }
        if (!seen.emplace(r.region, r.disease).second) {
            throw std::invalid_argument("duplicate (region, disease) pair: " + r.region +
                                        ", " + r.disease);
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::invalid_argument("counts file has no data rows");

    // Regions and diseases in first-appearance order.
    std::vector<std::string> regions, diseases;
    std::map<std::string, int> region_index, disease_index;
    for (const auto& r : rows) {
        if (region_index.emplace(r.region, static_cast<int>(regions.size())).second) {
            regions.push_back(r.region);
        }
        if (disease_index.emplace(r.disease, static_cast<int>(diseases.size())).second) {
            diseases.push_back(r.disease);
        }
    }
    const int n_regions = static_cast<int>(regions.size());
    const int n_diseases = static_cast<int>(diseases.size());
    if (static_cast<int>(rows.size()) != n_regions * n_diseases) {
        throw std::invalid_argument("incomplete region x disease grid");
    }

    ArealDataset data;
    data.region_ids = regions;
    data.disease_names = diseases;
    data.population = Vector::Zero(n_regions);
    data.counts = Matrix::Zero(n_regions, n_diseases);
    Matrix expected = Matrix::Zero(n_regions, n_diseases);
    std::vector<bool> pop_set(n_regions, false);
    for (const auto& r : rows) {
        const int i = region_index[r.region];
        const int j = disease_index[r.disease];
        data.counts(i, j) = r.count;
        expected(i, j) = r.expected;
        if (pop_set[i] && data.population[i] != r.population) {
            throw std::invalid_argument("inconsistent population for region " + r.region);
        }
        data.population[i] = r.population;
        pop_set[i] = true;
    }
    if (has_expected) {
        if ((expected.array() <= 0).any()) {
            throw std::invalid_argument("supplied expected counts must be positive");
        }
        data.expected = expected;
    }
    return data;
}

ArealDataset load_counts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open counts file: " + path);
    try {
        return read_counts(in);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void write_counts(std::ostream& out, const ArealDataset& data) {
    out << "region,disease,count,population";
    if (data.expected) out << ",expected";
    out << '\n';
    char buf[64];
    for (int i = 0; i < data.n_regions(); ++i) {
        for (int j = 0; j < data.n_diseases(); ++j) {
            out << data.region_ids[i] << ',' << data.disease_names[j] << ','
                << static_cast<long long>(data.counts(i, j)) << ',';
            std::snprintf(buf, sizeof buf, "%.17g", data.population[i]);
            out << buf;
            if (data.expected) {
                std::snprintf(buf, sizeof buf, "%.17g", (*data.expected)(i, j));
                out << ',' << buf;
            }
            out << '\n';
        }
    }
}

std::pair<ArealDataset, RegionGraph> load_dataset(const std::string& counts_path,
                                                  const std::string& adjacency_path) {
    ArealDataset data = load_counts(counts_path);
    RegionGraph graph = load_adjacency(adjacency_path);
    if (data.n_regions() != graph.n_regions) {
        throw std::invalid_argument("region count mismatch: counts file has " +
                                    std::to_string(data.n_regions()) + ", adjacency has " +
                                    std::to_string(graph.n_regions));
    }
    // Adjacency ids are the indices 0..N-1; the counts file must use the same
    // ids, in any order.  Rows are then sorted into adjacency order.
    std::vector<int> order(data.n_regions());
    std::vector<bool> used(data.n_regions(), false);
    for (int i = 0; i < data.n_regions(); ++i) {
        int idx = -1;
        try {
            size_t pos = 0;
            idx = std::stoi(data.region_ids[i], &pos);
            if (pos != data.region_ids[i].size()) idx = -1;
        } catch (const std::exception&) {
            idx = -1;
        }
        if (idx < 0 || idx >= data.n_regions() || used[idx]) {
            throw std::invalid_argument("region id `" + data.region_ids[i] +
                                        "` in counts file does not match the adjacency file");
        }
        used[idx] = true;
        order[i] = idx;
    }
    ArealDataset sorted = data;
    for (int i = 0; i < data.n_regions(); ++i) {
        sorted.region_ids[order[i]] = data.region_ids[i];
        sorted.population[order[i]] = data.population[i];
        sorted.counts.row(order[i]) = data.counts.row(i);
        if (data.expected) (*sorted.expected).row(order[i]) = (*data.expected).row(i);
    }
    return {std::move(sorted), std::move(graph)};
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::invalid_argument(path + ": malformed config line: " + line);
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

}  // namespace sanova
