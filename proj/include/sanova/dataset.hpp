#pragma once

#include "sanova/common.hpp"
#include "sanova/graph.hpp"
#include "sanova/models.hpp"

#include <iosfwd>
#include <optional>

namespace sanova {

// Region-by-disease count table with populations.  Region ids are opaque
// strings that must match the adjacency file's 0-based indices when the two
// are loaded together.
struct ArealDataset {
    std::vector<std::string> region_ids;
    std::vector<std::string> disease_names;
    Vector population;                // per region
    Matrix counts;                    // N x n
    std::optional<Matrix> expected;   // N x n, user-supplied E if present

    int n_regions() const { return static_cast<int>(region_ids.size()); }
    int n_diseases() const { return static_cast<int>(disease_names.size()); }

    // Flattened county-major CellData for the samplers; expected defaults to
    // internal standardization when absent.
    CellData to_cell_data() const;
    Matrix counts_matrix() const { return counts; }
    Matrix expected_matrix() const;
};

// E_ij = P_i * (sum_i O_ij) / (sum_i P_i).  Column sums of E equal the
// observed totals to machine precision.  A disease with zero total count has
// no defined rate and raises an error.
Matrix internal_standardization(const ArealDataset& data);

// Delimited text with header `region,disease,count,population` (an optional
// fifth `expected` column is accepted); `#` comment lines allowed.  Rejects
// duplicate (region, disease) pairs, negative counts, nonpositive
// populations, inconsistent per-region populations and incomplete grids.
ArealDataset read_counts(std::istream& in);
ArealDataset load_counts(const std::string& path);
void write_counts(std::ostream& out, const ArealDataset& data);

// Load counts and adjacency together, checking that the region id sets
// match.
std::pair<ArealDataset, RegionGraph> load_dataset(const std::string& counts_path,
                                                  const std::string& adjacency_path);

// Plain `key = value` configuration file, `#` comments.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path);

}  // namespace sanova
