#pragma once

#include "sanova/draws.hpp"
#include "sanova/simulation.hpp"

#include <iosfwd>

namespace sanova {

// Columnar plain-text draws table: header `chain <param names...> loglik`,
// one row per kept draw.  Doubles are written with %.17g so identical runs
// produce byte-identical files.
void write_draws(std::ostream& out, const PosteriorDraws& draws);
void save_draws(const std::string& path, const PosteriorDraws& draws);
PosteriorDraws read_draws(std::istream& in);
PosteriorDraws load_draws(const std::string& path);

// Summary table: parameter, median, 2.5%, 97.5%, R-hat.
void write_summary(std::ostream& out, const std::vector<ParamSummary>& summary);
void save_summary(const std::string& path, const std::vector<ParamSummary>& summary);

// Aligned tournament metric tables (one human-readable, one tab-delimited).
void write_metric_table(std::ostream& out, const TournamentResult& result);
void write_metric_table_delimited(std::ostream& out, const TournamentResult& result);

// FNV-1a content hash, used in run manifests to pin input files.
std::string file_checksum(const std::string& path);

std::string format_double(double v);

}  // namespace sanova
