#pragma once

// CSV and JSON artifacts. Numbers are written with 17 significant digits.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracmove/convect.hpp"
#include "fracmove/fracpde.hpp"
#include "fracmove/reconstruct.hpp"

namespace fracmove::io {

namespace fs = std::filesystem;

std::string format_double(double x);

/// Header "x,value" (1D) or "x,y,value" (2D), one row per node, x fastest.
void write_field_csv(const fs::path& path, const Field& f);
/// Reads a field written for the same grid; coordinates must match.
Field read_field_csv(const fs::path& path, const SpaceGrid& grid);

/// Writes <dir>/<name>_nNNNNN.csv for every stride-th time node (and the last)
/// plus <dir>/<name>_manifest.json. Returns the manifest.
nlohmann::json write_spacetime_dump(const fs::path& dir, const std::string& name, const SpaceTimeField& u,
                                    std::size_t stride, double alpha);

/// iter,objective,rel_change,err_l2_vs_truth
void write_history_csv(const fs::path& path, const ReconReport& report);

/// One <dir>/chord_NNNNN.csv per solved chord with columns xi1,c_hat,f_hat.
std::size_t write_chord_csvs(const fs::path& dir, const ChordSet& chords);

struct SummaryRow {
    std::string stage;
    std::string quantity;
    double value;
};
/// stage,quantity,value
void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace fracmove::io
