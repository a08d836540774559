#pragma once

#include <string>
#include <vector>

#include "flocksim/analysis.hpp"
#include "flocksim/ensemble.hpp"
#include "flocksim/integrator.hpp"

namespace flocksim {

// JSON image of the stats; parsing the emitted text reproduces the struct
// exactly (shortest-round-trip number formatting on both sides).
std::string stats_to_json(const EnsembleStats& stats);
EnsembleStats stats_from_json(const std::string& text);

std::string manifest_to_json(const RunManifest& man);

// Flat table: one header line, then one row per grid time.
std::string stats_to_csv(const EnsembleStats& stats);

// Self-contained static SVG: mean_vnorm on a log scale (one polyline per p,
// fitted rates overlaid as dashed paths) above mean_xnorm on a linear scale.
std::string stats_to_svg(const EnsembleStats& stats);

// Per-path trajectory table for debugging ensembles offline.
std::string paths_to_csv(const std::vector<PathResult>& results);

void write_text_file(const std::string& path, const std::string& text); // IoError

// Writes stats.<fmt> for each requested format (comma separated subset of
// csv,json,svg) plus manifest.json under out_dir, creating it if needed.
void emit_report(const EnsembleStats& stats, const RunManifest& man,
                 const std::string& out_dir, const std::string& formats);

} // namespace flocksim
