#pragma once

// Plot-ready data export. Rather than render charts in-process, the runs are
// flattened into TSV tables that any plotting tool can consume directly.

#include <string>
#include <vector>

namespace montage {

// Files written into out_dir by export_plot_data. Either may be absent when
// no input run carried the corresponding data.
struct PlotExport {
    std::vector<std::string> files; // paths actually written
};

// Reads each run directory (a simulate-run output with metrics.json, or a
// sweep root with sweep.json) and writes:
//   ddr_by_event.tsv   one row per (run, strategy), one column per event
//   asr_by_length.tsv  one row per sweep point, sorted by length
// A directory with neither file is an error; an empty run list is an error.
PlotExport export_plot_data(const std::vector<std::string>& run_dirs, const std::string& out_dir);

} // namespace montage
