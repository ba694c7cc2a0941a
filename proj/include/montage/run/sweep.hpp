#pragma once

#include <string>
#include <vector>

#include "montage/run/runner.hpp"

namespace montage {

struct SweepPoint {
    std::size_t length = 0;
    MetricsReport overall;
    std::string run_dir;
    bool defined = false; // false when every trial at this length failed
};

// Reruns the experiment once per sequence length (production.target_length
// overridden) into out_root/len-<NNN>, and writes sweep.json plus a
// length→ASR sweep.txt table at out_root.
std::vector<SweepPoint> sweep_sequence_length(ExperimentConfig config,
                                              const std::vector<std::size_t>& lengths,
                                              const std::string& out_root);

} // namespace montage
