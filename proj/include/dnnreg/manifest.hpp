#pragma once

// Record of a command invocation that is sufficient to repeat it.

#include "dnnreg/experiment.hpp"
#include "dnnreg/io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dnnreg {

std::string library_version();

inline constexpr int kManifestFormatVersion = 1;

struct FitRequest {
    FitConfig config;
    std::string input;  // dataset CSV as given on the command line
    bool report_l2 = false;
};

struct RunManifest {
    std::string command;  // "experiment" or "fit"
    std::string kernel;   // instruction set of the layer kernels
    std::string version;  // library_version() of the writer
    std::vector<std::string> artifacts;  // relative to the manifest's directory
    std::optional<ExperimentSpec> experiment;
    std::optional<FitRequest> fit;
};

/// JSON document. Doubles are written with enough digits to round-trip.
void write_manifest(std::ostream& os, const RunManifest& manifest);

/// Throws DataError on malformed JSON, a missing field or an unknown
/// format version.
RunManifest read_manifest(std::istream& is);

/// Writes replications.csv, summary.csv and curves/<cell>_rep<i>.csv below
/// `dir` (created if missing) and returns their paths relative to `dir`.
std::vector<std::string> write_experiment_outputs(const std::filesystem::path& dir,
                                                  const ExperimentResult& result);

}  // namespace dnnreg
