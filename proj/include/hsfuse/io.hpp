#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hsfuse/cube.hpp"
#include "hsfuse/metrics.hpp"

namespace hsfuse::io {

inline constexpr const char* kToolName = "hsfuse";
inline constexpr const char* kToolVersion = "0.1.0";

// HSC cube container: magic "HSC1", then bands/height/width as unsigned
// 32-bit little-endian, then bands*height*width IEEE float32 values
// (little-endian, band-major then row-major).

HyperCube read_hsc(const std::string& path);
void write_hsc(const std::string& path, const HyperCube& cube);

// KRN kernel: first line the odd size k, then k lines of k floats.

BlurKernel read_krn(const std::string& path);
void write_krn(const std::string& path, const BlurKernel& kernel);

// SRF CSV: one line per output band, comma-separated weights over the
// input bands. Rows are renormalized on load; a deviation from unit sum
// above 1e-6 warns on stderr, above 1e-3 is an error.

SrfMatrix read_srf_csv(const std::string& path);
void write_srf_csv(const std::string& path, const SrfMatrix& srf);

/// Training trace: "iteration,learning_rate,loss" rows.
void write_loss_csv(const std::string& path, const std::vector<double>& losses,
                    const std::vector<double>& rates);
/// Two-column variant: "iteration,loss".
void write_loss_csv(const std::string& path, const std::vector<double>& losses);

void write_metrics_json(const std::string& path, const metrics::MetricsReport& report);
void write_per_band_psnr_csv(const std::string& path, const std::vector<double>& per_band_db);
void write_sorted_sam_csv(const std::string& path, const std::vector<double>& sorted_deg);

/// FNV-1a 64-bit digest of a file, as 16 hex characters.
std::string hash_file(const std::string& path);

/// Record of one CLI invocation; identical manifests replay to identical
/// outputs in 64-bit single-threaded mode.
struct RunManifest {
    std::string tool = kToolName;
    std::string version = kToolVersion;
    std::string command;
    std::vector<std::string> argv;  // command + flags, as typed
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_hashes;  // path -> digest
    std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

}  // namespace hsfuse::io
