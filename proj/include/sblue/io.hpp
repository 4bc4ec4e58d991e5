#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sblue/estimator.hpp"
#include "sblue/selection.hpp"
#include "sblue/sensors.hpp"

namespace sblue {

// Config loading, sensor-table ingestion and the file formats the command
// line tool emits.  Everything that leaves the process goes through here so
// outputs stay byte identical for a given config and seed.

struct SyntheticSensors {
    int n_high = 0;
    int n_low = 0;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    double noise_std_high = 0.0;
    double noise_std_low = 0.0;
    double threshold = 0.0;  // shared by all low-quality sensors
    double cost_high = 0.0;
    double cost_low = 0.0;
    std::optional<std::uint64_t> seed;  // placement stream; master seed when absent
};

struct CsvSensors {
    std::string path;
};

struct ReconstructTask {
    GridSpec grid;
};

struct SelectTask {
    Location query;
    double qos_var = 1.0;
    CemConfig cem;
};

struct ExperimentTask {
    std::string name;  // "mse-vs-counts" or "cem-vs-optimal"
};

struct RunConfig {
    MeanSpec mean;
    KernelSpec kernel;
    Quadrature quad;
    std::variant<SyntheticSensors, CsvSensors> sensors;
    std::variant<ReconstructTask, SelectTask, ExperimentTask> task;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

// Parses and fully validates; error messages name the offending field path.
RunConfig load_config(const std::string& path);

// Hash of the resolved configuration (after any command line overrides),
// embedded in every output file so artifacts are traceable to their run.
std::uint64_t config_hash(const RunConfig& cfg);

struct IngestResult {
    SensorArray arr;
    // Present when the table has a reading column; aligned with arr's order.
    std::optional<Eigen::VectorXd> readings;
    std::size_t n_rows = 0;
};

// Columns: id,x,y,network,noise_std,threshold,cost[,reading]; network is H
// or L, threshold must be empty exactly for H rows, '#' lines are comments.
IngestResult ingest_sensors(const std::string& path);

// Uniform placement over the region; ids H0001.., L0001.. in draw order.
SensorArray deploy_synthetic(const SyntheticSensors& syn, std::uint64_t seed);

// First line of every output file: "# config_hash=<hex> seed=<dec>".
struct FileHeader {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string comment_line() const;
};

// Shortest exact decimal form of v ("%.17g"); "inf"/"-inf"/"nan" spelled out.
std::string format_double(double v);

// Raster values are row major with y as the outer loop, matching FieldRaster.
void write_grid_csv(const std::string& path, const GridSpec& grid,
                    const std::vector<double>& values, const FileHeader& hdr);

// 16-bit P5, values affinely mapped onto 0..65535 with the min and max
// recorded in header comments; a constant raster maps to all zeros.
void write_grid_pgm(const std::string& path, const GridSpec& grid,
                    const std::vector<double>& values, const FileHeader& hdr);

void write_mask_csv(const std::string& path, const SensorArray& arr, const ActivationMask& mask,
                    const FileHeader& hdr);

void write_trace_csv(const std::string& path, const std::vector<CemIterRecord>& trace,
                     const FileHeader& hdr);

// key=value lines in the given order.
void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries,
                   const FileHeader& hdr);

// Generic table writer: comment header, column names, then rows.
void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<std::string>>& rows, const FileHeader& hdr);

}  // namespace sblue
