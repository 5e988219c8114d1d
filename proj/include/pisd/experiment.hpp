// CLI harness: plain-text config parsing, the six command entry points, sparse
// observation picking, metrics emission, and report/image generation. The CLI
// binary is a thin argv wrapper over these functions.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pisd/codec.hpp"
#include "pisd/datagen.hpp"
#include "pisd/sampler.hpp"
#include "pisd/training.hpp"

namespace pisd {

// key = value pairs grouped in [section] blocks; '#' starts a comment.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_str(const std::string& section, const std::string& key, const std::string& fallback) const;
    std::string require_str(const std::string& section, const std::string& key) const;
    double get_f64(const std::string& section, const std::string& key, double fallback) const;
    int64_t get_i64(const std::string& section, const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class SampleTask { Forward, Inverse, Joint, NsTemporal };
SampleTask parse_sample_task(const std::string& name);

struct MetricsRow {
    int64_t run_id = 0;
    std::string task;
    int64_t obs_count = 0;
    double rel_err_u = 0.0;
    double rel_err_a = 0.0;
    double pde_residual = 0.0;
    double obs_rel_err = 0.0;
    double wall_time_s = 0.0;  // written to the timings sidecar, not the metrics CSV
};

// Uniform grid points without replacement, deterministic per rng state.
PointObservations pick_observations(const FieldGrid& field, int channel, int time_index, int count, Rng& rng);

double relative_l2_error(std::span<const double> generated, std::span<const double> truth);

// 8-bit grayscale PGM with per-image min/max normalization.
void write_pgm(const std::string& path, std::span<const double> data, int h, int w);

// Command entry points; `out_dir` holds all artifacts under fixed names.
void cmd_generate_data(const Config& cfg, uint64_t seed, const std::string& out_dir);
void cmd_fit_codec(const Config& cfg, uint64_t seed, const std::string& out_dir);
void cmd_train(const Config& cfg, uint64_t seed, const std::string& out_dir);
void cmd_sample(const Config& cfg, uint64_t seed, const std::string& out_dir);
void cmd_evaluate(const Config& cfg, uint64_t seed, const std::string& out_dir);
void cmd_report(const Config& cfg, uint64_t seed, const std::string& out_dir);

// Shared pipeline pieces (also used by the acceptance suite).
Codec build_codec_for_task(const Config& cfg, Task task, int resolution);
ResidualSpec residual_spec_for_task(const Config& cfg, Task task, int resolution);
GuidanceSpec guidance_spec_from_config(const Config& cfg, Task task, int resolution);
std::vector<PointObservations> observations_for_run(const Config& cfg, SampleTask stask, const FieldGrid& truth,
                                                    uint64_t run_seed);

struct RunMetrics {
    MetricsRow row;
    std::vector<double> ns_rel_err_per_time;
    std::vector<double> ns_residual_per_time;
};
RunMetrics evaluate_run(const FieldGrid& generated, const FieldGrid& truth, const Codec& codec,
                        const ResidualSpec& rspec, const std::vector<PointObservations>& obs);

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);

}  // namespace pisd
