#include "pisd/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pisd/io_util.hpp"

namespace pisd {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Task parse_task(const std::string& name) {
    if (name == "poisson") return Task::Poisson;
    if (name == "helmholtz") return Task::Helmholtz;
    if (name == "ns" || name == "navier-stokes") return Task::NavierStokes;
    throw ConfigError("unknown task: " + name);
}

std::string task_name(Task t) {
    switch (t) {
        case Task::Poisson: return "poisson";
        case Task::Helmholtz: return "helmholtz";
        default: return "ns";
    }
}

struct PipelinePaths {
    std::string dataset, codec, latents, checkpoint, loss_csv, samples, metrics, timings, manifest,
        eval_metrics, ns_profile, report;
    explicit PipelinePaths(const std::string& out) {
        dataset = out + "/dataset.pisd";
        codec = out + "/codec.pisd";
        latents = out + "/latents.pisd";
        checkpoint = out + "/checkpoint.pisd";
        loss_csv = out + "/loss.csv";
        samples = out + "/samples.pisd";
        metrics = out + "/metrics.csv";
        timings = out + "/timings.csv";
        manifest = out + "/run_manifest.txt";
        eval_metrics = out + "/eval_metrics.csv";
        ns_profile = out + "/ns_time_profile.csv";
        report = out + "/report.txt";
    }
};

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory: " + out);
}

DatasetSpec dataset_spec_from_config(const Config& cfg, uint64_t seed) {
    DatasetSpec spec;
    spec.task = parse_task(cfg.get_str("data", "task", "poisson"));
    spec.count = static_cast<int>(cfg.get_i64("data", "count", 64));
    spec.seed = seed;
    spec.resolution = static_cast<int>(cfg.get_i64("data", "resolution", 32));
    spec.grf = default_grf(spec.task, spec.resolution);
    spec.grf.tau = cfg.get_f64("data", "grf_tau", spec.grf.tau);
    spec.grf.alpha = cfg.get_f64("data", "grf_alpha", spec.grf.alpha);
    spec.grf.amplitude = cfg.get_f64("data", "grf_amplitude", spec.grf.amplitude);
    spec.ns.viscosity = cfg.get_f64("data", "ns_viscosity", 1e-3);
    spec.ns.dt_internal = cfg.get_f64("data", "ns_dt_internal", 2e-3);
    spec.ns_time_steps = static_cast<int>(cfg.get_i64("data", "ns_time_steps", 10));
    return spec;
}

int train_count_of(const Config& cfg, const Dataset& ds) {
    const int train_count =
        static_cast<int>(cfg.get_i64("codec", "train_count", static_cast<int64_t>(ds.samples.size())));
    if (train_count < 2 || train_count > static_cast<int>(ds.samples.size()))
        throw ConfigError("codec.train_count out of range");
    return train_count;
}

uint64_t run_seed_of(uint64_t seed, int64_t run) { return split_seed(seed, 1000 + static_cast<uint64_t>(run)); }

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("bad section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value at line " + std::to_string(lineno));
        cfg.sections_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

std::string Config::require_str(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing config key [" + section + "] " + key);
    return sections_.at(section).at(key);
}

double Config::get_f64(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = sections_.at(section).at(key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad number for [" + section + "] " + key + ": " + v);
    }
}

int64_t Config::get_i64(const std::string& section, const std::string& key, int64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = sections_.at(section).at(key);
    try {
        std::size_t pos = 0;
        const int64_t x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for [" + section + "] " + key + ": " + v);
    }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = sections_.at(section).at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for [" + section + "] " + key + ": " + v);
}

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key,
                                      const std::vector<int>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<int> out;
    std::istringstream in(sections_.at(section).at(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<int>(std::stoll(item)));
    }
    return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

SampleTask parse_sample_task(const std::string& name) {
    if (name == "forward") return SampleTask::Forward;
    if (name == "inverse") return SampleTask::Inverse;
    if (name == "joint") return SampleTask::Joint;
    if (name == "ns_temporal") return SampleTask::NsTemporal;
    throw ConfigError("unknown sample task: " + name);
}

PointObservations pick_observations(const FieldGrid& field, int channel, int time_index, int count, Rng& rng) {
    const int total = field.height * field.width;
    if (count > total) throw ConfigError("pick_observations: count exceeds grid size");
    std::vector<int> idx(total);
    for (int i = 0; i < total; ++i) idx[i] = i;
    PointObservations obs;
    obs.channel = channel;
    obs.time_index = time_index;
    obs.points.reserve(count);
    obs.values.reserve(count);
    for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(total - i)));
        std::swap(idx[i], idx[j]);
        const int p = idx[i];
        obs.points.emplace_back(p / field.width, p % field.width);
        obs.values.push_back(field.at(time_index, channel, p / field.width, p % field.width));
    }
    return obs;
}

double relative_l2_error(std::span<const double> generated, std::span<const double> truth) {
    if (generated.size() != truth.size()) throw ConfigError("relative_l2_error: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        num += (generated[i] - truth[i]) * (generated[i] - truth[i]);
        den += truth[i] * truth[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

void write_pgm(const std::string& path, std::span<const double> data, int h, int w) {
    double lo = data[0], hi = data[0];
    for (double v : data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    std::vector<uint8_t> bytes(header.begin(), header.end());
    for (double v : data) bytes.push_back(static_cast<uint8_t>(std::lround((v - lo) * scale)));
    write_file(path, bytes);
}

Codec build_codec_for_task(const Config& cfg, Task task, int resolution) {
    const TruncationKind kind =
        cfg.get_str("codec", "truncation", task == Task::NavierStokes ? "cube" : "hyperbolic") == "cube"
            ? TruncationKind::Cube
            : TruncationKind::Hyperbolic;
    const int trunc_c = static_cast<int>(cfg.get_i64("codec", "trunc_c", task == Task::NavierStokes ? 7 : 12));
    const double eps_floor = cfg.get_f64("codec", "eps_floor", 1e-8);

    Codec codec;
    if (task == Task::NavierStokes) {
        codec.time_steps = static_cast<int>(cfg.get_i64("data", "ns_time_steps", 10));
        ChannelCodec w;
        w.basis = {BasisKind::FourierPeriodic, 2, resolution};
        w.padding_layers = 0;
        w.trunc = TruncationSet::make(kind, trunc_c, w.basis);
        w.scales.eps_floor = eps_floor;
        codec.channels = {w};
        return codec;
    }
    codec.time_steps = 1;
    ChannelCodec u;
    u.basis = {BasisKind::SineDirichlet, 2, resolution};
    u.padding_layers = 0;
    u.trunc = TruncationSet::make(kind, trunc_c, u.basis);
    u.scales.eps_floor = eps_floor;
    ChannelCodec a;
    const int padding = static_cast<int>(cfg.get_i64("codec", "padding", 4));
    a.basis = {BasisKind::SineDirichlet, 2, resolution + 2 * padding};
    a.padding_layers = padding;
    a.trunc = TruncationSet::make(kind, trunc_c, a.basis);
    a.scales.eps_floor = eps_floor;
    codec.channels = {u, a};
    return codec;
}

ResidualSpec residual_spec_for_task(const Config& cfg, Task task, int resolution) {
    ResidualSpec spec;
    if (task == Task::Poisson) {
        spec.kind = PdeKind::Poisson;
        spec.dealias = Dealias::None;
        return spec;
    }
    if (task == Task::Helmholtz) {
        spec.kind = PdeKind::Helmholtz;
        spec.dealias = Dealias::None;
        return spec;
    }
    spec.kind = PdeKind::NavierStokes;
    spec.dealias = Dealias::TwoThirds;
    spec.viscosity = cfg.get_f64("data", "ns_viscosity", 1e-3);
    const int steps = static_cast<int>(cfg.get_i64("data", "ns_time_steps", 10));
    spec.t_grid.resize(steps);
    for (int i = 0; i < steps; ++i) spec.t_grid[i] = static_cast<double>(i) / (steps - 1);
    spec.forcing = ns_forcing_field(resolution);
    return spec;
}

GuidanceSpec guidance_spec_from_config(const Config& cfg, Task task, int resolution) {
    GuidanceSpec g;
    g.residual = residual_spec_for_task(cfg, task, resolution);
    g.lambda_pde = cfg.get_f64("sample", "zeta_pde", 0.0);
    if (task == Task::NavierStokes) {
        g.lambda_obs = {cfg.get_f64("sample", "zeta_obs", 0.0)};
    } else {
        g.lambda_obs = {cfg.get_f64("sample", "zeta_u", 0.0), cfg.get_f64("sample", "zeta_a", 0.0)};
    }
    g.adam.beta1 = cfg.get_f64("sample", "adam_beta1", 0.985);
    g.adam.beta2 = cfg.get_f64("sample", "adam_beta2", 0.98);
    g.adam.eps = cfg.get_f64("sample", "adam_eps", 1e-8);
    g.adam.lr_low = cfg.get_f64("sample", "lr_low", 0.2);
    g.adam.lr_high = cfg.get_f64("sample", "lr_high", 0.01);
    g.adam.low_band_cutoff = static_cast<int>(cfg.get_i64("sample", "low_band_cutoff", -1));
    return g;
}

std::vector<PointObservations> observations_for_run(const Config& cfg, SampleTask stask, const FieldGrid& truth,
                                                    uint64_t run_seed) {
    const int count = static_cast<int>(cfg.get_i64("sample", "observation_count", 500));
    Rng rng(split_seed(run_seed, 0x6f627365ULL));
    std::vector<PointObservations> obs;
    switch (stask) {
        case SampleTask::Forward:
            obs.push_back(pick_observations(truth, 1, 0, count, rng));
            break;
        case SampleTask::Inverse:
            obs.push_back(pick_observations(truth, 0, 0, count, rng));
            break;
        case SampleTask::Joint:
            obs.push_back(pick_observations(truth, 0, 0, count, rng));
            obs.push_back(pick_observations(truth, 1, 0, count, rng));
            break;
        case SampleTask::NsTemporal: {
            std::vector<int> times = cfg.get_int_list("sample", "ns_obs_times", {0, truth.time_steps - 1});
            for (int t : times) obs.push_back(pick_observations(truth, 0, t, count, rng));
            break;
        }
    }
    return obs;
}

RunMetrics evaluate_run(const FieldGrid& generated, const FieldGrid& truth, const Codec& codec,
                        const ResidualSpec& rspec, const std::vector<PointObservations>& obs) {
    require_same_geometry(generated, truth, "evaluate_run");
    RunMetrics rm;
    if (truth.channels >= 2) {
        rm.row.rel_err_u = relative_l2_error(generated.slice(0, 0), truth.slice(0, 0));
        rm.row.rel_err_a = relative_l2_error(generated.slice(0, 1), truth.slice(0, 1));
    } else {
        // single-channel stack: pooled error over all time slices in rel_err_u
        rm.row.rel_err_u = relative_l2_error(generated.data, truth.data);
        rm.row.rel_err_a = 0.0;
        rm.ns_rel_err_per_time.resize(truth.time_steps);
        for (int t = 0; t < truth.time_steps; ++t)
            rm.ns_rel_err_per_time[t] = relative_l2_error(generated.slice(t, 0), truth.slice(t, 0));
    }
    SpectralLatent lat = encode(generated, codec);
    ResidualValue rv = residual_value(lat, codec, rspec);
    rm.row.pde_residual = rv.value;
    rm.ns_residual_per_time = rv.per_time;
    rm.row.obs_rel_err = observation_rel_error(generated, obs);
    return rm;
}

std::string metrics_csv_header() {
    return "run_id,task,obs_count,rel_err_u,rel_err_a,pde_residual,obs_rel_err\n";
}

std::string metrics_csv_line(const MetricsRow& row) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%lld,%s,%lld,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(row.run_id), row.task.c_str(),
                  static_cast<long long>(row.obs_count), row.rel_err_u, row.rel_err_a, row.pde_residual,
                  row.obs_rel_err);
    return buf;
}

void cmd_generate_data(const Config& cfg, uint64_t seed, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    PipelinePaths paths(out_dir);
    DatasetSpec spec = dataset_spec_from_config(cfg, seed);
    Dataset ds = build_dataset(spec);
    save_dataset(paths.dataset, ds);
}

void cmd_fit_codec(const Config& cfg, uint64_t seed, const std::string& out_dir) {
    (void)seed;  // codec fitting is a pure function of the dataset and config
    ensure_out_dir(out_dir);
    PipelinePaths paths(out_dir);
    Dataset ds = load_dataset(paths.dataset);
    const int train_count = train_count_of(cfg, ds);
    Codec codec = build_codec_for_task(cfg, ds.task, ds.resolution);
    std::vector<FieldGrid> training(ds.samples.begin(), ds.samples.begin() + train_count);
    fit_scales(codec, training);
    save_codec(paths.codec, codec);
}

void cmd_train(const Config& cfg, uint64_t seed, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    PipelinePaths paths(out_dir);
    Dataset ds = load_dataset(paths.dataset);
    Codec codec = load_codec(paths.codec);
    const int train_count = train_count_of(cfg, ds);

    Dataset training;
    training.task = ds.task;
    training.seed = ds.seed;
    training.resolution = ds.resolution;
    training.samples.assign(ds.samples.begin(), ds.samples.begin() + train_count);
    LatentMatrix latents = precompute_latents(training, codec);
    save_latents(paths.latents, latents);

    DenoiserConfig arch;
    arch.latent_dim = codec.latent_dim();
    arch.hidden_width = static_cast<int>(cfg.get_i64("denoiser", "hidden_width", 128));
    arch.depth = static_cast<int>(cfg.get_i64("denoiser", "depth", 4));
    arch.sigma_embed_dim = static_cast<int>(cfg.get_i64("denoiser", "sigma_embed_dim", 8));
    arch.sigma_data = cfg.get_f64("denoiser", "sigma_data", 1.0);

    TrainConfig tc;
    tc.batch_size = static_cast<int>(cfg.get_i64("train", "batch_size", 32));
    tc.total_steps = cfg.get_i64("train", "total_steps", 20000);
    tc.learning_rate = cfg.get_f64("train", "learning_rate", 3e-4);
    tc.adam_beta1 = cfg.get_f64("train", "adam_beta1", 0.9);
    tc.adam_beta2 = cfg.get_f64("train", "adam_beta2", 0.999);
    tc.adam_eps = cfg.get_f64("train", "adam_eps", 1e-8);
    tc.sigma_min = cfg.get_f64("train", "sigma_min", 2e-3);
    tc.sigma_max = cfg.get_f64("train", "sigma_max", 80.0);
    tc.log_uniform_sigma = cfg.get_bool("train", "log_uniform_sigma", true);
    tc.seed = seed;
    tc.checkpoint_every = cfg.get_i64("train", "checkpoint_every", 0);

    TrainResult result = train(latents, arch, tc, out_dir);
    save_checkpoint(paths.checkpoint, result.checkpoint);
    write_loss_csv(paths.loss_csv, result.loss_curve);
}

void cmd_sample(const Config& cfg, uint64_t seed, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    PipelinePaths paths(out_dir);
    Dataset ds = load_dataset(paths.dataset);
    Codec codec = load_codec(paths.codec);
    DenoiserCheckpoint ckpt = load_checkpoint(paths.checkpoint);
    const int train_count = train_count_of(cfg, ds);
    const int n_test = static_cast<int>(ds.samples.size()) - train_count;
    if (n_test < 1) throw ConfigError("cmd_sample: no held-out samples after the training split");

    const SampleTask stask = parse_sample_task(cfg.get_str("sample", "task", "forward"));
    const int64_t num_runs = cfg.get_i64("sample", "num_runs", 1);
    const int steps = static_cast<int>(cfg.get_i64("sample", "steps", 80));
    const double rho = cfg.get_f64("sample", "rho", 7.0);
    const double sigma_min = cfg.get_f64("sample", "sigma_min", 2e-3);
    const bool sgd_baseline = cfg.get_bool("sample", "sgd_baseline", false);
    const NoiseSchedule schedule = karras_schedule(steps, ckpt.sigma_max, sigma_min, rho);
    const ResidualSpec rspec = residual_spec_for_task(cfg, ds.task, ds.resolution);

    Dataset generated;
    generated.task = ds.task;
    generated.seed = seed;
    generated.resolution = ds.resolution;

    std::string metrics_text = metrics_csv_header();
    std::string timings_text = "run_id,wall_time_s\n";
    std::string manifest = "command = sample\ntask = " + cfg.get_str("sample", "task", "forward") +
                           "\npde = " + task_name(ds.task) + "\nseed = " + std::to_string(seed) +
                           "\nsteps = " + std::to_string(steps) + "\nrho = " + std::to_string(rho) +
                           "\nsigma_max = " + std::to_string(ckpt.sigma_max) +
                           "\nsgd_baseline = " + (sgd_baseline ? "true" : "false") + "\n";
    std::string ns_profile_text = "run_id,time_index,rel_err,residual_interior\n";

    for (int64_t run = 0; run < num_runs; ++run) {
        const uint64_t run_seed = run_seed_of(seed, run);
        const FieldGrid& truth = ds.samples[train_count + static_cast<int>(run % n_test)];

        GuidanceSpec guidance = guidance_spec_from_config(cfg, ds.task, ds.resolution);
        guidance.observations = observations_for_run(cfg, stask, truth, run_seed);

        SampleOptions opts;
        opts.seed = run_seed;
        opts.sgd_baseline = sgd_baseline;

        const auto t0 = std::chrono::steady_clock::now();
        SampleResult result = sample(ckpt, codec, schedule, guidance, opts);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        RunMetrics rm = evaluate_run(result.field, truth, codec, rspec, guidance.observations);
        rm.row.run_id = run;
        rm.row.task = cfg.get_str("sample", "task", "forward");
        rm.row.obs_count = cfg.get_i64("sample", "observation_count", 500);
        rm.row.wall_time_s = wall;
        metrics_text += metrics_csv_line(rm.row);
        char tbuf[64];
        std::snprintf(tbuf, sizeof(tbuf), "%lld,%.6f\n", static_cast<long long>(run), wall);
        timings_text += tbuf;

        manifest += "run " + std::to_string(run) + ": seed = " + std::to_string(run_seed) + ", obs =";
        for (const auto& o : guidance.observations) {
            manifest += " [ch" + std::to_string(o.channel) + " t" + std::to_string(o.time_index) + ":";
            for (const auto& p : o.points) manifest += " " + std::to_string(p.first * truth.width + p.second);
            manifest += "]";
        }
        manifest += "\n";

        for (std::size_t t = 0; t < rm.ns_rel_err_per_time.size(); ++t) {
            const double res_t =
                t >= 1 && t + 1 < rm.ns_rel_err_per_time.size() ? rm.ns_residual_per_time[t - 1] : 0.0;
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%lld,%zu,%.17g,%.17g\n", static_cast<long long>(run), t,
                          rm.ns_rel_err_per_time[t], res_t);
            ns_profile_text += buf;
        }

        generated.samples.push_back(std::move(result.field));
    }

    save_dataset(paths.samples, generated);
    write_text_file(paths.metrics, metrics_text);
    write_text_file(paths.timings, timings_text);
    write_text_file(paths.manifest, manifest);
    if (ds.task == Task::NavierStokes) write_text_file(paths.ns_profile, ns_profile_text);
}

void cmd_evaluate(const Config& cfg, uint64_t seed, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    PipelinePaths paths(out_dir);
    Dataset ds = load_dataset(paths.dataset);
    Dataset generated = load_dataset(paths.samples);
    Codec codec = load_codec(paths.codec);
    const int train_count = train_count_of(cfg, ds);
    const int n_test = static_cast<int>(ds.samples.size()) - train_count;
    const SampleTask stask = parse_sample_task(cfg.get_str("sample", "task", "forward"));
    const ResidualSpec rspec = residual_spec_for_task(cfg, ds.task, ds.resolution);

    std::string text = metrics_csv_header();
    for (std::size_t run = 0; run < generated.samples.size(); ++run) {
        const uint64_t run_seed = run_seed_of(seed, static_cast<int64_t>(run));
        const FieldGrid& truth = ds.samples[train_count + static_cast<int>(run % n_test)];
        const auto obs = observations_for_run(cfg, stask, truth, run_seed);
        RunMetrics rm = evaluate_run(generated.samples[run], truth, codec, rspec, obs);
        rm.row.run_id = static_cast<int64_t>(run);
        rm.row.task = cfg.get_str("sample", "task", "forward");
        rm.row.obs_count = cfg.get_i64("sample", "observation_count", 500);
        text += metrics_csv_line(rm.row);
    }
    write_text_file(paths.eval_metrics, text);
}

void cmd_report(const Config& cfg, uint64_t seed, const std::string& out_dir) {
    (void)seed;
    ensure_out_dir(out_dir);
    PipelinePaths paths(out_dir);

    std::ifstream in(paths.metrics);
    if (!in) throw IoError("cannot open metrics: " + paths.metrics);
    std::string line;
    std::getline(in, line);  // header
    struct Agg {
        std::vector<double> rel_u, rel_a, res, obs;
    };
    std::map<std::string, Agg> groups;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string run_id, task, obs_count, rel_u, rel_a, res, obs;
        std::getline(ls, run_id, ',');
        std::getline(ls, task, ',');
        std::getline(ls, obs_count, ',');
        std::getline(ls, rel_u, ',');
        std::getline(ls, rel_a, ',');
        std::getline(ls, res, ',');
        std::getline(ls, obs, ',');
        Agg& g = groups[task + "/" + obs_count];
        g.rel_u.push_back(std::stod(rel_u));
        g.rel_a.push_back(std::stod(rel_a));
        g.res.push_back(std::stod(res));
        g.obs.push_back(std::stod(obs));
    }
    auto mean_std = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size());
        return std::pair<double, double>(mean, std::sqrt(var));
    };

    std::string report;
    for (const auto& [key, g] : groups) {
        const auto [mu, su] = mean_std(g.rel_u);
        const auto [ma, sa] = mean_std(g.rel_a);
        const auto [mr, sr] = mean_std(g.res);
        const auto [mo, so] = mean_std(g.obs);
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "%s runs=%zu rel_err_u = %.4f +- %.4f  rel_err_a = %.4f +- %.4f  "
                      "pde_residual = %.6g +- %.6g  obs_rel_err = %.4f +- %.4f\n",
                      key.c_str(), g.rel_u.size(), mu, su, ma, sa, mr, sr, mo, so);
        report += buf;
    }
    write_text_file(paths.report, report);

    // field and pointwise-error images for the first run
    Dataset ds = load_dataset(paths.dataset);
    Dataset generated = load_dataset(paths.samples);
    if (!generated.samples.empty()) {
        const int train_count = train_count_of(cfg, ds);
        const FieldGrid& gen = generated.samples.front();
        const FieldGrid& truth = ds.samples[train_count];
        const std::string img_dir = out_dir + "/images";
        ensure_out_dir(img_dir);
        for (int c = 0; c < gen.channels; ++c)
            for (int t = 0; t < gen.time_steps; ++t) {
                const std::string tag = "_c" + std::to_string(c) + "_t" + std::to_string(t);
                write_pgm(img_dir + "/generated" + tag + ".pgm", gen.slice(t, c), gen.height, gen.width);
                write_pgm(img_dir + "/truth" + tag + ".pgm", truth.slice(t, c), truth.height, truth.width);
                std::vector<double> err(gen.slice_size());
                for (std::size_t i = 0; i < err.size(); ++i)
                    err[i] = std::abs(gen.slice(t, c)[i] - truth.slice(t, c)[i]);
                write_pgm(img_dir + "/error" + tag + ".pgm", err, gen.height, gen.width);
            }
    }
}

}  // namespace pisd
