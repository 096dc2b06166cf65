// File formats: JSON records, Gram CSV and PGM heatmaps, and the experiment
// configuration.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qembed/analysis.hpp"
#include "qembed/compile.hpp"
#include "qembed/embedding.hpp"
#include "qembed/hwsim.hpp"
#include "qembed/random.hpp"
#include "qembed/training.hpp"

namespace qembed {

using json = nlohmann::json;

inline constexpr double kRadToDeg = 180.0 / pi;
inline constexpr double kMicro = 1e-6;

// ---------------------------------------------------------------------------
// Records

inline json to_json(const EmbeddingParams& p) {
  return {{"theta1", p.theta1}, {"theta2", p.theta2}, {"theta3", p.theta3}};
}

inline EmbeddingParams params_from_json(const json& j) {
  return {j.at("theta1").get<double>(), j.at("theta2").get<double>(), j.at("theta3").get<double>()};
}

inline json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"iterations", c.iterations},
          {"batch_per_class", c.batch_per_class},
          {"eval_per_class", c.eval_per_class},
          {"fd_step", c.fd_step},
          {"seed", c.seed},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}}};
}

inline json to_json(const TrainTrace& t) {
  return {{"seed", t.seed},
          {"config", to_json(t.config)},
          {"initial_params", to_json(t.initial_params)},
          {"cost_trace", t.cost_trace},
          {"final_params", to_json(t.final_params)}};
}

/// Durations in microseconds.
inline json to_json(const PulseSequence& s) {
  return {{"tau1_us", s.tau1 / kMicro}, {"T_us", s.off / kMicro}, {"tau2_us", s.tau2 / kMicro},
          {"infidelity", s.infidelity}};
}

inline PulseSequence pulse_from_json(const json& j) {
  return {j.at("tau1_us").get<double>() * kMicro, j.at("T_us").get<double>() * kMicro,
          j.at("tau2_us").get<double>() * kMicro, j.value("infidelity", 0.0)};
}

/// Plate angles in degrees.
inline json to_json(const WaveplateSetting& w) {
  return {{"q1_deg", w.q1 * kRadToDeg}, {"h2_deg", w.h2 * kRadToDeg}, {"q3_deg", w.q3 * kRadToDeg},
          {"residual", w.residual}};
}

inline WaveplateSetting waveplates_from_json(const json& j) {
  return {j.at("q1_deg").get<double>() / kRadToDeg, j.at("h2_deg").get<double>() / kRadToDeg,
          j.at("q3_deg").get<double>() / kRadToDeg, j.value("residual", 0.0)};
}

inline json to_json(const BlochVector& b) { return json::array({b.x, b.y, b.z}); }

inline json to_json(const TomographyRecord& r) {
  json j;
  j["platform"] = r.platform == Platform::Atomic ? "atomic" : "photonic";
  if (r.platform == Platform::Atomic) {
    j["populations"] = r.populations;
    j["components"] = r.components;
  } else {
    j["counts"] = {{"H", r.counts[kH]}, {"V", r.counts[kV]}, {"D", r.counts[kD]},
                   {"A", r.counts[kA]}, {"R", r.counts[kR]}, {"L", r.counts[kL]}};
  }
  j["raw"] = to_json(r.raw);
  j["reconstructed"] = to_json(r.reconstructed);
  j["uncertainty"] = r.uncertainty;
  return j;
}

inline json to_json(const CapacityReport& r) {
  json j = json::object();
  if (r.fidelity) j["fidelity"] = *r.fidelity;
  if (r.max_points) j["max_points"] = *r.max_points;
  if (r.classes) j["classes"] = *r.classes;
  if (r.max_sector_angle) j["max_sector_angle"] = *r.max_sector_angle;
  return j;
}

inline json to_json(const ClusterMetrics& m) {
  return {{"intra_mean", m.intra_mean}, {"inter_mean", m.inter_mean}, {"separation_gap", m.separation_gap}};
}

// ---------------------------------------------------------------------------
// Gram matrices

/// n rows of n comma-separated values.
inline void write_gram_csv(std::ostream& os, const GramMatrix& g) {
  std::ostringstream ss;
  ss.precision(17);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) ss << (j ? "," : "") << g(i, j);
    ss << '\n';
  }
  os << ss.str();
}

/// Binary 8-bit PGM, one pixel per entry (row i = state i), grey level
/// round(255 * entry) with entries clamped to [0, 1].
inline void write_gram_pgm(std::ostream& os, const GramMatrix& g) {
  os << "P5\n" << g.n << ' ' << g.n << "\n255\n";
  for (double v : g.values) {
    const auto level = static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    os.put(static_cast<char>(level));
  }
}

// ---------------------------------------------------------------------------
// Experiment configuration

/// Invalid configuration or input; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every stage seed is derive_seed(seed, "<stage>") for the stages
/// "dataset", "validation", "train", "shots", "tomography" and "compile".
struct ExperimentConfig {
  std::uint64_t seed = 2021;
  std::string out = "out";
  BandLayout bands = BandLayout::standard();
  std::size_t points = 1000;
  std::size_t validation_per_class = 5;
  TrainConfig train;
  AtomicPlatformSpec atomic;
  AtomicNoiseModel atomic_noise;
  PhotonicNoiseModel photonic_noise;
  std::int64_t shots = 2000;

  std::uint64_t stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

  TrainConfig train_config() const {
    TrainConfig c = train;
    c.seed = stage_seed("train");
    return c;
  }

  void validate() const {
    auto wrap = [](const char* field, auto&& fn) {
      try {
        fn();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(field) + ": " + e.what());
      }
    };
    wrap("bands", [&] { bands.validate(); });
    if (points < 2) throw ConfigError("dataset.points: must be >= 2");
    if (validation_per_class < 1) throw ConfigError("validation.per_class: must be >= 1");
    wrap("train", [&] { train.validate(); });
    wrap("atomic", [&] { atomic.validate(); });
    wrap("atomic_noise", [&] { atomic_noise.validate(); });
    wrap("photonic_noise", [&] { photonic_noise.validate(); });
    if (shots < 1) throw ConfigError("shots: must be >= 1");
    if (out.empty()) throw ConfigError("out: must not be empty");
  }
};

inline json to_json(const ExperimentConfig& c) {
  json bands = json::array();
  for (const auto& b : c.bands.bands) bands.push_back({b.lo, b.hi});
  json train = to_json(c.train);
  train.erase("seed");
  return {{"seed", c.seed},
          {"out", c.out},
          {"dataset", {{"points", c.points}, {"bands", bands}}},
          {"validation", {{"per_class", c.validation_per_class}}},
          {"train", train},
          {"atomic",
           {{"rabi_khz", c.atomic.rabi / (2.0 * pi * 1e3)},
            {"detuning_khz", c.atomic.detuning / (2.0 * pi * 1e3)},
            {"max_duration_us", c.atomic.max_duration / kMicro},
            {"time_resolution_us", c.atomic.time_resolution / kMicro}}},
          {"atomic_noise",
           {{"relative_drift", c.atomic_noise.relative_drift},
            {"rabi_jitter_khz", c.atomic_noise.rabi_jitter / (2.0 * pi * 1e3)},
            {"detuning_jitter_khz", c.atomic_noise.detuning_jitter / (2.0 * pi * 1e3)},
            {"repetitions", c.atomic_noise.repetitions}}},
          {"photonic_noise",
           {{"encoding_plate_error_deg", c.photonic_noise.encoding_plate_error * kRadToDeg},
            {"tomo_plate_error_deg", c.photonic_noise.tomo_plate_error * kRadToDeg},
            {"retardance_error_deg", c.photonic_noise.retardance_error * kRadToDeg},
            {"total_counts", c.photonic_noise.total_counts}}},
          {"shots", c.shots}};
}

namespace detail {

/// Typed read of an optional key; unknown keys and wrong types raise
/// ConfigError naming the dotted path.
class ConfigReader {
 public:
  ConfigReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  void read_count(const char* key, std::size_t& out) {
    auto v = static_cast<std::int64_t>(out);
    read(key, v);
    if (v < 0) throw ConfigError(where() + key + ": must be >= 0");
    out = static_cast<std::size_t>(v);
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where() + key + ": wrong type");
    }
  }

  void read_scaled(const char* key, double& out, double scale) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    double v = out / scale;
    read(key, v);
    out = v * scale;
  }

  ConfigReader child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return ConfigReader(j_.contains(key) ? j_.at(key) : empty, path_ + key + ".");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(where() + k + ": unknown field");
    }
  }

  std::string where() const { return path_.empty() ? std::string() : path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

/// Missing fields keep their defaults.
inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  detail::ConfigReader r(j, "");
  r.read("seed", c.seed);
  r.read("out", c.out);
  r.read("shots", c.shots);
  {
    auto d = r.child("dataset");
    d.read_count("points", c.points);
    if (d.has("bands")) {
      BandLayout layout;
      const json& bands = d.raw("bands");
      if (!bands.is_array()) throw ConfigError("dataset.bands: must be an array of [lo, hi] pairs");
      for (const auto& b : bands) {
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
          throw ConfigError("dataset.bands: each band must be [lo, hi]");
        layout.bands.push_back({b[0].get<double>(), b[1].get<double>()});
      }
      c.bands = layout;
    }
    d.finish();
  }
  {
    auto v = r.child("validation");
    v.read_count("per_class", c.validation_per_class);
    v.finish();
  }
  {
    auto t = r.child("train");
    t.read("learning_rate", c.train.learning_rate);
    t.read("iterations", c.train.iterations);
    t.read("batch_per_class", c.train.batch_per_class);
    t.read("eval_per_class", c.train.eval_per_class);
    t.read("fd_step", c.train.fd_step);
    auto a = t.child("adam");
    a.read("beta1", c.train.adam.beta1);
    a.read("beta2", c.train.adam.beta2);
    a.read("epsilon", c.train.adam.epsilon);
    a.finish();
    t.finish();
  }
  {
    auto a = r.child("atomic");
    a.read_scaled("rabi_khz", c.atomic.rabi, 2.0 * pi * 1e3);
    a.read_scaled("detuning_khz", c.atomic.detuning, 2.0 * pi * 1e3);
    a.read_scaled("max_duration_us", c.atomic.max_duration, kMicro);
    a.read_scaled("time_resolution_us", c.atomic.time_resolution, kMicro);
    a.finish();
  }
  {
    auto a = r.child("atomic_noise");
    a.read("relative_drift", c.atomic_noise.relative_drift);
    a.read_scaled("rabi_jitter_khz", c.atomic_noise.rabi_jitter, 2.0 * pi * 1e3);
    a.read_scaled("detuning_jitter_khz", c.atomic_noise.detuning_jitter, 2.0 * pi * 1e3);
    a.read("repetitions", c.atomic_noise.repetitions);
    a.finish();
  }
  {
    auto p = r.child("photonic_noise");
    p.read_scaled("encoding_plate_error_deg", c.photonic_noise.encoding_plate_error, 1.0 / kRadToDeg);
    p.read_scaled("tomo_plate_error_deg", c.photonic_noise.tomo_plate_error, 1.0 / kRadToDeg);
    p.read_scaled("retardance_error_deg", c.photonic_noise.retardance_error, 1.0 / kRadToDeg);
    p.read("total_counts", c.photonic_noise.total_counts);
    p.finish();
  }
  r.finish();
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace qembed
