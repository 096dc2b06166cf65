// qembed command-line driver: dataset, train, gram, compile, simulate and
// capacity subcommands writing their artifacts under --out.
//
// Exit codes: 0 success, 2 invalid input or configuration, 1 runtime error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "qembed/analysis.hpp"
#include "qembed/compile.hpp"
#include "qembed/embedding.hpp"
#include "qembed/hwsim.hpp"
#include "qembed/io.hpp"
#include "qembed/tables.hpp"
#include "qembed/training.hpp"

namespace fs = std::filesystem;
using namespace qembed;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Collects the files a command writes and updates manifest.json.
class Run {
 public:
  Run(const ExperimentConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    dir_ = cfg.out;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    start_ = std::chrono::steady_clock::now();
  }

  void write(const std::string& name, const std::string& contents) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << contents;
    out.close();
    if (!out) throw std::runtime_error("error writing " + p.string());
    files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  /// Merges this command into manifest.json and re-checksums every listed
  /// file; entries whose file has disappeared are dropped.
  void finish() {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const fs::path mpath = dir_ / "manifest.json";
    json m = json::object();
    if (fs::exists(mpath)) {
      try {
        m = json::parse(slurp(mpath));
      } catch (const json::exception&) {
        m = json::object();
      }
    }
    json commands = m.value("commands", json::object());
    commands[command_] = {{"files", files_}, {"seconds", seconds}, {"config_sha256", config_hash()}};

    json files = json::object();
    for (auto& [cmd, entry] : commands.items()) {
      json kept = json::array();
      for (const auto& f : entry.value("files", json::array())) {
        const fs::path p = dir_ / f.get<std::string>();
        if (!fs::exists(p)) continue;
        const std::string bytes = slurp(p);
        files[f.get<std::string>()] = {{"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}};
        kept.push_back(f);
      }
      entry["files"] = kept;
    }
    m = {{"tool", "qembed"},
         {"version", kVersion},
         {"config", to_json(cfg_)},
         {"config_sha256", config_hash()},
         {"commands", commands},
         {"files", files}};
    std::ofstream out(mpath, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + mpath.string());
    out << m.dump(2) << "\n";
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::string config_hash() const { return sha256_hex(to_json(cfg_).dump()); }

  ExperimentConfig cfg_;
  std::string command_;
  fs::path dir_;
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

std::string dataset_csv(const LabeledDataset& ds) {
  std::ostringstream os;
  write_dataset_csv(os, ds);
  return os.str();
}

LabeledDataset training_set(const ExperimentConfig& cfg) {
  return generate_dataset(cfg.bands, cfg.points, cfg.stage_seed("dataset"));
}

/// Ten (by default) held-out points, class A first.
LabeledDataset validation_set(const ExperimentConfig& cfg) {
  return grouped_by_class(draw_balanced(cfg.bands, cfg.validation_per_class, cfg.stage_seed("validation")));
}

EmbeddingParams load_params(const std::string& path) {
  if (path.empty()) throw ConfigError("--params is required for this mode (run `qembed train` first)");
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw ConfigError("--params " + path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("--params: ") + e.what());
  }
  try {
    return params_from_json(j.contains("final_params") ? j.at("final_params") : j);
  } catch (const json::exception&) {
    throw ConfigError("--params " + path + ": expected fields theta1, theta2, theta3");
  }
}

std::vector<Label> labels_of(const LabeledDataset& ds) {
  std::vector<Label> out;
  for (const auto& p : ds.points) out.push_back(p.label);
  return out;
}

json bloch_json(const PureQubitState& s) { return to_json(state_to_bloch(s)); }

// ---------------------------------------------------------------------------
// Subcommands

void cmd_dataset(const ExperimentConfig& cfg) {
  Run run(cfg, "dataset");
  run.write("dataset.csv", dataset_csv(training_set(cfg)));
  run.write("validation.csv", dataset_csv(validation_set(cfg)));
  run.finish();
}

void cmd_train(const ExperimentConfig& cfg) {
  Run run(cfg, "train");
  const LabeledDataset data = training_set(cfg);
  const TrainTrace trace = train(data, cfg.train_config());
  run.write_json("trace.json", to_json(trace));
  run.write_json("params.json", to_json(trace.final_params));

  std::ostringstream curve;
  curve.precision(17);
  curve << "iteration,cost\n";
  for (std::size_t i = 0; i < trace.cost_trace.size(); ++i) curve << i << ',' << trace.cost_trace[i] << '\n';
  run.write("cost.csv", curve.str());

  const LabeledDataset val = validation_set(cfg);
  const OverlapClassifier clf(trace.final_params, data);
  json preds = json::array();
  std::size_t correct = 0;
  for (const auto& p : val.points) {
    const Classification c = clf.classify(p.value);
    correct += c.label == p.label;
    preds.push_back({{"value", p.value},
                     {"label", std::string(1, label_char(p.label))},
                     {"predicted", std::string(1, label_char(c.label))},
                     {"mean_fidelity_a", c.mean_fidelity_a},
                     {"mean_fidelity_b", c.mean_fidelity_b},
                     {"tie", c.tie}});
  }
  run.write_json("validation.json", {{"correct", correct}, {"total", val.size()}, {"points", preds}});
  run.finish();

  std::cout << "cost " << trace.cost_trace.front() << " -> " << trace.cost_trace.back() << ", validation "
            << correct << "/" << val.size() << "\n";
}

void cmd_gram(const ExperimentConfig& cfg, const std::string& mode, const std::string& params_path) {
  std::vector<PureQubitState> states;
  std::vector<Label> labels;
  if (mode == "exact" || mode == "shots") {
    const EmbeddingParams params = load_params(params_path);
    const LabeledDataset val = validation_set(cfg);
    std::vector<double> xs;
    for (const auto& p : val.points) xs.push_back(p.value);
    states = embed_all(xs, params);
    labels = labels_of(val);
  } else if (mode == "atomic") {
    states = tables::atomic_states(cfg.atomic);
    labels = tables::labels();
  } else if (mode == "photonic") {
    states = tables::photonic_states();
    labels = tables::labels();
  } else {
    throw ConfigError("--mode must be exact, shots, atomic or photonic");
  }

  Run run(cfg, "gram-" + mode);
  const GramMatrix g = mode == "shots" ? gram_from_shots(states, ShotModel{cfg.shots, cfg.stage_seed("shots")})
                                       : gram_matrix(states);
  std::ostringstream csv, pgm;
  write_gram_csv(csv, g);
  write_gram_pgm(pgm, g);
  run.write("gram_" + mode + ".csv", csv.str());
  run.write("gram_" + mode + ".pgm", pgm.str());

  const ClusterMetrics m = cluster_metrics(g, labels);
  const auto split = spectral_split(g);
  json j = to_json(m);
  json labs = json::array(), spl = json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labs.push_back(std::string(1, label_char(labels[i])));
    spl.push_back(std::string(1, label_char(split[i])));
  }
  j["labels"] = labs;
  j["spectral_split"] = spl;
  j["split_matches_labels"] = same_partition(split, labels);
  run.write_json("gram_" + mode + "_metrics.json", j);
  run.finish();
  std::cout << "separation gap " << m.separation_gap << "\n";
}

std::optional<AxisAngle> parse_axis(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--axis: '" + item + "' is not a number");
    }
  }
  if (v.size() != 4) throw ConfigError("--axis expects phi,nx,ny,nz");
  return AxisAngle{v[0], {v[1], v[2], v[3]}};
}

json photonic_record(const AxisAngle& aa, const WaveplateCompileOptions& opts) {
  PhotonicCompilation c;
  try {
    c = compile_waveplates(aa, opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("photonic target: ") + e.what());
  }
  const Unitary2 target = axis_rotation(aa);
  const Unitary2 realized = qhq_unitary(c.setting);
  json j = to_json(c.setting);
  j["target"] = {{"phi", aa.angle}, {"axis", aa.axis}};
  j["target_bloch"] = bloch_json(target * ket0());
  j["closed_form"] = c.closed_form;
  j["closed_form_residual"] = c.closed_form_residual;
  if (!c.note.empty()) j["note"] = c.note;
  j["verification"] = {{"unitary_distance", distance_up_to_phase(realized, target)},
                       {"state_infidelity", verify_compilation(target * ket0(), realized * ket0())}};
  return j;
}

void cmd_compile(const ExperimentConfig& cfg, const std::string& backend, const std::string& params_path,
                 const std::string& axis_text) {
  if (backend != "atomic" && backend != "photonic") throw ConfigError("--backend must be atomic or photonic");
  const auto axis = parse_axis(axis_text);
  if (axis && backend != "photonic") throw ConfigError("--axis applies to the photonic backend only");

  json records = json::array();
  if (axis) {
    WaveplateCompileOptions opts;
    opts.seed = cfg.stage_seed("compile");
    records.push_back(photonic_record(*axis, opts));
  } else {
    const EmbeddingParams params = load_params(params_path);
    const LabeledDataset val = validation_set(cfg);
    for (std::size_t i = 0; i < val.size(); ++i) {
      const double x = val.points[i].value;
      const std::uint64_t seed = derive_seed(cfg.stage_seed("compile"), {static_cast<std::uint64_t>(i)});
      json j;
      if (backend == "atomic") {
        AtomicCompileOptions opts;
        opts.seed = seed;
        const PureQubitState target = feature_map(x, params);
        const AtomicCompilation c = compile_atomic(target, cfg.atomic, opts);
        j = {{"sequence", to_json(c.sequence)},
             {"quantized", to_json(c.quantized)},
             {"converged", c.converged},
             {"target_bloch", bloch_json(target)},
             {"verification",
              {{"state_infidelity", verify_compilation(target, atomic_evolution(c.sequence, cfg.atomic))},
               {"quantized_infidelity", verify_compilation(target, atomic_evolution(c.quantized, cfg.atomic))}}}};
      } else {
        WaveplateCompileOptions opts;
        opts.seed = seed;
        const AxisAngleDecomposition d = unitary_to_axis_angle(embedding_unitary(x, params));
        j = photonic_record(d.rotation, opts);
      }
      j["value"] = x;
      j["label"] = std::string(1, label_char(val.points[i].label));
      records.push_back(j);
    }
  }
  Run run(cfg, "compile-" + backend);
  run.write_json("compile_" + backend + ".json", {{"backend", backend}, {"records", records}});
  run.finish();
  std::cout << records.size() << " " << backend << " record(s) written\n";
}

struct SimTarget {
  PulseSequence sequence;
  WaveplateSetting setting;
  PureQubitState ideal;
};

std::vector<SimTarget> sim_targets(const ExperimentConfig& cfg, const std::string& platform,
                                   const std::string& input) {
  std::vector<SimTarget> out;
  if (input.empty()) {
    if (platform == "atomic") {
      const auto seqs = tables::atomic_sequences();
      for (const auto& s : seqs) out.push_back({s, {}, atomic_evolution(s, cfg.atomic)});
    } else {
      WaveplateCompileOptions opts;
      opts.seed = cfg.stage_seed("compile");
      for (const auto& aa : tables::photonic_rotations())
        out.push_back({{}, compile_waveplates(aa, opts).setting, axis_rotation(aa) * ket0()});
    }
    return out;
  }
  json j;
  try {
    j = json::parse(slurp(input));
  } catch (const std::exception& e) {
    throw ConfigError("--input " + input + ": " + e.what());
  }
  if (j.value("backend", "") != platform)
    throw ConfigError("--input " + input + " holds " + j.value("backend", std::string("?")) + " records");
  try {
    for (const auto& r : j.at("records")) {
      const auto b = r.at("target_bloch");
      const PureQubitState ideal = bloch_to_state({b[0].get<double>(), b[1].get<double>(), b[2].get<double>()});
      if (platform == "atomic") {
        out.push_back({pulse_from_json(r.at("sequence")), {}, ideal});
      } else {
        out.push_back({{}, waveplates_from_json(r), ideal});
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("--input " + input + ": malformed record: " + e.what());
  }
  return out;
}

void cmd_simulate(const ExperimentConfig& cfg, const std::string& platform, const std::string& input, int runs,
                  bool noiseless) {
  if (platform != "atomic" && platform != "photonic") throw ConfigError("--platform must be atomic or photonic");
  if (runs < 1) throw ConfigError("--runs must be >= 1");
  const auto targets = sim_targets(cfg, platform, input);

  json states = json::array();
  double fid_total = 0.0;
  std::size_t fid_count = 0;
  if (platform == "atomic") {
    const AtomicNoiseModel noise = noiseless ? AtomicNoiseModel::none() : cfg.atomic_noise;
    const AtomicAnalysis analysis = compile_atomic_analysis(cfg.atomic);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      json rs = json::array();
      for (int r = 0; r < runs; ++r) {
        const std::uint64_t seed =
            derive_seed(cfg.stage_seed("tomography"), {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(r)});
        const TomographyRecord rec = simulate_atomic_tomography(targets[i].sequence, cfg.atomic, noise, analysis, seed);
        json j = to_json(rec);
        j["fidelity"] = fidelity(rec.reconstructed, targets[i].ideal);
        fid_total += j["fidelity"].get<double>();
        ++fid_count;
        rs.push_back(j);
      }
      states.push_back({{"index", i + 1}, {"sequence", to_json(targets[i].sequence)}, {"runs", rs}});
    }
  } else {
    const PhotonicNoiseModel noise =
        noiseless ? PhotonicNoiseModel::plates_off(cfg.photonic_noise.total_counts) : cfg.photonic_noise;
    const CountMode mode = noiseless ? CountMode::Expected : CountMode::Poisson;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      json rs = json::array();
      for (int r = 0; r < runs; ++r) {
        const std::uint64_t seed =
            derive_seed(cfg.stage_seed("tomography"), {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(r)});
        const TomographyRecord rec = simulate_photonic_tomography(targets[i].setting, noise, seed, mode);
        json j = to_json(rec);
        j["fidelity"] = fidelity(rec.reconstructed, targets[i].ideal);
        const FidelityEstimate mc = mc_fidelity_uncertainty(rec, targets[i].ideal, 300, derive_seed(seed, "bootstrap"));
        j["bootstrap"] = {{"replicas", 300}, {"mean", mc.mean}, {"std", mc.std}};
        fid_total += j["fidelity"].get<double>();
        ++fid_count;
        rs.push_back(j);
      }
      states.push_back({{"index", i + 1}, {"setting", to_json(targets[i].setting)}, {"runs", rs}});
    }
  }
  const double mean_fid = fid_total / static_cast<double>(fid_count);
  Run run(cfg, "simulate-" + platform);
  run.write_json("tomography_" + platform + ".json",
                 {{"platform", platform}, {"noiseless", noiseless}, {"mean_fidelity", mean_fid}, {"states", states}});
  run.finish();
  std::cout << "mean fidelity " << mean_fid << "\n";
}

void cmd_capacity(const ExperimentConfig& cfg, std::optional<double> f, std::optional<std::int64_t> n) {
  if (f.has_value() == n.has_value()) throw ConfigError("give exactly one of --fidelity or --classes");
  CapacityReport rep;
  try {
    rep = f ? capacity_for_fidelity(*f) : capacity_for_classes(*n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  Run run(cfg, "capacity");
  run.write_json("capacity.json", to_json(rep));
  run.finish();
  std::cout << to_json(rep).dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trainable single-qubit embeddings: training, compilation and simulated hardware runs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides the config file)");
  app.add_option("--out", out_dir, "output directory (overrides the config file)");

  auto* dataset = app.add_subcommand("dataset", "write the training and validation datasets");
  auto* train_cmd = app.add_subcommand("train", "train the embedding angles");

  auto* gram = app.add_subcommand("gram", "Gram matrix, heatmap and cluster metrics of ten states");
  std::string gram_mode = "exact", params_path;
  gram->add_option("--mode", gram_mode, "exact | shots | atomic | photonic");
  gram->add_option("--params", params_path, "params.json or trace.json from `train`");

  auto* compile = app.add_subcommand("compile", "compile target states to hardware parameters");
  std::string backend = "atomic", axis_text;
  compile->add_option("--backend", backend, "atomic | photonic");
  compile->add_option("--params", params_path, "params.json or trace.json from `train`");
  compile->add_option("--axis", axis_text, "single photonic target phi,nx,ny,nz");

  auto* simulate = app.add_subcommand("simulate", "simulated tomography of table rows or compiled records");
  std::string platform = "atomic", input;
  int runs = 1;
  bool noiseless = false;
  simulate->add_option("--platform", platform, "atomic | photonic");
  simulate->add_option("--input", input, "compile_<platform>.json (default: the published tables)");
  simulate->add_option("--runs", runs, "tomography runs per state");
  simulate->add_flag("--noiseless", noiseless, "switch off parameter noise (expected counts for photonic)");

  auto* capacity = app.add_subcommand("capacity", "embedding capacity bounds");
  std::optional<double> fid;
  std::optional<std::int64_t> classes;
  capacity->add_option("--fidelity", fid, "pairwise fidelity F in [0, 1)");
  capacity->add_option("--classes", classes, "number of classes N >= 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out = out_dir;
    cfg.validate();

    if (*dataset) cmd_dataset(cfg);
    if (*train_cmd) cmd_train(cfg);
    if (*gram) cmd_gram(cfg, gram_mode, params_path);
    if (*compile) cmd_compile(cfg, backend, params_path, axis_text);
    if (*simulate) cmd_simulate(cfg, platform, input, runs, noiseless);
    if (*capacity) cmd_capacity(cfg, fid, classes);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
