// qtrack command line: toy event generation, graph building, training,
// evaluation, and circuit description.

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qtrack/circuits.hpp"
#include "qtrack/errors.hpp"
#include "qtrack/graphbuild.hpp"
#include "qtrack/metrics.hpp"
#include "qtrack/qgnn.hpp"
#include "qtrack/trackdata.hpp"
#include "qtrack/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qtrack;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Flat runtime configuration; JSON config file values override these
// defaults, explicit CLI flags override both.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = library default

  // toy generation
  int events = 100;
  int n_particles = 10;
  double pt_min = 1.5, pt_max = 5.0;
  double field_tesla = 2.0;
  double z0_spread = 30.0;
  double eta_max = 1.2;

  // selection + slicing
  double cut_pt_min = 1.0;
  double cut_dphi_slope_max = 0.0006;
  double cut_z0_max = 100.0;
  double cut_eta_min = -5.0, cut_eta_max = 5.0;
  int n_phi = 8, n_z = 2;

  // model
  std::string ansatz = "TTN";
  int n_hidden = 1;
  int n_iterations = 1;
  bool classical = false;
  int shots = 0;  // 0 = analytic

  // training
  int epochs = 1;
  double lr = 0.03;
  int validation_size = 200;
  int repeat_runs = 3;
  int val_every = 10;
  bool record_wall_time = false;
};

void apply_json(RunConfig& cfg, const json& j) {
  if (j.contains("version") && j["version"].get<int>() != 1) {
    throw ParseError("config: unsupported version");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  get("seed", cfg.seed);
  get("threads", cfg.threads);
  get("events", cfg.events);
  get("n_particles", cfg.n_particles);
  get("pt_min", cfg.pt_min);
  get("pt_max", cfg.pt_max);
  get("field_tesla", cfg.field_tesla);
  get("z0_spread", cfg.z0_spread);
  get("eta_max", cfg.eta_max);
  get("cut_pt_min", cfg.cut_pt_min);
  get("cut_dphi_slope_max", cfg.cut_dphi_slope_max);
  get("cut_z0_max", cfg.cut_z0_max);
  get("cut_eta_min", cfg.cut_eta_min);
  get("cut_eta_max", cfg.cut_eta_max);
  get("n_phi", cfg.n_phi);
  get("n_z", cfg.n_z);
  get("ansatz", cfg.ansatz);
  get("n_hidden", cfg.n_hidden);
  get("n_iterations", cfg.n_iterations);
  get("classical", cfg.classical);
  get("shots", cfg.shots);
  get("epochs", cfg.epochs);
  get("lr", cfg.lr);
  get("validation_size", cfg.validation_size);
  get("repeat_runs", cfg.repeat_runs);
  get("val_every", cfg.val_every);
  get("record_wall_time", cfg.record_wall_time);
}

json to_json(const RunConfig& cfg) {
  return json{{"version", 1},
              {"seed", cfg.seed},
              {"threads", cfg.threads},
              {"events", cfg.events},
              {"n_particles", cfg.n_particles},
              {"pt_min", cfg.pt_min},
              {"pt_max", cfg.pt_max},
              {"field_tesla", cfg.field_tesla},
              {"z0_spread", cfg.z0_spread},
              {"eta_max", cfg.eta_max},
              {"cut_pt_min", cfg.cut_pt_min},
              {"cut_dphi_slope_max", cfg.cut_dphi_slope_max},
              {"cut_z0_max", cfg.cut_z0_max},
              {"cut_eta_min", cfg.cut_eta_min},
              {"cut_eta_max", cfg.cut_eta_max},
              {"n_phi", cfg.n_phi},
              {"n_z", cfg.n_z},
              {"ansatz", cfg.ansatz},
              {"n_hidden", cfg.n_hidden},
              {"n_iterations", cfg.n_iterations},
              {"classical", cfg.classical},
              {"shots", cfg.shots},
              {"epochs", cfg.epochs},
              {"lr", cfg.lr},
              {"validation_size", cfg.validation_size},
              {"repeat_runs", cfg.repeat_runs},
              {"val_every", cfg.val_every},
              {"record_wall_time", cfg.record_wall_time}};
}

trackdata::ToyConfig toy_config(const RunConfig& cfg) {
  trackdata::ToyConfig toy;
  toy.n_particles = cfg.n_particles;
  toy.pt_min = cfg.pt_min;
  toy.pt_max = cfg.pt_max;
  toy.field_tesla = cfg.field_tesla;
  toy.z0_spread = cfg.z0_spread;
  toy.eta_max = cfg.eta_max;
  toy.seed = cfg.seed;
  return toy;
}

graphbuild::SelectionCuts cuts_config(const RunConfig& cfg) {
  graphbuild::SelectionCuts cuts;
  cuts.pt_min = cfg.cut_pt_min;
  cuts.dphi_slope_max = cfg.cut_dphi_slope_max;
  cuts.z0_max = cfg.cut_z0_max;
  cuts.eta_min = cfg.cut_eta_min;
  cuts.eta_max = cfg.cut_eta_max;
  return cuts;
}

qgnn::ModelConfig model_config(const RunConfig& cfg) {
  qgnn::ModelConfig mc;
  mc.ansatz = circuits::ansatz_from_name(cfg.ansatz);
  mc.n_hidden = cfg.n_hidden;
  mc.n_iterations = cfg.n_iterations;
  mc.classical = cfg.classical;
  mc.mode = cfg.shots > 0
                ? circuits::EvalMode::sampled(cfg.shots, cfg.seed)
                : circuits::EvalMode::analytic();
  return mc;
}

void echo_config(const RunConfig& cfg, const fs::path& out_dir) {
  std::ofstream os(out_dir / "config.json");
  if (!os) throw IoError("cannot write config echo in " + out_dir.string());
  os << to_json(cfg).dump(2) << "\n";
}

int cmd_gen_toy(const RunConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const trackdata::ToyConfig toy = toy_config(cfg);
  for (int e = 0; e < cfg.events; ++e) {
    const trackdata::EventRecord event = trackdata::generate_toy_event(toy, e);
    trackdata::write_trackml_event(event, out_dir);
  }
  json manifest{{"version", 1},
                {"n_events", cfg.events},
                {"seed", cfg.seed},
                {"generator", to_json(cfg)}};
  std::ofstream os(out_dir / "manifest.json");
  os << manifest.dump(2) << "\n";
  echo_config(cfg, out_dir);
  std::cout << "wrote " << cfg.events << " toy events to " << out_dir << "\n";
  return 0;
}

int cmd_build_graphs(const RunConfig& cfg, const fs::path& data_dir,
                     const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> hit_files;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("event") && name.ends_with("-hits.csv")) {
      hit_files.push_back(entry.path());
    }
  }
  std::sort(hit_files.begin(), hit_files.end());
  if (hit_files.empty()) {
    throw IoError("no event*-hits.csv files found in " + data_dir.string());
  }
  const graphbuild::SelectionCuts cuts = cuts_config(cfg);
  const graphbuild::SliceSpec spec{cfg.n_phi, cfg.n_z};

  std::ofstream manifest(out_dir / "manifest.csv");
  if (!manifest) throw IoError("cannot write manifest in " + out_dir.string());
  manifest << "file,event,phi_index,z_index,nodes,edges,true_edges\n";
  long long total_nodes = 0, total_edges = 0, total_true = 0;
  long long n_graphs = 0;
  for (const fs::path& hits_path : hit_files) {
    std::string base = hits_path.filename().string();
    base = base.substr(0, base.size() - std::string("-hits.csv").size());
    const long long event_id = std::stoll(base.substr(5));
    const trackdata::EventRecord event = trackdata::load_trackml_event(
        hits_path, data_dir / (base + "-truth.csv"),
        data_dir / (base + "-particles.csv"), event_id);
    const trackdata::EventRecord selected = graphbuild::select_hits(event, cuts);
    for (const graphbuild::SubGraph& raw :
         graphbuild::slice_event(selected, spec, cuts)) {
      const graphbuild::SubGraph graph = graphbuild::scale_features(raw);
      const std::string fname = base + "_phi" + std::to_string(graph.meta.phi_index) +
                                "_z" + std::to_string(graph.meta.z_index) + ".graph";
      graphbuild::write_graph(graph, out_dir / fname);
      const long long n_true =
          std::count(graph.labels.begin(), graph.labels.end(), 1);
      manifest << fname << ',' << event_id << ',' << graph.meta.phi_index << ','
               << graph.meta.z_index << ',' << graph.node_features.rows << ','
               << graph.edges.size() << ',' << n_true << '\n';
      total_nodes += static_cast<long long>(graph.node_features.rows);
      total_edges += static_cast<long long>(graph.edges.size());
      total_true += n_true;
      ++n_graphs;
    }
  }
  manifest << "TOTAL,,," << "," << total_nodes << ',' << total_edges << ','
           << total_true << '\n';
  echo_config(cfg, out_dir);
  std::cout << "wrote " << n_graphs << " subgraphs (" << total_nodes
            << " nodes, " << total_edges << " edges, " << total_true
            << " true) to " << out_dir << "\n";
  return 0;
}

std::vector<graphbuild::SubGraph> load_graphs(const fs::path& dir,
                                              bool drop_empty) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".graph") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .graph files found in " + dir.string());
  std::vector<graphbuild::SubGraph> graphs;
  for (const fs::path& f : files) {
    graphbuild::SubGraph g = graphbuild::read_graph(f);
    if (drop_empty && g.edges.empty()) continue;
    graphs.push_back(std::move(g));
  }
  if (graphs.empty()) throw IoError("all graphs in " + dir.string() + " are empty");
  return graphs;
}

int cmd_train(const RunConfig& cfg, const fs::path& graph_dir,
              const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::vector<graphbuild::SubGraph> dataset = load_graphs(graph_dir, true);
  const qgnn::ModelConfig mc = model_config(cfg);
  trainer::TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.lr = cfg.lr;
  tc.validation_size = cfg.validation_size;
  tc.shuffle_seed = cfg.seed;  // same validation split for every run
  tc.val_every = cfg.val_every;
  tc.repeat_runs = cfg.repeat_runs;
  tc.record_wall_time = cfg.record_wall_time;

  std::vector<trainer::TrainHistory> histories;
  double final_auc_sum = 0.0;
  for (int run = 0; run < cfg.repeat_runs; ++run) {
    const std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(run);
    tc.order_seed = run_seed;
    const trainer::TrainResult result = trainer::train(dataset, tc, mc, run_seed);
    const std::string tag = "run" + std::to_string(run);
    trainer::write_history_csv(out_dir / (tag + "_history.csv"), run, result.history);
    qgnn::write_checkpoint(out_dir / (tag + "_checkpoint.txt"), mc, result.params);
    double final_auc = 0.0;
    for (const auto& rec : result.history.records) {
      if (rec.has_val) final_auc = rec.val_auc;
    }
    final_auc_sum += final_auc;
    std::cout << tag << ": final validation AUC " << final_auc << "\n";
    histories.push_back(result.history);
  }
  metrics::emit_history(histories, out_dir / "curves.csv");
  const qgnn::Model model(mc);
  metrics::append_summary(out_dir / "summary.csv",
                          cfg.classical ? "classical" : "quantum", cfg.ansatz,
                          cfg.n_hidden, cfg.n_iterations,
                          model.total_param_count(),
                          final_auc_sum / cfg.repeat_runs);
  echo_config(cfg, out_dir);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& checkpoint,
                 const fs::path& graph_dir, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto [mc_raw, params] = qgnn::read_checkpoint(checkpoint);
  qgnn::ModelConfig mc = mc_raw;
  mc.mode = cfg.shots > 0 ? circuits::EvalMode::sampled(cfg.shots, cfg.seed)
                          : circuits::EvalMode::analytic();
  const qgnn::Model model(mc);
  const std::vector<graphbuild::SubGraph> graphs = load_graphs(graph_dir, true);
  const auto [loss, auc] = trainer::evaluate(graphs, model, params);
  std::cout << "graphs " << graphs.size() << " loss " << loss << " auc " << auc
            << "\n";
  metrics::append_summary(out_dir / "summary.csv",
                          mc.classical ? "classical" : "quantum",
                          circuits::ansatz_name(mc.ansatz), mc.n_hidden,
                          mc.n_iterations, model.total_param_count(), auc);
  echo_config(cfg, out_dir);
  return 0;
}

int cmd_describe(const std::string& ansatz_name, int n_qubits, int n_readout) {
  const circuits::AnsatzKind kind = circuits::ansatz_from_name(ansatz_name);
  std::cout << circuits::describe(kind, n_qubits, n_readout);
  // Pipeline totals at the published configuration (hidden size 1: 8-qubit
  // edge network, 12-qubit node network), next to the totals reported for
  // the original models.
  const int edge = circuits::param_count(kind, 8, 1);
  const int node = circuits::param_count(kind, 12, 1);
  int original_total = 0;
  switch (kind) {
    case circuits::AnsatzKind::MPS: original_total = 40; break;
    case circuits::AnsatzKind::TTN: original_total = 42; break;
    case circuits::AnsatzKind::MERA: original_total = 58; break;
  }
  std::cout << "pipeline totals (n_hidden=1): edge(8q)=" << edge
            << " node(12q)=" << node << " total=" << (edge + node)
            << " (original models report " << original_total << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  // Pre-scan for --config so file values become the defaults that explicit
  // flags then override.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::cerr << "cannot open config file " << argv[i + 1] << "\n";
        return kExitData;
      }
      try {
        json j;
        in >> j;
        apply_json(cfg, j);
      } catch (const json::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitData;
      } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitData;
      }
    }
  }

  CLI::App app{"hybrid quantum-classical GNN toolkit for track edge classification"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --seed/--threads after the subcommand too
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--seed", cfg.seed, "base random seed")
      ->default_val(cfg.seed);
  app.add_option("--threads", cfg.threads, "cap OpenMP worker threads (0 = default)")
      ->default_val(cfg.threads);

  std::string data_dir, graph_dir, out_dir, checkpoint;

  CLI::App* gen = app.add_subcommand("gen-toy", "generate toy events in TrackML CSV format");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--events", cfg.events, "number of events")->default_val(cfg.events);
  gen->add_option("--particles", cfg.n_particles, "particles per event")
      ->default_val(cfg.n_particles);
  gen->add_option("--pt-min", cfg.pt_min, "min pt [GeV]")->default_val(cfg.pt_min);
  gen->add_option("--pt-max", cfg.pt_max, "max pt [GeV]")->default_val(cfg.pt_max);
  gen->add_option("--field", cfg.field_tesla, "solenoid field [T]")
      ->default_val(cfg.field_tesla);
  gen->add_option("--z0-spread", cfg.z0_spread, "vertex z spread [mm]")
      ->default_val(cfg.z0_spread);
  gen->add_option("--eta-max", cfg.eta_max, "generator |eta| acceptance")
      ->default_val(cfg.eta_max);

  CLI::App* build = app.add_subcommand("build-graphs", "select hits, slice, and build labeled subgraphs");
  build->add_option("--data", data_dir, "event CSV directory")->required();
  build->add_option("--out", out_dir, "output directory")->required();
  build->add_option("--pt-cut", cfg.cut_pt_min, "min truth pt [GeV]")
      ->default_val(cfg.cut_pt_min);
  build->add_option("--dphi-slope", cfg.cut_dphi_slope_max,
                    "max |dphi/dr| [1/mm]")
      ->default_val(cfg.cut_dphi_slope_max);
  build->add_option("--z0-cut", cfg.cut_z0_max, "max |z0| [mm]")
      ->default_val(cfg.cut_z0_max);
  build->add_option("--eta-min", cfg.cut_eta_min, "min eta")->default_val(cfg.cut_eta_min);
  build->add_option("--eta-max-cut", cfg.cut_eta_max, "max eta")->default_val(cfg.cut_eta_max);
  build->add_option("--n-phi", cfg.n_phi, "phi sectors per event")->default_val(cfg.n_phi);
  build->add_option("--n-z", cfg.n_z, "z bins per event")->default_val(cfg.n_z);

  auto add_model_flags = [&cfg](CLI::App* cmd) {
    cmd->add_option("--ansatz", cfg.ansatz, "MPS, TTN, or MERA")->default_val(cfg.ansatz);
    cmd->add_option("--n-hidden", cfg.n_hidden, "hidden dimension")->default_val(cfg.n_hidden);
    cmd->add_option("--n-iterations", cfg.n_iterations, "recurrent iterations")
        ->default_val(cfg.n_iterations);
    cmd->add_flag("--classical", cfg.classical, "use the classical baseline model");
    cmd->add_option("--shots", cfg.shots, "forward-pass measurement shots (0 = analytic)")
        ->default_val(cfg.shots);
  };

  CLI::App* train = app.add_subcommand("train", "train the model on built subgraphs");
  train->add_option("--graphs", graph_dir, "subgraph directory")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  add_model_flags(train);
  train->add_option("--epochs", cfg.epochs, "training epochs")->default_val(cfg.epochs);
  train->add_option("--lr", cfg.lr, "Adam learning rate")->default_val(cfg.lr);
  train->add_option("--validation-size", cfg.validation_size,
                    "subgraphs held out for validation")
      ->default_val(cfg.validation_size);
  train->add_option("--repeat-runs", cfg.repeat_runs,
                    "repeated runs with derived seeds")
      ->default_val(cfg.repeat_runs);
  train->add_option("--val-every", cfg.val_every, "validation cadence in steps")
      ->default_val(cfg.val_every);
  train->add_flag("--wall-times", cfg.record_wall_time,
                  "record wall-clock seconds in history files (breaks byte reproducibility)");

  CLI::App* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on a graph set");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--graphs", graph_dir, "subgraph directory")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_option("--shots", cfg.shots, "measurement shots (0 = analytic)")
      ->default_val(cfg.shots);

  std::string describe_ansatz = "MPS";
  int describe_qubits = 8, describe_readout = 1;
  CLI::App* describe = app.add_subcommand("describe", "print a circuit listing and parameter counts");
  describe->add_option("--ansatz", describe_ansatz, "MPS, TTN, or MERA")
      ->default_val(describe_ansatz);
  describe->add_option("--qubits", describe_qubits, "circuit width")
      ->default_val(describe_qubits);
  describe->add_option("--readout", describe_readout, "readout qubit count")
      ->default_val(describe_readout);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

  try {
    if (gen->parsed()) return cmd_gen_toy(cfg, out_dir);
    if (build->parsed()) return cmd_build_graphs(cfg, data_dir, out_dir);
    if (train->parsed()) return cmd_train(cfg, graph_dir, out_dir);
    if (eval->parsed()) return cmd_evaluate(cfg, checkpoint, graph_dir, out_dir);
    if (describe->parsed()) {
      return cmd_describe(describe_ansatz, describe_qubits, describe_readout);
    }
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const JoinError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CompatibilityError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const RangeError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const GeometryError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const SingularityError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DegenerateClassError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
