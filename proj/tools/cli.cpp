#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttnet/checkpoint.hpp"
#include "ttnet/datasets.hpp"
#include "ttnet/networks.hpp"
#include "ttnet/patches.hpp"
#include "ttnet/random.hpp"
#include "ttnet/rank_analysis.hpp"
#include "ttnet/svd.hpp"
#include "ttnet/tensor_io.hpp"
#include "ttnet/training.hpp"

namespace ttnet::cli {

namespace {

namespace fs = std::filesystem;

// Raised for bad flag values found after parsing; maps to exit code 2.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Seed streams derived from --seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDataStream = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config;
};

struct VerifyOptions {
  std::string kind;
  std::size_t d = 6, n = 3, r = 3, samples = 100;
  std::vector<std::size_t> n_values{2, 3, 4}, r_values{2, 3, 4};
  std::string direction = "tt2ht";
  double rel_tol = kCertificateRelTol;
  std::string csv;
};

struct RankOptions {
  std::string file;
  std::vector<std::string> splits;
  double rel_tol = kDefaultRelTol;
};

// Shared by train and sweep.
struct DataOptions {
  std::string dataset = "moons";
  std::size_t points = 500;
  double noise = 0.1;
  double factor = 0.5;
  std::string mnist_images = "data/mnist5k/images-idx3-ubyte";
  std::string mnist_labels = "data/mnist5k/labels-idx1-ubyte";
  std::size_t limit = 0;
  std::size_t patch = 8;
  std::size_t stride = 4;
};

struct ModelOptions {
  std::size_t features = 4;
  std::string activation = "relu";
  std::string class_mode = "shared";
  std::size_t epochs = 300;
  std::size_t batch_size = 32;
  double learning_rate = 0.0;  // 0 runs the four-rate sweep
};

struct TrainOptions {
  std::string network = "tt";
  std::size_t rank = 8;
  std::string history = "history.csv";
  std::string checkpoint = "checkpoint.txt";
};

struct BoundaryOptions {
  std::string checkpoint;
  std::vector<double> bounds{-1.5, 2.5, -1.0, 1.5};
  std::size_t resolution = 100;
  std::string emit = "csv";
  std::string output;
  std::string overlay;  // moons | circles | empty
};

struct SweepOptions {
  std::vector<std::string> networks{"tt"};
  std::vector<std::size_t> ranks;
  std::string csv = "sweep.csv";
};

struct PatchOptions {
  std::string image;
  std::size_t patch = 7;
  std::size_t stride = 0;  // 0 means equal to the patch size
  std::size_t channels = 1;
  std::string csv = "patches.csv";
};

fs::path output_path(const Globals& g, const std::string& name) {
  const fs::path dir(g.out_dir);
  fs::create_directories(dir);
  return dir / name;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

// ---------------------------------------------------------------------------
// JSON config: flat keys named like the long flags; flags given on the
// command line win.

std::vector<std::string> json_results(const nlohmann::json& value) {
  if (value.is_array()) {
    std::vector<std::string> out;
    for (const auto& v : value) {
      auto r = json_results(v);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }
  if (value.is_string()) return {value.get<std::string>()};
  if (value.is_boolean()) return {value.get<bool>() ? "true" : "false"};
  if (value.is_number()) return {value.dump()};
  throw UsageError("config values must be strings, numbers, booleans or arrays");
}

void apply_config(CLI::App& app, CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config " + path + " must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") throw UsageError("config files cannot name another config");
    CLI::Option* opt = sub != nullptr ? sub->get_option_no_throw("--" + key) : nullptr;
    if (opt == nullptr) opt = app.get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(json_results(value));
    opt->run_callback();
  }
}

// ---------------------------------------------------------------------------
// verify

int summary(std::ostream& out, std::size_t ok, std::size_t total) {
  out << (ok == total ? "PASS " : "FAIL ") << ok << '/' << total << '\n';
  return ok == total ? kExitOk : kExitFailure;
}

int cmd_verify(const Globals& g, const VerifyOptions& o, std::ostream& out) {
  const std::string csv_name = o.csv.empty() ? o.kind + ".csv" : o.csv;
  if (o.kind == "theorem1") {
    const auto report = verify_theorem1(o.d, o.n, o.r, o.samples, g.seed, o.rel_tol);
    auto f = open_output(output_path(g, csv_name));
    write_csv(f, report);
    out << "threshold " << report.threshold << '\n';
    return summary(out, report.num_satisfying(), report.num_samples());
  }
  if (o.kind == "hypothesis1") {
    const auto reports = verify_hypothesis1(o.d, o.n_values, o.r_values, o.samples, g.seed, o.rel_tol);
    auto f = open_output(output_path(g, csv_name));
    write_csv(f, reports);
    std::size_t ok = 0, total = 0;
    for (const auto& r : reports) {
      out << "n=" << r.n << " r=" << r.r << " threshold " << r.threshold << ": " << r.num_satisfying() << '/'
          << r.num_samples() << '\n';
      ok += r.num_satisfying();
      total += r.num_samples();
    }
    return summary(out, ok, total);
  }
  if (o.kind == "ht-bounds") {
    const auto report =
        verify_ht_tt_bounds(o.d, o.n, o.r, o.samples, g.seed, parse_bound_direction(o.direction), o.rel_tol);
    auto f = open_output(output_path(g, csv_name));
    write_csv(f, report);
    out << "max_observed " << report.max_observed() << " bound " << report.bound << '\n';
    return summary(out, report.samples.size() - report.violations(), report.samples.size());
  }
  throw UsageError("verify kind must be theorem1, hypothesis1 or ht-bounds, got '" + o.kind + "'");
}

// ---------------------------------------------------------------------------
// rank

std::vector<std::size_t> parse_axes(const std::string& text) {
  std::vector<std::size_t> axes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const unsigned long v = std::stoul(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      axes.push_back(v);
    } catch (const std::logic_error&) {
      throw UsageError("split '" + text + "' must be a comma-separated list of 1-based axes");
    }
  }
  return axes;
}

int cmd_rank(const RankOptions& o, std::ostream& out) {
  if (o.file.empty()) throw UsageError("rank needs a tensor file");
  const DenseTensor x = to_dense(load_tensor(o.file));
  std::vector<AxisSplit> splits;
  if (o.splits.empty()) {
    if (x.order() < 2) throw UsageError("rank bounds need a tensor of order >= 2");
    if (x.order() % 2 == 0) splits.push_back(AxisSplit::odd_even(x.order()));
    for (std::size_t k = 1; k < x.order(); ++k) splits.push_back(AxisSplit::prefix(k, x.order()));
  } else {
    for (const auto& s : o.splits) splits.emplace_back(parse_axes(s), x.order());
  }
  out << cp_rank_lower_bound(x, splits, o.rel_tol) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train / sweep

Dataset load_dataset(const Globals& g, const DataOptions& o) {
  const std::uint64_t seed = derive_seed(g.seed, kDataStream);
  if (o.dataset == "moons") return make_moons(o.points, o.noise, seed);
  if (o.dataset == "circles") return make_circles(o.points, o.noise, o.factor, seed);
  if (o.dataset == "mnist") {
    const Dataset images = load_mnist_idx(o.mnist_images, o.mnist_labels);
    PatchConfig cfg;
    cfg.image_height = images.length();
    cfg.image_width = images.input_dim();
    cfg.patch_height = cfg.patch_width = o.patch;
    cfg.stride = o.stride;
    const Dataset subset = o.limit == 0 ? images : strided_subset(images, o.limit);
    return to_patch_dataset(subset, cfg);
  }
  throw UsageError("dataset must be moons, circles or mnist, got '" + o.dataset + "'");
}

NetworkSpec network_spec(const Dataset& data, const ModelOptions& m, const std::string& network, std::size_t rank) {
  NetworkSpec spec;
  spec.format = parse_format(network);
  if (spec.format == Format::ht) throw UsageError("training supports tt and cp networks");
  spec.length = data.length();
  spec.input_dim = data.input_dim();
  spec.features = m.features;
  spec.rank = rank;
  spec.classes = data.num_classes;
  spec.class_mode = parse_class_mode(m.class_mode);
  spec.activation = parse_activation(m.activation);
  return spec;
}

TrainConfig train_config(const Globals& g, const ModelOptions& m) {
  TrainConfig cfg;
  cfg.epochs = m.epochs;
  cfg.batch_size = m.batch_size;
  cfg.seed = derive_seed(g.seed, kShuffleStream);
  if (m.learning_rate < 0.0) throw UsageError("learning rate must be positive");
  if (m.learning_rate > 0.0) cfg.learning_rate = m.learning_rate;
  cfg.validate();
  return cfg;
}

// Trains with the fixed rate if one was given, otherwise keeps the best of the
// sweep. Run k starts from its own initialization, seeded by (init stream, k).
SweepOutcome fit(const NetworkSpec& spec, const Globals& g, const Dataset& data, const TrainConfig& cfg,
                 const ModelOptions& m) {
  const std::uint64_t init_seed = derive_seed(g.seed, kInitStream);
  const InitFn initial_for = [&](std::size_t run) { return make_network(spec, derive_seed(init_seed, run)); };
  if (m.learning_rate > 0.0) {
    const double rate[] = {m.learning_rate};
    return train_best_rate(initial_for, data, cfg, rate);
  }
  return train_best_rate(initial_for, data, cfg);
}

int cmd_train(const Globals& g, const DataOptions& d, const ModelOptions& m, const TrainOptions& t,
              std::ostream& out) {
  const Dataset data = load_dataset(g, d);
  const TrainConfig cfg = train_config(g, m);
  const SweepOutcome result = fit(network_spec(data, m, t.network, t.rank), g, data, cfg, m);
  const RateRun& best = result.runs[result.best];
  {
    auto f = open_output(output_path(g, t.history));
    write_history_csv(f, best.history);
  }
  save_checkpoint(output_path(g, t.checkpoint), result.network);
  for (const auto& run : result.runs) {
    if (run.history.empty()) continue;
    out << "lr " << run.learning_rate << ": loss " << run.history.back().loss << " accuracy "
        << run.history.back().accuracy << '\n';
  }
  const Evaluation e = evaluate(result.network, data);
  out << "best lr " << best.learning_rate << " parameters " << result.network.parameter_count() << " loss " << e.loss
      << " accuracy " << e.accuracy << '\n';
  return kExitOk;
}

int cmd_sweep(const Globals& g, const DataOptions& d, const ModelOptions& m, const SweepOptions& s,
              std::ostream& out) {
  auto f = open_output(output_path(g, s.csv));
  f << std::setprecision(17) << "network,rank,parameters,loss,accuracy\n";
  if (s.ranks.empty()) return kExitOk;
  for (const auto& network : s.networks) parse_format(network);
  const Dataset data = load_dataset(g, d);
  const TrainConfig cfg = train_config(g, m);
  for (const auto& network : s.networks) {
    for (std::size_t rank : s.ranks) {
      const SweepOutcome result = fit(network_spec(data, m, network, rank), g, data, cfg, m);
      const Evaluation e = evaluate(result.network, data);
      f << network << ',' << rank << ',' << result.network.parameter_count() << ',' << e.loss << ',' << e.accuracy
        << '\n';
      out << network << " rank " << rank << ": accuracy " << e.accuracy << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// boundary

int cmd_boundary(const Globals& g, const BoundaryOptions& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw UsageError("boundary needs --checkpoint");
  if (o.bounds.size() != 4) throw UsageError("--bounds takes x_min,x_max,y_min,y_max");
  if (o.emit != "csv" && o.emit != "svg") throw UsageError("--emit must be csv or svg");
  const ScoreNetwork net = load_checkpoint(fs::path(o.checkpoint));
  const GridBounds bounds{o.bounds[0], o.bounds[1], o.bounds[2], o.bounds[3]};
  const DecisionGrid grid = decision_grid(net, bounds, o.resolution);
  const std::string name = o.output.empty() ? "boundary." + o.emit : o.output;
  auto f = open_output(output_path(g, name));
  if (o.emit == "csv") {
    write_grid_csv(f, grid);
  } else {
    Dataset points;
    const std::uint64_t seed = derive_seed(g.seed, kDataStream);
    if (o.overlay == "moons") points = make_moons(500, 0.1, seed);
    else if (o.overlay == "circles") points = make_circles(500, 0.1, 0.5, seed);
    else if (!o.overlay.empty()) throw UsageError("--overlay must be moons or circles");
    write_grid_svg(f, grid, points);
  }
  out << "wrote " << grid.resolution * grid.resolution << " cells\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// patches

int cmd_patches(const Globals& g, const PatchOptions& o, std::ostream& out) {
  if (o.image.empty()) throw UsageError("patches needs an image file");
  const Image img = load_image(o.image);
  PatchConfig cfg;
  cfg.channels = o.channels;
  if (img.width % o.channels != 0) throw UsageError("image width is not a multiple of the channel count");
  Image shaped = img;
  shaped.width = img.width / o.channels;
  shaped.channels = o.channels;
  cfg.image_height = shaped.height;
  cfg.image_width = shaped.width;
  cfg.patch_height = cfg.patch_width = o.patch;
  cfg.stride = o.stride == 0 ? o.patch : o.stride;
  const Matrix patches = extract_patches(shaped, cfg);
  auto f = open_output(output_path(g, o.csv));
  f << std::setprecision(17);
  for (std::size_t i = 0; i < patches.rows(); ++i) {
    for (std::size_t j = 0; j < patches.cols(); ++j) f << (j ? "," : "") << patches(i, j);
    f << '\n';
  }
  out << patches.rows() << 'x' << patches.cols() << '\n';
  return kExitOk;
}

void add_data_options(CLI::App* app, DataOptions& d) {
  app->add_option("--dataset", d.dataset, "moons, circles or mnist");
  app->add_option("--points", d.points, "Number of toy points");
  app->add_option("--noise", d.noise, "Gaussian noise sd for toy data");
  app->add_option("--factor", d.factor, "Inner circle radius");
  app->add_option("--mnist-images", d.mnist_images, "IDX image file");
  app->add_option("--mnist-labels", d.mnist_labels, "IDX label file");
  app->add_option("--limit", d.limit, "Use this many MNIST samples, spread over the file (0 = all)");
  app->add_option("--patch", d.patch, "Square patch size for images");
  app->add_option("--stride", d.stride, "Patch stride for images");
}

void add_model_options(CLI::App* app, ModelOptions& m) {
  app->add_option("--features", m.features, "Feature maps m");
  app->add_option("--activation", m.activation, "relu, identity or sigmoid");
  app->add_option("--class-mode", m.class_mode, "shared or per-class");
  app->add_option("--epochs", m.epochs, "Training epochs");
  app->add_option("--batch-size", m.batch_size, "Mini-batch size");
  app->add_option("--lr", m.learning_rate, "Learning rate; omit to keep the best of 4e-3, 2e-3, 1e-3, 5e-4");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tensor-network score functions: rank certificates and training", "ttnet"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out-dir", g.out_dir, "Directory for output files");
  app.add_option("--config", g.config, "JSON file with flag values (flags win)");

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "Monte Carlo rank checks");
  verify->add_option("kind", vo.kind, "theorem1, hypothesis1 or ht-bounds");
  verify->add_option("--d", vo.d, "Tensor order");
  verify->add_option("--n", vo.n, "Mode size");
  verify->add_option("--r", vo.r, "Rank");
  verify->add_option("--samples", vo.samples, "Samples (per cell for hypothesis1)");
  verify->add_option("--n-values", vo.n_values, "Mode sizes for hypothesis1")->delimiter(',');
  verify->add_option("--r-values", vo.r_values, "Ranks for hypothesis1")->delimiter(',');
  verify->add_option("--direction", vo.direction, "tt2ht or ht2tt");
  verify->add_option("--rel-tol", vo.rel_tol, "Relative singular-value cutoff");
  verify->add_option("--csv", vo.csv, "Report file name inside --out-dir");

  RankOptions ro;
  auto* rank = app.add_subcommand("rank", "CP-rank lower bound of a tensor file");
  rank->add_option("file", ro.file, "Tensor file");
  rank->add_option("--split", ro.splits, "Row axes of a matricization, e.g. 1,3 (repeatable)");
  rank->add_option("--rel-tol", ro.rel_tol, "Relative singular-value cutoff");

  DataOptions train_data, sweep_data;
  ModelOptions train_model, sweep_model;
  TrainOptions to;
  auto* train_cmd = app.add_subcommand("train", "Train a TT or CP network");
  add_data_options(train_cmd, train_data);
  add_model_options(train_cmd, train_model);
  train_cmd->add_option("--network", to.network, "tt or cp");
  train_cmd->add_option("--rank", to.rank, "Decomposition rank");
  train_cmd->add_option("--history", to.history, "History CSV name inside --out-dir");
  train_cmd->add_option("--checkpoint", to.checkpoint, "Checkpoint name inside --out-dir");

  SweepOptions so;
  auto* sweep = app.add_subcommand("sweep", "Accuracy against rank and parameter count");
  add_data_options(sweep, sweep_data);
  add_model_options(sweep, sweep_model);
  sweep->add_option("--network", so.networks, "tt, cp or both (comma-separated)")->delimiter(',');
  sweep->add_option("--ranks", so.ranks, "Comma-separated ranks")->delimiter(',');
  sweep->add_option("--csv", so.csv, "Output name inside --out-dir");

  BoundaryOptions bo;
  auto* boundary = app.add_subcommand("boundary", "Decision grid of a 2-D checkpoint");
  boundary->add_option("--checkpoint", bo.checkpoint, "Checkpoint file");
  boundary->add_option("--bounds", bo.bounds, "x_min,x_max,y_min,y_max")->delimiter(',');
  boundary->add_option("--resolution", bo.resolution, "Cells per axis");
  boundary->add_option("--emit", bo.emit, "csv or svg");
  boundary->add_option("--output", bo.output, "Output name inside --out-dir");
  boundary->add_option("--overlay", bo.overlay, "Draw moons or circles points in the SVG");

  PatchOptions po;
  auto* patches = app.add_subcommand("patches", "Extract the patch matrix of an image");
  patches->add_option("image", po.image, "PGM or CSV image");
  patches->add_option("--patch", po.patch, "Square patch size");
  patches->add_option("--stride", po.stride, "Stride (default: patch size)");
  patches->add_option("--channels", po.channels, "Channels interleaved along CSV rows");
  patches->add_option("--csv", po.csv, "Output name inside --out-dir");

  std::vector<const char*> argv{"ttnet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!g.config.empty()) apply_config(app, sub, g.config);
    if (sub == verify) return cmd_verify(g, vo, out);
    if (sub == rank) return cmd_rank(ro, out);
    if (sub == train_cmd) return cmd_train(g, train_data, train_model, to, out);
    if (sub == sweep) return cmd_sweep(g, sweep_data, sweep_model, so, out);
    if (sub == boundary) return cmd_boundary(g, bo, out);
    return cmd_patches(g, po, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace ttnet::cli
