#include "ttnet/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "text_reader.hpp"

namespace ttnet {

namespace {

using detail::TextReader;

void write_values(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << v << '\n';
}

void write_core(std::ostream& out, const char* keyword, const Tensor3& t) {
  out << keyword << ": " << t.dim0() << ' ' << t.dim1() << ' ' << t.dim2() << '\n';
  write_values(out, t.data());
}

void write_matrix(std::ostream& out, const char* keyword, const Matrix& m) {
  out << keyword << ": " << m.rows() << ' ' << m.cols() << '\n';
  write_values(out, m.data());
}

// "keyword: word" lines.
std::string word_field(TextReader& r, const std::string& keyword) {
  const std::string line = r.require_line(keyword + ":");
  const auto words = TextReader::split(line);
  if (words.size() != 2 || words[0] != keyword + ":") r.fail("expected '" + keyword + ": <value>', got '" + line + "'");
  return words[1];
}

Tensor3 read_core(TextReader& r, const char* keyword) {
  auto dims = r.header(keyword, 3);
  for (auto n : dims)
    if (n == 0) r.fail(std::string(keyword) + " dims must be positive");
  return Tensor3(dims[0], dims[1], dims[2], r.values(dims[0] * dims[1] * dims[2]));
}

Matrix read_matrix(TextReader& r, const char* keyword) {
  auto dims = r.header(keyword, 2);
  if (dims[0] == 0 || dims[1] == 0) r.fail(std::string(keyword) + " dims must be positive");
  return Matrix(dims[0], dims[1], r.values(dims[0] * dims[1]));
}

}  // namespace

void save_checkpoint(std::ostream& out, const ScoreNetwork& net) {
  const auto old_precision = out.precision(17);
  const FeatureMap& fm = net.feature_map();
  out << kCheckpointMagic << '\n';
  out << "format: " << to_string(net.format()) << '\n';
  out << "activation: " << to_string(fm.activation()) << '\n';
  out << "order:";
  for (std::size_t k : net.input_order()) out << ' ' << k;
  out << '\n';
  write_matrix(out, "weight", fm.weight());
  out << "bias: " << fm.bias().size() << '\n';
  write_values(out, fm.bias());
  std::visit(
      [&](const auto& w) {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, TTWeights>) {
          out << "chains: " << w.chains.size() << '\n';
          for (const auto& chain : w.chains) {
            out << "chain: " << chain.size() << '\n';
            for (const auto& core : chain) write_core(out, "core", core);
          }
        } else if constexpr (std::is_same_v<W, CPWeights>) {
          out << "chains: " << w.chains.size() << '\n';
          for (const auto& chain : w.chains) {
            out << "chain: " << chain.factors.size() << '\n';
            for (const auto& f : chain.factors) write_matrix(out, "factor", f);
            write_core(out, "head", chain.head);
          }
        } else {
          out << "chains: " << w.trees.size() << '\n';
          for (const auto& tree : w.trees) {
            out << "chain: " << tree.order() << '\n';
            for (const auto& u : tree.leaves) write_matrix(out, "leaf", u);
            for (const auto& b : tree.transfers) write_core(out, "transfer", b);
          }
        }
      },
      net.weights());
  out.precision(old_precision);
  if (!out) throw std::runtime_error("failed to write checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const ScoreNetwork& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_checkpoint(out, net);
}

ScoreNetwork load_checkpoint(std::istream& in) {
  TextReader r(in);
  if (r.require_line("checkpoint header") != kCheckpointMagic) {
    r.fail(std::string("not a checkpoint file (expected '") + kCheckpointMagic + "')");
  }
  try {
    const Format format = parse_format(word_field(r, "format"));
    const Activation activation = parse_activation(word_field(r, "activation"));
    const std::vector<std::size_t> order = r.parse_header(r.require_line("order:"), "order", 0);
    Matrix weight = read_matrix(r, "weight");
    const std::size_t nb = r.header("bias", 1)[0];
    std::vector<double> bias = r.values(nb);
    FeatureMap fm(std::move(weight), std::move(bias), activation);

    const std::size_t num_chains = r.header("chains", 1)[0];
    if (num_chains == 0) r.fail("checkpoint needs at least one chain");
    NetworkWeights weights;
    if (format == Format::tt) {
      TTWeights w;
      for (std::size_t c = 0; c < num_chains; ++c) {
        const std::size_t len = r.header("chain", 1)[0];
        std::vector<Tensor3> chain;
        for (std::size_t k = 0; k < len; ++k) chain.push_back(read_core(r, "core"));
        w.chains.push_back(std::move(chain));
      }
      weights = std::move(w);
    } else if (format == Format::cp) {
      CPWeights w;
      for (std::size_t c = 0; c < num_chains; ++c) {
        const std::size_t len = r.header("chain", 1)[0];
        CPChain chain;
        for (std::size_t k = 0; k < len; ++k) chain.factors.push_back(read_matrix(r, "factor"));
        chain.head = read_core(r, "head");
        w.chains.push_back(std::move(chain));
      }
      weights = std::move(w);
    } else {
      HTWeights w;
      for (std::size_t c = 0; c < num_chains; ++c) {
        const std::size_t len = r.header("chain", 1)[0];
        if (!is_power_of_two(len)) r.fail("tree length must be a power of two");
        HTTree tree;
        for (std::size_t k = 0; k < len; ++k) tree.leaves.push_back(read_matrix(r, "leaf"));
        for (std::size_t j = 0; j + 1 < len; ++j) tree.transfers.push_back(read_core(r, "transfer"));
        w.trees.push_back(std::move(tree));
      }
      weights = std::move(w);
    }
    std::string extra;
    if (r.next(extra)) r.fail("unexpected trailing content '" + extra + "'");
    return ScoreNetwork(std::move(fm), std::move(weights), order);
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

ScoreNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return load_checkpoint(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ttnet
