#include "ttnet/tensor_io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "text_reader.hpp"

namespace ttnet {

namespace {

using detail::TextReader;

void write_values(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << v << '\n';
}

void set_precision(std::ostream& out) { out << std::setprecision(17); }

DenseTensor read_dense_body(TextReader& r, const std::string& header_line) {
  auto dims = r.parse_header(header_line, "shape", 0);
  if (dims.empty()) r.fail("shape needs at least one mode size");
  for (auto n : dims)
    if (n == 0) r.fail("mode sizes must be positive");
  Shape shape(dims);
  return DenseTensor(shape, r.values(shape.size()));
}

TTTensor read_tt_body(TextReader& r, const std::string& header_line) {
  const std::size_t d = r.parse_header(header_line, "tt", 1)[0];
  if (d == 0) r.fail("tt order must be positive");
  std::vector<Tensor3> cores;
  for (std::size_t k = 0; k < d; ++k) {
    auto dims = r.header("core", 3);
    for (auto n : dims)
      if (n == 0) r.fail("core dims must be positive");
    cores.emplace_back(dims[0], dims[1], dims[2], r.values(dims[0] * dims[1] * dims[2]));
  }
  try {
    return TTTensor(std::move(cores));
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

CPTensor read_cp_body(TextReader& r, const std::string& header_line) {
  auto head = r.parse_header(header_line, "cp", 2);
  const std::size_t d = head[0], rank = head[1];
  if (d == 0 || rank == 0) r.fail("cp order and rank must be positive");
  std::vector<Matrix> factors;
  for (std::size_t k = 0; k < d; ++k) {
    auto dims = r.header("factor", 2);
    if (dims[0] == 0 || dims[1] != rank) r.fail("factor must be n x " + std::to_string(rank));
    factors.emplace_back(dims[0], dims[1], r.values(dims[0] * dims[1]));
  }
  return CPTensor(std::move(factors));
}

HTTensor read_ht_body(TextReader& r, const std::string& header_line) {
  const std::size_t d = r.parse_header(header_line, "ht", 1)[0];
  if (!is_power_of_two(d)) r.fail("ht order must be a power of two");
  HTTree tree;
  for (std::size_t k = 0; k < d; ++k) {
    auto dims = r.header("leaf", 2);
    if (dims[0] == 0 || dims[1] == 0) r.fail("leaf dims must be positive");
    tree.leaves.emplace_back(dims[0], dims[1], r.values(dims[0] * dims[1]));
  }
  for (std::size_t j = 0; j + 1 < d; ++j) {
    auto dims = r.header("transfer", 3);
    for (auto n : dims)
      if (n == 0) r.fail("transfer dims must be positive");
    tree.transfers.emplace_back(dims[0], dims[1], dims[2], r.values(dims[0] * dims[1] * dims[2]));
  }
  try {
    return HTTensor(std::move(tree));
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

}  // namespace

void write_tensor(std::ostream& out, const DenseTensor& x) {
  set_precision(out);
  out << "shape:";
  for (auto n : x.shape().dims()) out << ' ' << n;
  out << '\n';
  write_values(out, x.data());
}

void write_tensor(std::ostream& out, const TTTensor& x) {
  set_precision(out);
  out << "tt: " << x.order() << '\n';
  for (const auto& c : x.cores()) {
    out << "core: " << c.dim0() << ' ' << c.dim1() << ' ' << c.dim2() << '\n';
    write_values(out, c.data());
  }
}

void write_tensor(std::ostream& out, const CPTensor& x) {
  set_precision(out);
  out << "cp: " << x.order() << ' ' << x.rank() << '\n';
  for (const auto& f : x.factors()) {
    out << "factor: " << f.rows() << ' ' << f.cols() << '\n';
    write_values(out, f.data());
  }
}

void write_tensor(std::ostream& out, const HTTensor& x) {
  set_precision(out);
  out << "ht: " << x.order() << '\n';
  for (const auto& u : x.tree().leaves) {
    out << "leaf: " << u.rows() << ' ' << u.cols() << '\n';
    write_values(out, u.data());
  }
  for (const auto& b : x.tree().transfers) {
    out << "transfer: " << b.dim0() << ' ' << b.dim1() << ' ' << b.dim2() << '\n';
    write_values(out, b.data());
  }
}

void write_tensor(std::ostream& out, const AnyTensor& x) {
  std::visit([&](const auto& t) { write_tensor(out, t); }, x);
}

AnyTensor read_tensor(std::istream& in) {
  TextReader r(in);
  const std::string first = r.require_line("a tensor header");
  const auto words = TextReader::split(first);
  const std::string& key = words.front();
  try {
    if (key == "shape:") return read_dense_body(r, first);
    if (key == "tt:") return read_tt_body(r, first);
    if (key == "cp:") return read_cp_body(r, first);
    if (key == "ht:") return read_ht_body(r, first);
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    r.fail(e.what());
  }
  r.fail("unknown tensor header '" + first + "'");
}

AnyTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return read_tensor(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_tensor(const std::filesystem::path& path, const AnyTensor& x) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_tensor(out, x);
}

DenseTensor to_dense(const AnyTensor& x, std::size_t max_entries) {
  struct Visitor {
    std::size_t cap;
    DenseTensor operator()(const DenseTensor& t) const { return t; }
    DenseTensor operator()(const TTTensor& t) const { return tt_to_dense(t, cap); }
    DenseTensor operator()(const CPTensor& t) const { return cp_to_dense(t, cap); }
    DenseTensor operator()(const HTTensor& t) const { return ht_to_dense(t, cap); }
  };
  return std::visit(Visitor{max_entries}, x);
}

}  // namespace ttnet
