#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "ttnet/decompositions.hpp"
#include "ttnet/tensor_core.hpp"

namespace ttnet {

// Text interchange formats; grammar in docs/file_formats.md. Values are
// written with 17 significant digits so a write/read cycle is exact.

using AnyTensor = std::variant<DenseTensor, TTTensor, CPTensor, HTTensor>;

void write_tensor(std::ostream& out, const DenseTensor& x);
void write_tensor(std::ostream& out, const TTTensor& x);
void write_tensor(std::ostream& out, const CPTensor& x);
void write_tensor(std::ostream& out, const HTTensor& x);
void write_tensor(std::ostream& out, const AnyTensor& x);

/// Dispatches on the first header keyword (shape:, tt:, cp:, ht:).
/// Throws FormatError with the offending line number.
AnyTensor read_tensor(std::istream& in);

AnyTensor load_tensor(const std::filesystem::path& path);
void save_tensor(const std::filesystem::path& path, const AnyTensor& x);

DenseTensor to_dense(const AnyTensor& x, std::size_t max_entries = kDenseCap);

}  // namespace ttnet
