#pragma once

#include <filesystem>
#include <iosfwd>

#include "ttnet/networks.hpp"

namespace ttnet {

/// First line of every checkpoint file.
inline constexpr const char* kCheckpointMagic = "ttnet-checkpoint 1";

/// Text checkpoint: feature map, activation, input order, then the chains of
/// the weight decomposition. Values round-trip exactly (17 significant digits).
void save_checkpoint(std::ostream& out, const ScoreNetwork& net);
void save_checkpoint(const std::filesystem::path& path, const ScoreNetwork& net);

/// Throws FormatError on malformed input, std::runtime_error on I/O failure.
ScoreNetwork load_checkpoint(std::istream& in);
ScoreNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace ttnet
