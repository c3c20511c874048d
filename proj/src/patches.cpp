#include "ttnet/patches.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ttnet {

void PatchConfig::validate() const {
  if (image_height == 0 || image_width == 0 || channels == 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (patch_height == 0 || patch_width == 0) throw std::invalid_argument("patch dimensions must be positive");
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  if (patch_height > image_height || patch_width > image_width) {
    throw std::invalid_argument("patch " + std::to_string(patch_height) + "x" +
                                std::to_string(patch_width) + " does not fit image " +
                                std::to_string(image_height) + "x" + std::to_string(image_width));
  }
  if ((image_height - patch_height) % stride != 0 || (image_width - patch_width) % stride != 0) {
    throw std::invalid_argument("patch " + std::to_string(patch_height) + "x" +
                                std::to_string(patch_width) + " with stride " +
                                std::to_string(stride) + " does not tile image " +
                                std::to_string(image_height) + "x" + std::to_string(image_width));
  }
}

Matrix extract_patches(const Image& image, const PatchConfig& cfg) {
  cfg.validate();
  if (image.height != cfg.image_height || image.width != cfg.image_width ||
      image.channels != cfg.channels) {
    throw std::invalid_argument("image is " + std::to_string(image.height) + "x" +
                                std::to_string(image.width) + "x" + std::to_string(image.channels) +
                                ", config expects " + std::to_string(cfg.image_height) + "x" +
                                std::to_string(cfg.image_width) + "x" + std::to_string(cfg.channels));
  }
  if (image.pixels.size() != image.height * image.width * image.channels) {
    throw std::invalid_argument("image pixel buffer has the wrong length");
  }
  Matrix out(cfg.patch_size(), cfg.num_patches());
  std::size_t col = 0;
  for (std::size_t gr = 0; gr < cfg.grid_rows(); ++gr) {
    for (std::size_t gc = 0; gc < cfg.grid_cols(); ++gc, ++col) {
      const std::size_t top = gr * cfg.stride, left = gc * cfg.stride;
      std::size_t row = 0;
      for (std::size_t ch = 0; ch < cfg.channels; ++ch)
        for (std::size_t y = 0; y < cfg.patch_height; ++y)
          for (std::size_t x = 0; x < cfg.patch_width; ++x) out(row++, col) = image.at(top + y, left + x, ch);
    }
  }
  return out;
}

Matrix patch_sequence(const Image& image, const PatchConfig& cfg) {
  return extract_patches(image, cfg).transposed();
}

namespace {

// Next whitespace-separated PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw FormatError("truncated PGM header");
  return tok;
}

std::size_t pgm_number(std::istream& in) {
  const std::string tok = pgm_token(in);
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(tok, &pos);
    if (pos != tok.size()) throw FormatError("bad PGM header field '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("bad PGM header field '" + tok + "'");
  }
}

Image read_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw FormatError("unsupported PGM magic '" + magic + "'");
  Image img;
  img.width = pgm_number(in);
  img.height = pgm_number(in);
  const std::size_t maxval = pgm_number(in);
  if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 65535) throw FormatError("bad PGM header");
  img.pixels.resize(img.width * img.height);
  for (auto& p : img.pixels) {
    std::size_t v = 0;
    if (magic == "P2") {
      v = pgm_number(in);
    } else if (maxval < 256) {
      char c;
      if (!in.get(c)) throw FormatError("truncated PGM data");
      v = static_cast<unsigned char>(c);
    } else {
      char hi, lo;
      if (!in.get(hi) || !in.get(lo)) throw FormatError("truncated PGM data");
      v = (static_cast<std::size_t>(static_cast<unsigned char>(hi)) << 8) | static_cast<unsigned char>(lo);
    }
    if (v > maxval) throw FormatError("PGM pixel exceeds maxval");
    p = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return img;
}

Image read_csv_image(std::istream& in) {
  Image img;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        img.pixels.push_back(std::stod(cell, &pos));
        if (cell.find_first_not_of(" \t\r", pos) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw FormatError("line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
      }
      ++count;
    }
    if (img.height == 0) img.width = count;
    if (count != img.width) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(img.width) +
                        " values, got " + std::to_string(count));
    }
    ++img.height;
  }
  if (img.height == 0) throw FormatError("empty CSV image");
  return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto ext = path.extension().string();
  try {
    if (ext == ".pgm") return read_pgm(in);
    return read_csv_image(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ttnet
