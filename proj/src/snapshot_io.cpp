#include "cylnls/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cylnls/errors.hpp"

namespace cylnls {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

void save_snapshot(const std::filesystem::path& path, const SpectralField& field, double time) {
  const Grid& g = field.grid();
  nlohmann::json header = {
      {"format", kSnapshotFormat},
      {"version", kSnapshotVersion},
      {"normalization", kNormalizationTag},
      {"order", "eta-outer-xi-inner"},
      {"storage", "centered"},
      {"lx", g.lx()},
      {"nx", g.nx()},
      {"ny", g.ny()},
      {"time", time},
  };
  std::string bytes = header.dump();
  bytes.push_back('\n');
  const std::size_t payload = field.data().size() * sizeof(Complex);
  const std::size_t offset = bytes.size();
  bytes.resize(offset + payload);
  std::memcpy(bytes.data() + offset, field.data().data(), payload);
  write_file_atomic(path, bytes);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto eol = bytes.find('\n');
  if (eol == std::string::npos) throw IoError("snapshot " + path.string() + ": missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, eol));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("snapshot " + path.string() + ": bad header: " + e.what());
  }
  if (header.value("format", "") != kSnapshotFormat) {
    throw IoError("snapshot " + path.string() + ": not a cylnls snapshot");
  }
  if (header.value("normalization", "") != kNormalizationTag) {
    throw IoError("snapshot " + path.string() + ": unsupported normalization tag '" +
                  header.value("normalization", "") + "'");
  }
  const Grid g(header.at("lx").get<double>(), header.at("nx").get<int>(), header.at("ny").get<int>());
  const std::size_t payload = g.size() * sizeof(Complex);
  if (bytes.size() - eol - 1 != payload) {
    throw IoError("snapshot " + path.string() + ": payload size does not match grid");
  }
  std::vector<Complex> coeffs(g.size());
  std::memcpy(coeffs.data(), bytes.data() + eol + 1, payload);
  return Snapshot{SpectralField(g, std::move(coeffs)), header.value("time", 0.0)};
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) {
    ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return ss.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace cylnls
