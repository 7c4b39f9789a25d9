#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stunet/errors.hpp"
#include "stunet/model.hpp"
#include "text_util.hpp"

namespace stunet {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'U', 'N'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

class Reader {
 public:
  Reader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    is_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) {
      throw LoadError(path_ + ": truncated while reading " + what);
    }
  }
  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  bool at_end() { return is_.peek() == std::char_traits<char>::eof(); }
  const std::string& path() const { return path_; }

 private:
  std::istream& is_;
  std::string path_;
};

}  // namespace

const std::string* Checkpoint::find(const std::string& key) const {
  for (const auto& [k, v] : extra)
    if (k == key) return &v;
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const STUNet& model,
                     const KeyValues& extra) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw LoadError(path.string() + ": cannot open for writing");
  std::string block;
  for (const auto& [k, v] : model.config().to_pairs()) block += k + "=" + v + "\n";
  for (const auto& [k, v] : extra) block += k + "=" + v + "\n";

  os.write(kMagic, 4);
  put_u32(os, kCheckpointVersion);
  put_u64(os, block.size());
  os.write(block.data(), static_cast<std::streamsize>(block.size()));
  for (const auto& [name, t] : model.parameters()) {
    put_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(os, t.rank());
    for (auto e : t.shape()) put_u64(os, e);
    for (double v : t.values()) put_u64(os, std::bit_cast<std::uint64_t>(v));
  }
  if (!os) throw LoadError(path.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError(path.string() + ": cannot open checkpoint");
  Reader rd(is, path.string());

  char magic[4];
  rd.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw LoadError(rd.path() + ": not a checkpoint (bad magic)");
  const auto version = rd.u32("version");
  if (version != kCheckpointVersion) {
    throw LoadError(rd.path() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto block_size = rd.u64("config length");
  if (block_size > (1u << 24)) throw LoadError(rd.path() + ": implausible config block size");
  std::string block(block_size, '\0');
  rd.bytes(block.data(), block_size, "config block");

  Checkpoint ck;
  std::istringstream lines(block);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LoadError(rd.path() + ": malformed config line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (!ck.config.set(key, value)) ck.extra.emplace_back(key, value);
    } catch (const UsageError& e) {
      throw LoadError(rd.path() + ": " + e.what());
    }
  }

  while (!rd.at_end()) {
    const auto name_len = rd.u64("parameter name length");
    if (name_len > 4096) throw LoadError(rd.path() + ": implausible parameter name length");
    std::string name(name_len, '\0');
    rd.bytes(name.data(), name_len, "parameter name");
    const auto rank = rd.u64("parameter rank");
    if (rank == 0 || rank > 8) throw LoadError(rd.path() + ": bad rank for '" + name + "'");
    Shape shape(rank);
    for (auto& e : shape) {
      e = rd.u64("parameter extent");
      if (e == 0 || e > (1u << 28)) throw LoadError(rd.path() + ": bad extent for '" + name + "'");
    }
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = std::bit_cast<double>(rd.u64("parameter values"));
    ck.parameters.emplace_back(name, Tensor(shape, std::move(values), true));
  }
  return ck;
}

}  // namespace stunet
