#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cody/common.hpp"
#include "cody/config.hpp"
#include "cody/param.hpp"
#include "cody/rng.hpp"

namespace cody {

/// Single-file archive: versioned header, then named binary sections.
/// Sections hold UTF-8 text (config), named tensors (parameters), raw blobs
/// (optimizer moments, rng streams, env state, replay buffer) and counters.
class CheckpointWriter {
 public:
  explicit CheckpointWriter(const std::string& path) : os_(path, std::ios::binary) {
    check(os_.good(), "checkpoint: cannot open for write: " + path);
    os_.write(kMagic, 8);
    const std::uint32_t version = kVersion;
    os_.write(reinterpret_cast<const char*>(&version), 4);
  }

  void add_text(const std::string& name, const std::string& text) {
    begin_section(name, text.size());
    os_.write(text.data(), static_cast<std::streamsize>(text.size()));
  }

  template <typename S>
  void add_params(const std::string& name, const Params<S>& ps) {
    std::ostringstream tmp(std::ios::binary);
    std::uint64_t count = ps.size();
    tmp.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& p : ps) {
      write_string(tmp, p.name);
      const std::uint64_t rows = static_cast<std::uint64_t>(p.param->value.rows());
      const std::uint64_t cols = static_cast<std::uint64_t>(p.param->value.cols());
      const std::uint32_t ssize = sizeof(S);
      tmp.write(reinterpret_cast<const char*>(&rows), 8);
      tmp.write(reinterpret_cast<const char*>(&cols), 8);
      tmp.write(reinterpret_cast<const char*>(&ssize), 4);
      tmp.write(reinterpret_cast<const char*>(p.param->value.data()),
                static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(p.param->value.size())));
    }
    add_text(name, tmp.str());
  }

  void add_blob(const std::string& name, const std::string& blob) { add_text(name, blob); }

  void add_counters(const std::string& name, const std::map<std::string, std::int64_t>& c) {
    std::ostringstream tmp(std::ios::binary);
    std::uint64_t count = c.size();
    tmp.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& [k, v] : c) {
      write_string(tmp, k);
      tmp.write(reinterpret_cast<const char*>(&v), 8);
    }
    add_text(name, tmp.str());
  }

 private:
  static constexpr const char* kMagic = "CODYCKPT";
  static constexpr std::uint32_t kVersion = 1;

  static void write_string(std::ostream& os, const std::string& s) {
    const std::uint32_t n = static_cast<std::uint32_t>(s.size());
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(s.data(), n);
  }

  void begin_section(const std::string& name, std::size_t payload) {
    write_string(os_, name);
    const std::uint64_t size = payload;
    os_.write(reinterpret_cast<const char*>(&size), 8);
  }

  std::ofstream os_;
};

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    check(is.good(), "checkpoint: cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    check(is.good() && std::memcmp(magic, "CODYCKPT", 8) == 0,
          "checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    check(version == 1, "checkpoint: unsupported version");
    while (true) {
      std::uint32_t n = 0;
      is.read(reinterpret_cast<char*>(&n), 4);
      if (!is.good()) break;
      std::string name(n, '\0');
      is.read(name.data(), n);
      std::uint64_t size = 0;
      is.read(reinterpret_cast<char*>(&size), 8);
      std::string payload(size, '\0');
      is.read(payload.data(), static_cast<std::streamsize>(size));
      check(is.good(), "checkpoint: truncated section " + name);
      sections_[name] = std::move(payload);
    }
  }

  bool has(const std::string& name) const { return sections_.count(name) > 0; }

  const std::string& text(const std::string& name) const {
    auto it = sections_.find(name);
    check(it != sections_.end(), "checkpoint: missing section " + name);
    return it->second;
  }

  /// Restores parameter values into an already-constructed tree; the names
  /// and shapes must match exactly.
  template <typename S>
  void read_params(const std::string& name, const Params<S>& ps) const {
    std::istringstream is(text(name), std::ios::binary);
    std::uint64_t count = 0;
    is.read(reinterpret_cast<char*>(&count), 8);
    check_shape(count == ps.size(), "checkpoint: parameter count mismatch in " + name);
    for (const auto& p : ps) {
      const std::string pname = read_string(is);
      check_shape(pname == p.name, "checkpoint: parameter order mismatch: " + pname);
      std::uint64_t rows = 0, cols = 0;
      std::uint32_t ssize = 0;
      is.read(reinterpret_cast<char*>(&rows), 8);
      is.read(reinterpret_cast<char*>(&cols), 8);
      is.read(reinterpret_cast<char*>(&ssize), 4);
      check_shape(rows == static_cast<std::uint64_t>(p.param->value.rows()) &&
                      cols == static_cast<std::uint64_t>(p.param->value.cols()),
                  "checkpoint: shape mismatch for " + pname);
      check_shape(ssize == sizeof(S), "checkpoint: scalar width mismatch for " + pname);
      is.read(reinterpret_cast<char*>(p.param->value.data()),
              static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(p.param->value.size())));
    }
  }

  std::map<std::string, std::int64_t> read_counters(const std::string& name) const {
    std::istringstream is(text(name), std::ios::binary);
    std::uint64_t count = 0;
    is.read(reinterpret_cast<char*>(&count), 8);
    std::map<std::string, std::int64_t> out;
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::string k = read_string(is);
      std::int64_t v = 0;
      is.read(reinterpret_cast<char*>(&v), 8);
      out[k] = v;
    }
    return out;
  }

 private:
  static std::string read_string(std::istream& is) {
    std::uint32_t n = 0;
    is.read(reinterpret_cast<char*>(&n), 4);
    std::string s(n, '\0');
    is.read(s.data(), n);
    return s;
  }

  std::map<std::string, std::string> sections_;
};

}  // namespace cody
