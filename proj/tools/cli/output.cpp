#include "output.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace cmilab::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string num(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { add(std::move(header)); rows_ = 0; }

void Csv::add(std::vector<std::string> fields) {
  if (fields.size() != width_) throw std::logic_error("Csv: row width does not match header");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string& f = fields[i];
    if (i) body_ += ',';
    if (f.find_first_of(",\"\n") == std::string::npos) {
      body_ += f;
    } else {
      body_ += '"';
      for (char c : f) body_ += c == '"' ? std::string("\"\"") : std::string(1, c);
      body_ += '"';
    }
  }
  body_ += '\n';
  ++rows_;
}

std::string Csv::str() const { return body_; }

void Artifacts::add(std::string name, std::string contents) { files_.emplace_back(std::move(name), std::move(contents)); }

void Artifacts::commit(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, contents] : files_) write_atomically(dir / name, contents);
}

nlohmann::json Artifacts::checksums() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [name, contents] : files_)
    out.push_back({{"file", name}, {"bytes", contents.size()}, {"fnv1a64", hex64(fnv1a64(contents))}});
  return out;
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".partial";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    os.flush();
    if (!os) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cmilab::cli
