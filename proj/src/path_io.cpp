#include "roughhedge/path_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "roughhedge/error.hpp"

namespace roughhedge {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic{'R', 'H', 'P', 'A', 'T', 'H', 'S', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& file) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), ErrorKind::Io, "truncated path cache " + file.string());
  return v;
}

struct Field {
  const char* name;
  std::vector<double> PathSet::*data;
};

constexpr std::array<Field, 6> kFields{{{"S", &PathSet::S},
                                        {"V", &PathSet::V},
                                        {"FV", &PathSet::FV},
                                        {"dW", &PathSet::dW},
                                        {"dB", &PathSet::dB},
                                        {"payoff", &PathSet::payoff}}};

}  // namespace

void write_paths(const PathSet& paths, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + file.string());
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(paths.source));
  put<std::uint64_t>(os, paths.n_paths);
  put<std::uint64_t>(os, paths.n_steps);
  put<std::uint32_t>(os, kFields.size());
  for (const auto& f : kFields) {
    const std::uint32_t len = std::strlen(f.name);
    put(os, len);
    os.write(f.name, len);
  }
  auto write_array = [&](const std::vector<double>& v) {
    put<std::uint64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  write_array(paths.grid);
  for (const auto& f : kFields) write_array(paths.*(f.data));
  require(static_cast<bool>(os), ErrorKind::Io, "write failed for " + file.string());
}

PathSet read_paths(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + file.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  require(static_cast<bool>(is) && magic == kMagic, ErrorKind::Io,
          file.string() + " is not a path cache");
  const auto version = get<std::uint32_t>(is, file);
  require(version == kVersion, ErrorKind::Io,
          "unsupported path cache version " + std::to_string(version));
  const auto source = get<std::uint32_t>(is, file);
  require(source <= static_cast<std::uint32_t>(PathSource::External), ErrorKind::Io,
          "bad path source tag");
  const auto n_paths = get<std::uint64_t>(is, file);
  const auto n_steps = get<std::uint64_t>(is, file);
  require(n_steps >= 1 && n_steps < (1u << 24) && n_paths < (1ull << 32), ErrorKind::Io,
          "implausible path cache dimensions");
  const auto n_fields = get<std::uint32_t>(is, file);
  require(n_fields == kFields.size(), ErrorKind::Io, "unexpected field count");

  PathSet ps(n_paths, n_steps);
  ps.source = static_cast<PathSource>(source);
  ps.grid.resize(n_steps + 1);
  for (const auto& f : kFields) {
    const auto len = get<std::uint32_t>(is, file);
    require(len < 64, ErrorKind::Io, "bad field name");
    std::string name(len, '\0');
    is.read(name.data(), len);
    require(name == f.name, ErrorKind::Io, "unexpected field '" + name + "'");
  }
  auto read_array = [&](std::vector<double>& v) {
    const auto count = get<std::uint64_t>(is, file);
    require(count == v.size() || (count == 0 && &v == &ps.payoff) ||
                (&v == &ps.payoff && count == n_paths),
            ErrorKind::Io, "array length mismatch in " + file.string());
    v.resize(count);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    require(static_cast<bool>(is), ErrorKind::Io, "truncated path cache " + file.string());
  };
  read_array(ps.grid);
  for (const auto& f : kFields) read_array(ps.*(f.data));
  return ps;
}

void write_paths_csv(const PathSet& paths, const std::filesystem::path& file) {
  std::ofstream os(file);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + file.string());
  os.precision(17);
  os << "path_id,step,t,S,V,FV\n";
  for (std::size_t p = 0; p < paths.n_paths; ++p) {
    for (std::size_t k = 0; k <= paths.n_steps; ++k) {
      os << p << ',' << k << ',' << paths.grid[k] << ',' << paths.s(p, k) << ','
         << paths.v(p, k) << ',' << paths.fv(p, k) << '\n';
    }
  }
}

}  // namespace roughhedge
