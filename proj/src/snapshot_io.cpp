#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "axisym/errors.hpp"
#include "axisym/field.hpp"

namespace axisym {

namespace {

constexpr char kMagic[4] = {'A', 'X', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t tag_code(Quantity q) { return static_cast<std::uint32_t>(q); }

Quantity tag_from_code(std::uint32_t c) {
  if (c > static_cast<std::uint32_t>(Quantity::generic))
    throw std::runtime_error("snapshot: unknown quantity code");
  return static_cast<Quantity>(c);
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void get(std::istream& is, T& v) {
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("snapshot: truncated header");
}

}  // namespace

void write_snapshot_binary(const std::filesystem::path& path, const ScalarField& f, double time) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("snapshot: cannot open " + path.string());
  const Grid& g = f.grid();
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<std::int32_t>(g.nr()));
  put(os, static_cast<std::int32_t>(g.nz()));
  put(os, g.r_max());
  put(os, g.z_max());
  put(os, tag_code(f.tag()));
  put(os, time);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!os) throw std::runtime_error("snapshot: write failed for " + path.string());
}

std::pair<ScalarField, double> read_snapshot_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("snapshot: bad magic in " + path.string());
  std::uint32_t version = 0, tag = 0;
  std::int32_t nr = 0, nz = 0;
  double r_max = 0, z_max = 0, time = 0;
  get(is, version);
  if (version != kVersion) throw std::runtime_error("snapshot: unsupported version");
  get(is, nr);
  get(is, nz);
  get(is, r_max);
  get(is, z_max);
  get(is, tag);
  get(is, time);
  ScalarField f(Grid(nr, nz, r_max, z_max), tag_from_code(tag));
  if (!is.read(reinterpret_cast<char*>(f.values().data()),
               static_cast<std::streamsize>(f.values().size() * sizeof(double))))
    throw std::runtime_error("snapshot: truncated data in " + path.string());
  return {std::move(f), time};
}

void write_snapshot_text(const std::filesystem::path& path, const ScalarField& f, double time) {
  std::FILE* fp = std::fopen(path.string().c_str(), "w");
  if (!fp) throw std::runtime_error("snapshot: cannot open " + path.string());
  const Grid& g = f.grid();
  std::fprintf(fp, "AXSF %u\n%d %d %.17g %.17g %s %.17g\n", kVersion, g.nr(), g.nz(), g.r_max(),
               g.z_max(), to_string(f.tag()), time);
  for (int i = 0; i < g.nr(); ++i) {
    for (int k = 0; k < g.nz(); ++k) std::fprintf(fp, k ? " %.17g" : "%.17g", f(i, k));
    std::fputc('\n', fp);
  }
  const bool ok = std::ferror(fp) == 0;
  std::fclose(fp);
  if (!ok) throw std::runtime_error("snapshot: write failed for " + path.string());
}

std::pair<ScalarField, double> read_snapshot_text(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("snapshot: cannot open " + path.string());
  std::string magic, tag;
  unsigned version = 0;
  int nr = 0, nz = 0;
  std::string rs, zs, ts;
  is >> magic >> version >> nr >> nz >> rs >> zs >> tag >> ts;
  if (!is || magic != "AXSF" || version != kVersion)
    throw std::runtime_error("snapshot: bad text header in " + path.string());
  ScalarField f(Grid(nr, nz, std::strtod(rs.c_str(), nullptr), std::strtod(zs.c_str(), nullptr)),
                quantity_from_string(tag));
  std::string token;
  for (double& v : f.values()) {
    if (!(is >> token)) throw std::runtime_error("snapshot: truncated data in " + path.string());
    v = std::strtod(token.c_str(), nullptr);
  }
  return {std::move(f), std::strtod(ts.c_str(), nullptr)};
}

}  // namespace axisym
