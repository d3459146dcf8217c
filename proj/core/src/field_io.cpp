#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "amlab/errors.hpp"
#include "amlab/grid.hpp"

namespace amlab {

namespace {
constexpr char kMagic[4] = {'A', 'M', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
}  // namespace

void write_csv(const GridField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: stable line endings
  if (!out) throw input_error("write_csv: cannot open " + path);
  const Grid& g = *field.grid();
  for (int d = 0; d < g.dim(); ++d) out << "i" << d << ",";
  out << "value\n";
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    for (int d = 0; d < g.dim(); ++d) out << idx[d] << ",";
    out << shortest(field.values()[i]) << "\n";
  });
}

// Layout (little-endian): magic "AMLF", u32 version, u32 dim, then per axis
// u64 count, f64 lo, f64 hi; then node values row-major (last axis fastest).
void write_binary(const GridField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("write_binary: cannot open " + path);
  const Grid& g = *field.grid();
  out.write(kMagic, 4);
  auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };
  auto put64 = [&](std::uint64_t v) { out.write(reinterpret_cast<char*>(&v), 8); };
  auto putf = [&](double v) { out.write(reinterpret_cast<char*>(&v), 8); };
  put32(kVersion);
  put32(static_cast<std::uint32_t>(g.dim()));
  for (int d = 0; d < g.dim(); ++d) {
    put64(static_cast<std::uint64_t>(g.counts()[d]));
    putf(g.lo()[d]);
    putf(g.hi()[d]);
  }
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

GridField read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("read_binary: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw input_error("read_binary: bad magic in " + path);
  auto get32 = [&] {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get64 = [&] {
    std::uint64_t v;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto getf = [&] {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  if (get32() != kVersion) throw input_error("read_binary: unsupported version");
  const int n = static_cast<int>(get32());
  if (n < 1 || n > 3) throw input_error("read_binary: bad dimension");
  Eigen::VectorXd lo(n), hi(n);
  std::vector<int> counts(n);
  for (int d = 0; d < n; ++d) {
    counts[d] = static_cast<int>(get64());
    lo[d] = getf();
    hi[d] = getf();
  }
  auto grid = Grid::build(lo, hi, counts);
  std::vector<double> values(grid->node_count());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw input_error("read_binary: truncated file " + path);
  return GridField(grid, std::move(values));
}

}  // namespace amlab
