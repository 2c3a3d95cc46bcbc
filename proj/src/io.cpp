#include "tecd/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>

namespace tecd {

namespace {

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Mat& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      append_g17(out, m(r, c));
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << out;
}

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger) {
  std::string out;
  for (std::size_t c = 0; c < ledger.columns.size(); ++c) {
    if (c) out += ',';
    out += ledger.columns[c];
  }
  out += '\n';
  for (const Vec& row : ledger.rows) {
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      append_g17(out, row(c));
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << out;
}

void write_snapshot(const std::string& path_base, const Grid& g, const Field& f,
                    const std::string& side_label) {
  {
    std::ofstream bin(path_base + ".bin", std::ios::binary);
    if (!bin) throw ConfigError("cannot write " + path_base + ".bin");
    // x1-major point order, all components per point
    for (int q = 0; q < g.npoints(); ++q) {
      const Vec col = f.m.col(q);
      bin.write(reinterpret_cast<const char*>(col.data()),
                static_cast<std::streamsize>(sizeof(double) * col.size()));
    }
  }
  nlohmann::json side;
  std::vector<int> shape;
  shape.push_back(g.nx1());
  shape.push_back(g.ntan);
  if (g.d == 3) shape.push_back(g.ntan);
  shape.push_back(f.ncomp());
  side["shape"] = shape;
  side["order"] = "x1-major";
  side["endianness"] = "little";
  side["dtype"] = "float64";
  side["side"] = side_label;
  side["x1max"] = g.x1max;
  std::ofstream js(path_base + ".json", std::ios::binary);
  if (!js) throw ConfigError("cannot write " + path_base + ".json");
  js << side.dump(2) << "\n";
}

void write_residual_slices_csv(
    const std::string& path, const Grid& g, double t,
    const std::vector<std::pair<std::string, const ScalarField*>>& fields) {
  std::string out = g.d == 2 ? "t,x1,x2,residual,value\n" : "t,x1,x2,x3,residual,value\n";
  for (const auto& [name, f] : fields)
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it) {
        append_g17(out, t);
        out += ',';
        append_g17(out, g.x1(i1));
        out += ',';
        append_g17(out, g.x2(it));
        out += ',';
        if (g.d == 3) {
          append_g17(out, g.x3(it));
          out += ',';
        }
        out += name;
        out += ',';
        append_g17(out, (*f)(g.pid(i1, it)));
        out += '\n';
      }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << out;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace tecd
