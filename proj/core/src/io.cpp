#include "contopt/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace contopt {

namespace {

void fail_io(const std::string& what, const std::string& path) {
  throw std::runtime_error(what + ": " + path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void push_be32(std::string& s, std::uint32_t v) {
  s.push_back(char((v >> 24) & 0xff));
  s.push_back(char((v >> 16) & 0xff));
  s.push_back(char((v >> 8) & 0xff));
  s.push_back(char(v & 0xff));
}

void push_chunk(std::string& out, const char type[4], const std::string& data) {
  push_be32(out, std::uint32_t(data.size()));
  const std::size_t type_at = out.size();
  out.append(type, 4);
  out.append(data);
  const auto* p = reinterpret_cast<const Bytef*>(out.data() + type_at);
  const uLong crc = crc32(0L, p, uInt(4 + data.size()));
  push_be32(out, std::uint32_t(crc));
}

void write_gray_png(const std::string& path, int w, int h, const std::vector<unsigned char>& gray) {
  std::string raw;
  raw.reserve(std::size_t(h) * (w + 1));
  for (int row = 0; row < h; ++row) {
    raw.push_back('\0');  // filter type 0
    raw.append(reinterpret_cast<const char*>(gray.data() + std::size_t(row) * w), w);
  }
  uLongf bound = compressBound(uLong(raw.size()));
  std::vector<Bytef> compressed(bound);
  if (compress2(compressed.data(), &bound, reinterpret_cast<const Bytef*>(raw.data()),
                uLong(raw.size()), 6) != Z_OK)
    fail_io("png compression failed", path);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  push_be32(ihdr, std::uint32_t(w));
  push_be32(ihdr, std::uint32_t(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  push_chunk(png, "IHDR", ihdr);
  push_chunk(png, "IDAT", std::string(reinterpret_cast<char*>(compressed.data()), bound));
  push_chunk(png, "IEND", "");

  std::ofstream f(path, std::ios::binary);
  if (!f) fail_io("cannot open for writing", path);
  f.write(png.data(), std::streamsize(png.size()));
}

void write_rgb_png(const std::string& path, int w, int h, const std::vector<unsigned char>& rgb) {
  std::string raw;
  raw.reserve(std::size_t(h) * (3 * w + 1));
  for (int row = 0; row < h; ++row) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(rgb.data() + std::size_t(row) * 3 * w), 3 * w);
  }
  uLongf bound = compressBound(uLong(raw.size()));
  std::vector<Bytef> compressed(bound);
  if (compress2(compressed.data(), &bound, reinterpret_cast<const Bytef*>(raw.data()),
                uLong(raw.size()), 6) != Z_OK)
    fail_io("png compression failed", path);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  push_be32(ihdr, std::uint32_t(w));
  push_be32(ihdr, std::uint32_t(h));
  ihdr.push_back(8);
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  push_chunk(png, "IHDR", ihdr);
  push_chunk(png, "IDAT", std::string(reinterpret_cast<char*>(compressed.data()), bound));
  push_chunk(png, "IEND", "");

  std::ofstream f(path, std::ios::binary);
  if (!f) fail_io("cannot open for writing", path);
  f.write(png.data(), std::streamsize(png.size()));
}

}  // namespace

void write_cell_csv(const std::string& path, const Grid2D& g, const std::vector<double>& values) {
  std::ofstream f(path);
  if (!f) fail_io("cannot open for writing", path);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) f << ',';
      f << format_double(values[g.cell_id(i, j)]);
    }
    f << '\n';
  }
}

std::vector<double> read_cell_csv(const std::string& path, const Grid2D& g) {
  std::ifstream f(path);
  if (!f) fail_io("cannot open for reading", path);
  std::vector<double> values(g.cell_count(), 0.0);
  std::string line;
  for (int j = 0; j < g.ny; ++j) {
    if (!std::getline(f, line)) fail_io("unexpected end of file", path);
    std::istringstream ls(line);
    std::string tok;
    for (int i = 0; i < g.nx; ++i) {
      if (!std::getline(ls, tok, ',')) fail_io("row too short", path);
      values[g.cell_id(i, j)] = std::stod(tok);
    }
  }
  return values;
}

void write_density_png(const std::string& path, const Grid2D& g, const std::vector<double>& values) {
  std::vector<unsigned char> gray(std::size_t(g.nx) * g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = std::clamp(values[g.cell_id(i, j)], 0.0, 1.0);
      gray[std::size_t(g.ny - 1 - j) * g.nx + i] =
          static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)));
    }
  write_gray_png(path, g.nx, g.ny, gray);
}

void write_signed_png(const std::string& path, const Grid2D& g, const std::vector<double>& values) {
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;
  std::vector<unsigned char> rgb(std::size_t(g.nx) * g.ny * 3);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double t = values[g.cell_id(i, j)] / vmax;  // [-1, 1]
      const std::size_t at = (std::size_t(g.ny - 1 - j) * g.nx + i) * 3;
      const double mag = std::abs(t);
      const unsigned char off = static_cast<unsigned char>(std::lround(255.0 * (1.0 - mag)));
      if (t >= 0.0) {
        rgb[at] = 255;
        rgb[at + 1] = off;
        rgb[at + 2] = off;
      } else {
        rgb[at] = off;
        rgb[at + 1] = off;
        rgb[at + 2] = 255;
      }
    }
  write_rgb_png(path, g.nx, g.ny, rgb);
}

void write_boundary_txt(const std::string& path, const BoundaryMesh& mesh, const Vec* u) {
  std::ofstream f(path);
  if (!f) fail_io("cannot open for writing", path);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    Vec2 p = mesh.rest_positions[v];
    if (u) p += u->segment<2>(2 * mesh.vertex_nodes[v]);
    f << "v " << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  }
  for (const auto& e : mesh.edges) f << "l " << e[0] + 1 << ' ' << e[1] + 1 << '\n';
}

void write_contacts_csv(const std::string& path, const BoundaryMesh& mesh,
                        const std::vector<std::pair<int, std::vector<ContactPair>>>& per_case) {
  std::ofstream f(path);
  if (!f) fail_io("cannot open for writing", path);
  f << "case,kind,p,y,z,distance\n";
  for (const auto& [load_case, pairs] : per_case) {
    for (const auto& pr : pairs) {
      const int ny = mesh.vertex_nodes[mesh.edges[pr.edge][0]];
      const int nz = mesh.vertex_nodes[mesh.edges[pr.edge][1]];
      f << load_case << ',' << (pr.kind == PairKind::PP ? "PP" : "PL") << ','
        << mesh.vertex_nodes[pr.p] << ',' << ny << ',' << nz << ',' << format_double(pr.d) << '\n';
    }
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) fail_io("cannot open for writing", path);
  f << content;
}

}  // namespace contopt
