#ifndef CONTOPT_IO_HPP
#define CONTOPT_IO_HPP

#include <string>
#include <vector>

#include "contopt/contact.hpp"
#include "contopt/density_field.hpp"
#include "contopt/grid.hpp"
#include "contopt/narrowband.hpp"
#include "contopt/types.hpp"

namespace contopt {

// Row-major CSV dump of a per-cell field, one row per grid row from j = 0.
void write_cell_csv(const std::string& path, const Grid2D& g, const std::vector<double>& values);
std::vector<double> read_cell_csv(const std::string& path, const Grid2D& g);

// 8-bit grayscale PNG; value 0 maps to white (void), 1 to black (solid).
// Rows are flipped so the image reads with y up.
void write_density_png(const std::string& path, const Grid2D& g, const std::vector<double>& values);

// Signed field as a red/blue colormap PNG (debug exports).
void write_signed_png(const std::string& path, const Grid2D& g, const std::vector<double>& values);

// Line-segment dump: `v x y` per vertex, `l i j` per edge (1-based).
void write_boundary_txt(const std::string& path, const BoundaryMesh& mesh, const Vec* u = nullptr);

void write_contacts_csv(const std::string& path, const BoundaryMesh& mesh,
                        const std::vector<std::pair<int, std::vector<ContactPair>>>& per_case);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace contopt

#endif
