#include "contopt/density_field.hpp"

namespace contopt {

DensityField::DensityField(int cell_count, double value)
    : rho(cell_count, value), region(cell_count, Region::Design) {}

void DensityField::enforce_regions() {
  for (std::size_t c = 0; c < rho.size(); ++c) {
    if (region[c] == Region::AlwaysSolid) rho[c] = 1.0;
    else if (region[c] == Region::AlwaysVoid) rho[c] = 0.0;
  }
}

}  // namespace contopt
