#ifndef CONTOPT_DENSITY_FIELD_HPP
#define CONTOPT_DENSITY_FIELD_HPP

#include <cstdint>
#include <vector>

namespace contopt {

enum class Region : std::uint8_t { Design = 0, AlwaysSolid = 1, AlwaysVoid = 2 };

// Per-cell design densities plus the fixed region masks. AlwaysSolid cells
// hold rho = 1 exactly and AlwaysVoid cells rho = 0 exactly; everything else
// stays in [0, 1].
struct DensityField {
  std::vector<double> rho;
  std::vector<Region> region;

  DensityField() = default;
  DensityField(int cell_count, double value);

  int size() const { return static_cast<int>(rho.size()); }

  // Re-clamps rho on fixed-region cells (1 on AlwaysSolid, 0 on AlwaysVoid).
  void enforce_regions();
};

}  // namespace contopt

#endif
