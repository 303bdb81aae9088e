#include "contopt/filters.hpp"

#include <algorithm>
#include <cmath>

#include "contopt/projection.hpp"

namespace contopt {

namespace {

struct StencilEntry {
  int di, dj;
  double w;  // r_min - dist
};

std::vector<StencilEntry> cone_stencil(double r_min) {
  std::vector<StencilEntry> st;
  const int r = static_cast<int>(std::ceil(r_min));
  for (int dj = -r; dj <= r; ++dj) {
    for (int di = -r; di <= r; ++di) {
      const double dist = std::sqrt(double(di) * di + double(dj) * dj);
      if (dist < r_min) st.push_back({di, dj, r_min - dist});
    }
  }
  return st;
}

}  // namespace

DensityField density_filter(const DensityField& f, const Grid2D& g, const FilterParams& fp) {
  DensityField out = f;
  if (fp.r_min <= 1.0) {
    out.enforce_regions();
    return out;  // neighborhood reduces to the cell itself
  }
  const auto st = cone_stencil(fp.r_min);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = g.cell_id(i, j);
      if (f.region[c] != Region::Design) continue;
      double wsum = 0.0, acc = 0.0;
      for (const auto& s : st) {
        const int ii = i + s.di, jj = j + s.dj;
        if (!g.cell_in_bounds(ii, jj)) continue;
        wsum += s.w;
        acc += s.w * f.rho[g.cell_id(ii, jj)];
      }
      out.rho[c] = std::clamp(acc / wsum, 0.0, 1.0);
    }
  }
  out.enforce_regions();
  return out;
}

std::vector<double> sensitivity_filter(const std::vector<double>& dG, const DensityField& f,
                                       const Grid2D& g, const FilterParams& fp) {
  std::vector<double> out(dG.size(), 0.0);
  const auto st = cone_stencil(std::max(fp.r_min, 0.0));
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = g.cell_id(i, j);
      double wsum = 0.0, acc = 0.0;
      if (fp.r_min <= 1.0) {
        wsum = std::max(fp.r_min, 1e-300);
        acc = wsum * f.rho[c] * dG[c];
      } else {
        for (const auto& s : st) {
          const int ii = i + s.di, jj = j + s.dj;
          if (!g.cell_in_bounds(ii, jj)) continue;
          const int n = g.cell_id(ii, jj);
          wsum += s.w;
          acc += s.w * f.rho[n] * dG[n];
        }
      }
      out[c] = acc / (std::max(fp.gamma, f.rho[c]) * wsum);
    }
  }
  return out;
}

double volume_fraction(const DensityField& f, double beta) {
  double sum = 0.0;
  long count = 0;
  for (int c = 0; c < f.size(); ++c) {
    if (f.region[c] == Region::AlwaysVoid) continue;
    sum += heaviside(f.rho[c], beta);
    ++count;
  }
  return count > 0 ? sum / double(count) : 0.0;
}

std::vector<double> volume_fraction_grad(const DensityField& f, double beta) {
  std::vector<double> out(f.size(), 0.0);
  long count = 0;
  for (int c = 0; c < f.size(); ++c)
    if (f.region[c] != Region::AlwaysVoid) ++count;
  if (count == 0) return out;
  for (int c = 0; c < f.size(); ++c) {
    if (f.region[c] == Region::AlwaysVoid) continue;
    out[c] = heaviside_deriv(f.rho[c], beta) / double(count);
  }
  return out;
}

DensityField binarize(const DensityField& f, double beta) {
  DensityField out = f;
  for (int c = 0; c < f.size(); ++c)
    out.rho[c] = heaviside(f.rho[c], beta) >= 0.5 ? 1.0 : 0.0;
  out.enforce_regions();
  return out;
}

}  // namespace contopt
