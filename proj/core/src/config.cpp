#include "contopt/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "contopt/errors.hpp"

namespace contopt {

namespace {

struct Cursor {
  std::string file;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << file << ':' << line << ": " << msg;
    throw ConfigError(os.str());
  }
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const Cursor& c, const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    c.fail("invalid number '" + v + "' for " + key);
  }
}

int parse_int(const Cursor& c, const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    c.fail("invalid integer '" + v + "' for " + key);
  }
}

bool parse_bool(const Cursor& c, const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  c.fail("invalid boolean '" + v + "' for " + key);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

OptimizationConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scene file: " + path);

  OptimizationConfig cfg;
  int nx = -1, ny = -1;
  double h = -1.0, ox = 0.0, oy = 0.0;
  Cursor cur{path, 0};
  std::string section;
  std::string raw;

  const std::set<std::string> known_sections = {
      "grid",      "material", "projection", "filter", "narrowband",   "contact",
      "friction",  "strain_limit", "solver", "mma",    "optimization", "regions",
      "dirichlet", "loads",    "objective"};

  auto parse_case = [&](const std::string& tok) {
    if (tok == "*") return -1;
    return parse_int(cur, tok, "load case");
  };

  while (std::getline(f, raw)) {
    ++cur.line;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') cur.fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_sections.count(section)) cur.fail("unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) cur.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty()) cur.fail("key outside any section");

    auto unknown = [&]() { cur.fail("unknown key '" + key + "' in [" + section + "]"); };

    if (section == "grid") {
      if (key == "nx") nx = parse_int(cur, val, key);
      else if (key == "ny") ny = parse_int(cur, val, key);
      else if (key == "h") h = parse_double(cur, val, key);
      else if (key == "origin_x") ox = parse_double(cur, val, key);
      else if (key == "origin_y") oy = parse_double(cur, val, key);
      else unknown();
    } else if (section == "material") {
      if (key == "E0") cfg.E0 = parse_double(cur, val, key);
      else if (key == "nu") cfg.nu = parse_double(cur, val, key);
      else if (key == "plane") {
        if (val != "strain" && val != "stress") cur.fail("plane must be 'strain' or 'stress'");
        cfg.plane = val;
      } else unknown();
    } else if (section == "projection") {
      if (key == "beta") cfg.projection.beta = parse_double(cur, val, key);
      else if (key == "beta_growth") cfg.beta_growth = parse_double(cur, val, key);
      else if (key == "beta_growth_every") cfg.beta_growth_every = parse_int(cur, val, key);
      else if (key == "beta_max") cfg.beta_max = parse_double(cur, val, key);
      else unknown();
    } else if (section == "filter") {
      if (key == "r_min") cfg.filter.r_min = parse_double(cur, val, key);
      else if (key == "gamma") cfg.filter.gamma = parse_double(cur, val, key);
      else unknown();
    } else if (section == "narrowband") {
      if (key == "eta") cfg.eta = parse_double(cur, val, key);
      else if (key == "seed") {
        const auto t = split_ws(val);
        if (t.size() != 4) cur.fail("seed expects 'i0 j0 i1 j1'");
        cfg.seeds.push_back({parse_int(cur, t[0], key), parse_int(cur, t[1], key),
                             parse_int(cur, t[2], key), parse_int(cur, t[3], key)});
      } else unknown();
    } else if (section == "contact") {
      if (key == "dhat_over_h") cfg.dhat_over_h = parse_double(cur, val, key);
      else if (key == "kappa") cfg.kappa = (val == "auto") ? -1.0 : parse_double(cur, val, key);
      else unknown();
    } else if (section == "friction") {
      if (key == "mu") cfg.friction.mu = parse_double(cur, val, key);
      else if (key == "eps_v") cfg.friction.eps_v = parse_double(cur, val, key);
      else if (key == "steps") cfg.friction.N = parse_int(cur, val, key);
      else if (key == "horizon") cfg.friction.T = parse_double(cur, val, key);
      else unknown();
    } else if (section == "strain_limit") {
      if (key == "enabled") cfg.strain_limit_enabled = parse_bool(cur, val, key);
      else if (key == "s_hat") cfg.strain_limit.s_hat = parse_double(cur, val, key);
      else if (key == "s_bar") cfg.strain_limit.s_bar = parse_double(cur, val, key);
      else if (key == "p_hat") cfg.strain_limit.p_hat = parse_double(cur, val, key);
      else if (key == "p_bar") cfg.strain_limit.p_bar = parse_double(cur, val, key);
      else if (key == "rho_bar") cfg.strain_limit.rho_bar = parse_double(cur, val, key);
      else unknown();
    } else if (section == "solver") {
      if (key == "newton_tol") cfg.newton_tol = parse_double(cur, val, key);
      else if (key == "max_newton_iters") cfg.max_newton_iters = parse_int(cur, val, key);
      else if (key == "armijo_c") cfg.armijo_c = parse_double(cur, val, key);
      else if (key == "shrink") cfg.shrink = parse_double(cur, val, key);
      else unknown();
    } else if (section == "mma") {
      if (key == "move_limit") cfg.mma.move_limit = parse_double(cur, val, key);
      else if (key == "asym_init") cfg.mma.asym_init = parse_double(cur, val, key);
      else if (key == "asym_shrink") cfg.mma.asym_shrink = parse_double(cur, val, key);
      else if (key == "asym_grow") cfg.mma.asym_grow = parse_double(cur, val, key);
      else unknown();
    } else if (section == "optimization") {
      if (key == "objective") {
        if (val == "compliance") cfg.objective = ObjectiveKind::Compliance;
        else if (val == "max_compliance") cfg.objective = ObjectiveKind::MaxCompliance;
        else if (val == "reaction_minmax") cfg.objective = ObjectiveKind::ReactionMinMax;
        else cur.fail("objective must be compliance, max_compliance, or reaction_minmax");
      } else if (key == "volume_fraction") cfg.vhat = parse_double(cur, val, key);
      else if (key == "max_iters") cfg.max_iters = parse_int(cur, val, key);
      else if (key == "stagnation_tol") cfg.stagnation_tol = parse_double(cur, val, key);
      else if (key == "stagnation_iters") cfg.stagnation_iters = parse_int(cur, val, key);
      else if (key == "dirichlet_ramp_steps") cfg.dirichlet_ramp_steps = parse_int(cur, val, key);
      else if (key == "design_rho0") cfg.design_rho0 = parse_double(cur, val, key);
      else if (key == "output_dir") cfg.output_dir = val;
      else unknown();
    } else if (section == "regions") {
      if (key != "rect") unknown();
      const auto t = split_ws(val);
      if (t.size() != 5 && t.size() != 6) cur.fail("rect expects 'i0 j0 i1 j1 tag [rho0]'");
      RegionRect r;
      r.i0 = parse_int(cur, t[0], key);
      r.j0 = parse_int(cur, t[1], key);
      r.i1 = parse_int(cur, t[2], key);
      r.j1 = parse_int(cur, t[3], key);
      if (t[4] == "design") r.tag = Region::Design;
      else if (t[4] == "solid") r.tag = Region::AlwaysSolid;
      else if (t[4] == "void") r.tag = Region::AlwaysVoid;
      else cur.fail("region tag must be design, solid, or void");
      if (t.size() == 6) r.rho0 = parse_double(cur, t[5], key);
      cfg.regions.push_back(r);
    } else if (section == "dirichlet") {
      if (key != "rect") unknown();
      const auto t = split_ws(val);
      if (t.size() != 7) cur.fail("rect expects 'i0 j0 i1 j1 case ux uy'");
      DirichletRect d;
      d.i0 = parse_int(cur, t[0], key);
      d.j0 = parse_int(cur, t[1], key);
      d.i1 = parse_int(cur, t[2], key);
      d.j1 = parse_int(cur, t[3], key);
      d.load_case = parse_case(t[4]);
      d.value = Vec2(parse_double(cur, t[5], key), parse_double(cur, t[6], key));
      cfg.dirichlet.push_back(d);
    } else if (section == "loads") {
      if (key != "rect") unknown();
      const auto t = split_ws(val);
      if (t.size() != 7) cur.fail("rect expects 'i0 j0 i1 j1 case fx fy'");
      LoadRect l;
      l.i0 = parse_int(cur, t[0], key);
      l.j0 = parse_int(cur, t[1], key);
      l.i1 = parse_int(cur, t[2], key);
      l.j1 = parse_int(cur, t[3], key);
      l.load_case = parse_case(t[4]);
      l.total_force = Vec2(parse_double(cur, t[5], key), parse_double(cur, t[6], key));
      cfg.loads.push_back(l);
    } else if (section == "objective") {
      if (key == "case_small") cfg.case_small = parse_int(cur, val, key);
      else if (key == "case_large") cfg.case_large = parse_int(cur, val, key);
      else if (key == "reaction_rect") {
        const auto t = split_ws(val);
        if (t.size() != 4) cur.fail("reaction_rect expects 'i0 j0 i1 j1'");
        cfg.reaction_i0 = parse_int(cur, t[0], key);
        cfg.reaction_j0 = parse_int(cur, t[1], key);
        cfg.reaction_i1 = parse_int(cur, t[2], key);
        cfg.reaction_j1 = parse_int(cur, t[3], key);
      } else if (key == "reaction_dir") {
        const auto t = split_ws(val);
        if (t.size() != 2) cur.fail("reaction_dir expects 'nx ny'");
        cfg.reaction_dir = Vec2(parse_double(cur, t[0], key), parse_double(cur, t[1], key));
      } else unknown();
    }
  }

  if (nx <= 0 || ny <= 0 || h <= 0.0) throw ConfigError(path + ": [grid] requires nx, ny, h");
  cfg.grid = Grid2D(nx, ny, h, Vec2(ox, oy));
  cfg.projection.E0 = cfg.E0;
  cfg.projection.nu = cfg.nu;
  cfg.validate();
  return cfg;
}

int OptimizationConfig::load_case_count() const {
  int n = 1;
  for (const auto& d : dirichlet) n = std::max(n, d.load_case + 1);
  for (const auto& l : loads) n = std::max(n, l.load_case + 1);
  if (objective == ObjectiveKind::ReactionMinMax)
    n = std::max({n, case_small + 1, case_large + 1});
  return n;
}

DensityField OptimizationConfig::initial_field() const {
  DensityField f(grid.cell_count(), design_rho0);
  for (const auto& r : regions) {
    for (int j = r.j0; j < r.j1; ++j) {
      for (int i = r.i0; i < r.i1; ++i) {
        const int c = grid.cell_id(i, j);
        f.region[c] = r.tag;
        if (r.tag == Region::Design && r.rho0 >= 0.0) f.rho[c] = r.rho0;
      }
    }
  }
  f.enforce_regions();
  return f;
}

DisplacementField OptimizationConfig::boundary_conditions(const Grid2D& g, int load_case) const {
  DisplacementField f = DisplacementField::zero(g);
  for (const auto& d : dirichlet) {
    if (d.load_case != -1 && d.load_case != load_case) continue;
    for (int j = d.j0; j < d.j1; ++j) {
      for (int i = d.i0; i < d.i1; ++i) {
        const int n = g.node_id(i, j);
        f.dirichlet_mask[n] = 1;
        f.dirichlet_value[2 * n] = d.value.x();
        f.dirichlet_value[2 * n + 1] = d.value.y();
      }
    }
  }
  return f;
}

Vec OptimizationConfig::external_forces(const Grid2D& g, int load_case) const {
  Vec fe = Vec::Zero(g.dof_count());
  for (const auto& l : loads) {
    if (l.load_case != -1 && l.load_case != load_case) continue;
    const long count = long(l.i1 - l.i0) * long(l.j1 - l.j0);
    if (count <= 0) continue;
    const Vec2 per_node = l.total_force / double(count);
    for (int j = l.j0; j < l.j1; ++j) {
      for (int i = l.i0; i < l.i1; ++i) {
        const int n = g.node_id(i, j);
        fe[2 * n] += per_node.x();
        fe[2 * n + 1] += per_node.y();
      }
    }
  }
  return fe;
}

std::vector<int> OptimizationConfig::seed_cells() const {
  std::vector<std::uint8_t> mark(grid.cell_count(), 0);
  auto mark_cells_of_node_box = [&](int i0, int j0, int i1, int j1) {
    // Every cell incident to a node in the box.
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) {
        for (int dj = -1; dj <= 0; ++dj)
          for (int di = -1; di <= 0; ++di)
            if (grid.cell_in_bounds(i + di, j + dj)) mark[grid.cell_id(i + di, j + dj)] = 1;
      }
    }
  };
  if (!seeds.empty()) {
    for (const auto& s : seeds)
      for (int j = s.j0; j < s.j1; ++j)
        for (int i = s.i0; i < s.i1; ++i) mark[grid.cell_id(i, j)] = 1;
  } else {
    for (const auto& d : dirichlet) mark_cells_of_node_box(d.i0, d.j0, d.i1, d.j1);
    for (const auto& l : loads) mark_cells_of_node_box(l.i0, l.j0, l.i1, l.j1);
  }
  std::vector<int> cells;
  for (int c = 0; c < grid.cell_count(); ++c)
    if (mark[c]) cells.push_back(c);
  return cells;
}

BarrierParams OptimizationConfig::barrier_params() const {
  BarrierParams bp;
  bp.d_hat = dhat_over_h * grid.h;
  bp.kappa = kappa > 0.0 ? kappa : E0 * grid.h;
  return bp;
}

LameParams OptimizationConfig::unit_lame() const {
  return plane == "stress" ? LameParams::plane_stress(1.0, nu) : LameParams::plane_strain(1.0, nu);
}

SolverParams OptimizationConfig::solver_params() const {
  SolverParams sp;
  sp.newton_tol = newton_tol;
  sp.max_newton_iters = max_newton_iters;
  sp.armijo_c = armijo_c;
  sp.shrink = shrink;
  return sp;
}

std::vector<int> OptimizationConfig::reaction_nodes() const {
  std::vector<int> nodes;
  for (int j = reaction_j0; j < reaction_j1; ++j)
    for (int i = reaction_i0; i < reaction_i1; ++i) nodes.push_back(grid.node_id(i, j));
  return nodes;
}

void OptimizationConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config validation: " + msg); };

  if (!(vhat > 0.0 && vhat < 1.0)) fail("volume_fraction must lie in (0,1)");
  if (!(E0 > 0.0)) fail("E0 must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) fail("nu must lie in [0, 0.5)");
  if (!(projection.beta > 0.0)) fail("beta must be positive");
  if (!(beta_growth >= 1.0)) fail("beta_growth must be >= 1");
  if (beta_growth_every < 1) fail("beta_growth_every must be >= 1");
  if (!(filter.r_min >= 0.0)) fail("r_min must be >= 0");
  if (!(filter.gamma > 0.0)) fail("gamma must be positive");
  if (!(eta > 0.0 && eta < 1.0)) fail("eta must lie in (0,1)");
  if (!(dhat_over_h > 0.0)) fail("dhat_over_h must be positive");
  if (!(friction.mu >= 0.0)) fail("friction mu must be >= 0");
  if (!(friction.eps_v > 0.0)) fail("friction eps_v must be positive");
  if (friction.N < 1) fail("friction steps must be >= 1");
  if (!(friction.T > 0.0)) fail("friction horizon must be positive");
  if (!(strain_limit.p_bar < strain_limit.p_hat && strain_limit.p_hat <= 1.0 &&
        1.0 <= strain_limit.s_hat && strain_limit.s_hat < strain_limit.s_bar))
    fail("strain limit parameters must satisfy p_bar < p_hat <= 1 <= s_hat < s_bar");
  if (!(strain_limit.rho_bar > 0.0 && strain_limit.rho_bar < 1.0))
    fail("rho_bar must lie in (0,1)");
  if (!(newton_tol > 0.0)) fail("newton_tol must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) fail("shrink must lie in (0,1)");
  if (!(design_rho0 >= 0.0 && design_rho0 <= 1.0)) fail("design_rho0 must lie in [0,1]");
  if (max_iters < 0) fail("max_iters must be >= 0");

  auto check_cell_box = [&](int i0, int j0, int i1, int j1, const std::string& what) {
    if (i0 < 0 || j0 < 0 || i1 > grid.nx || j1 > grid.ny || i0 >= i1 || j0 >= j1)
      fail(what + " box out of range");
  };
  auto check_node_box = [&](int i0, int j0, int i1, int j1, const std::string& what) {
    if (i0 < 0 || j0 < 0 || i1 > grid.nx + 1 || j1 > grid.ny + 1 || i0 >= i1 || j0 >= j1)
      fail(what + " box out of range");
  };
  for (const auto& r : regions) check_cell_box(r.i0, r.j0, r.i1, r.j1, "region");
  for (const auto& s : seeds) check_cell_box(s.i0, s.j0, s.i1, s.j1, "seed");
  for (const auto& d : dirichlet) check_node_box(d.i0, d.j0, d.i1, d.j1, "dirichlet");
  for (const auto& l : loads) check_node_box(l.i0, l.j0, l.i1, l.j1, "load");

  if (dirichlet.empty()) fail("at least one dirichlet rect is required");

  if (objective == ObjectiveKind::ReactionMinMax) {
    check_node_box(reaction_i0, reaction_j0, reaction_i1, reaction_j1, "reaction");
    if (case_small == case_large) fail("reaction_minmax needs two distinct load cases");
    if (reaction_dir.norm() == 0.0) fail("reaction_dir must be nonzero");
  }

  // The volume bound must leave room for the fixed solid material.
  const DensityField f0 = initial_field();
  long solid = 0, nonvoid = 0;
  for (int c = 0; c < f0.size(); ++c) {
    if (f0.region[c] == Region::AlwaysVoid) continue;
    ++nonvoid;
    if (f0.region[c] == Region::AlwaysSolid) ++solid;
  }
  if (nonvoid > 0 && double(solid) / double(nonvoid) > vhat)
    fail("volume_fraction is below the always-solid share");
}

}  // namespace contopt
