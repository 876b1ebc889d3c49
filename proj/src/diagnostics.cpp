#include "msw/diagnostics.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include <fmt/format.h>

#include "msw/assembly.hpp"
#include "msw/errors.hpp"

namespace msw {

namespace {

using Vec12 = Eigen::Matrix<double, kHdivDofs, 1>;
using Row3 = Eigen::Matrix<double, 1, 3>;

const Eigen::Vector2d kCentroid(1.0 / 3.0, 1.0 / 3.0);

double cell_mean(const Field& q, int c) { return q.values.segment<3>(3 * c).mean(); }

std::ofstream open_for_writing(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

constexpr char kMagic[8] = {'M', 'S', 'W', 'C', 'K', 'P', 'T', '\0'};

}  // namespace

double courant_number(const Discretisation& disc, const Field& u, double dt) {
  double worst = 0.0;
  HdivCellEval ev;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    disc.eval_hdiv_cell(c, ev, false);
    const Vec12 cu = disc.local_hdiv(u, c);
    Vec3 integral = Vec3::Zero();
    for (int q = 0; q < disc.num_cell_points(); ++q) integral += disc.cell_weight(c, q) * (ev.values[q] * cu);
    const auto& g = disc.geometry().cells[c];
    worst = std::max(worst, integral.norm() / g.area * dt / g.min_edge);
  }
  return worst;
}

Field potential_vorticity(const Discretisation& disc, const State& s, const FrameworkConfig& cfg) {
  const int nc = disc.mesh().num_cells();
  for (Eigen::Index i = 0; i < s.D.values.size(); ++i) {
    if (!(s.D.values(i) > 0.0)) throw StateError(fmt::format("potential vorticity needs D > 0 (dof {})", i));
  }
  const bool sphere = disc.on_sphere();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * nc);
  std::vector<Eigen::Matrix3d> mass(nc, Eigen::Matrix3d::Zero());
  HdivCellEval ev;
  for (int c = 0; c < nc; ++c) {
    disc.eval_hdiv_cell(c, ev, false);
    const Vec12 cu = disc.local_hdiv(s.u, c);
    const Vec3& k = disc.geometry().cells[c].normal;
    const Eigen::Matrix3d G = disc.dg_gradients(c);
    const Eigen::Vector3d Dl = disc.local_dg(s.D, c);
    for (int q = 0; q < disc.num_cell_points(); ++q) {
      const double w = disc.cell_weight(c, q);
      const Row3 lam = disc.dg_table().values[q];
      const Vec3 u = ev.values[q] * cu;
      const double f = cfg.coriolis_parameter(disc.cell_point(c, q), sphere);
      rhs.segment<3>(3 * c) += w * (f * lam.transpose() - G.transpose() * u.cross(k));
      mass[c] += (w * lam.dot(Dl)) * lam.transpose() * lam;
    }
  }
  for (int f = 0; f < disc.mesh().num_facets(); ++f) {
    const FacetSide side[2] = {disc.facet_side(f, 0), disc.facet_side(f, 1)};
    const Vec12 cu[2] = {disc.local_hdiv(s.u, side[0].cell), disc.local_hdiv(s.u, side[1].cell)};
    for (int q = 0; q < disc.num_facet_points(); ++q) {
      const double w = disc.facet_weight(f, q);
      const Vec3 avg = 0.5 * (disc.hdiv_facet_values(side[0], q) * cu[0] + disc.hdiv_facet_values(side[1], q) * cu[1]);
      for (int t = 0; t < 2; ++t) {
        const Row3 lam = disc.dg_facet_table(side[t].edge, side[t].reversed).values[q];
        rhs.segment<3>(3 * side[t].cell) += (w * avg.dot(side[t].tangent)) * lam.transpose();
      }
    }
  }
  Field pv(disc.dg());
  for (int c = 0; c < nc; ++c) pv.values.segment<3>(3 * c) = mass[c].ldlt().solve(rhs.segment<3>(3 * c));
  return pv;
}

Totals totals(const Discretisation& disc, const State& s) {
  return {integrate(disc, s.D), integrate(disc, s.qv), integrate(disc, s.qc), integrate(disc, s.qr)};
}

std::string series_header(bool with_errors) {
  return with_errors ? "time_days,mass,vapour,cloud,rain,courant,err_u,err_D,err_b,err_qv"
                     : "time_days,mass,vapour,cloud,rain,courant";
}

std::string series_line(const SeriesRow& r, bool with_errors) {
  std::string line = fmt::format("{},{},{},{},{},{}", r.time_days, r.totals.mass, r.totals.vapour, r.totals.cloud,
                                 r.totals.rain, r.courant);
  if (with_errors) {
    if (!r.errors) throw ArgumentError("series row lacks the error columns");
    for (double e : *r.errors) line += fmt::format(",{}", e);
  }
  return line;
}

void write_series(const std::filesystem::path& path, const std::vector<SeriesRow>& rows, bool with_errors) {
  SeriesWriter w(path, with_errors);
  for (const auto& r : rows) w.append(r);
}

SeriesWriter::SeriesWriter(const std::filesystem::path& path, bool with_errors)
    : path_(path), with_errors_(with_errors), out_(open_for_writing(path)) {
  out_ << series_header(with_errors) << '\n' << std::flush;
  if (!out_) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

void SeriesWriter::append(const SeriesRow& row) {
  out_ << series_line(row, with_errors_) << '\n' << std::flush;
  if (!out_) throw IoError(fmt::format("failed writing '{}'", path_.string()));
}

Snapshot make_snapshot(const Discretisation& disc, const State& s, const FrameworkConfig& cfg,
                       const PhysicsParams& physics, const Field* theta) {
  const int nc = disc.mesh().num_cells();
  Snapshot snap;
  snap.time = s.time;
  snap.mesh_hash = disc.mesh().hash();
  snap.names = {"u_zonal", "u_meridional", "D", "b", "qv", "qc", "qr", "B", "pv", "qsat"};
  snap.columns.assign(snap.names.size(), std::vector<double>(nc));
  snap.lon.resize(nc);
  snap.lat.resize(nc);
  const Field pv = potential_vorticity(disc, s, cfg);
  const Eigen::VectorXd qsat = saturation_field(s, physics, cfg, theta);
  const double deg = 180.0 / std::numbers::pi;
  for (int c = 0; c < nc; ++c) {
    const Vec3 x = disc.geometry().cells[c].centroid;
    const Vec3 u = disc.eval_vector(s.u, c, kCentroid);
    Vec3 east(1.0, 0.0, 0.0), north(0.0, 1.0, 0.0);
    if (disc.on_sphere()) {
      const auto [lon, lat] = lonlat_of(x);
      snap.lon[c] = lon * deg;
      snap.lat[c] = lat * deg;
      east = Vec3(-std::sin(lon), std::cos(lon), 0.0);
      north = Vec3(-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat));
    } else {
      snap.lon[c] = x.x();
      snap.lat[c] = x.y();
    }
    const double vals[] = {u.dot(east),      u.dot(north),     cell_mean(s.D, c), cell_mean(s.b, c),
                           cell_mean(s.qv, c), cell_mean(s.qc, c), cell_mean(s.qr, c), cell_mean(s.B, c),
                           cell_mean(pv, c),   qsat.segment<3>(3 * c).mean()};
    for (std::size_t k = 0; k < snap.names.size(); ++k) snap.columns[k][c] = vals[k];
  }
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  for (const auto& col : snap.columns) {
    for (double v : col) {
      if (!std::isfinite(v)) throw StateError(fmt::format("snapshot '{}' has non-finite values", path.string()));
    }
  }
  {
    std::ofstream out = open_for_writing(path);
    std::string header = "cell,lon,lat";
    for (const auto& n : snap.names) header += "," + n;
    out << header << '\n';
    std::string line;
    for (std::size_t c = 0; c < snap.lon.size(); ++c) {
      line = fmt::format("{},{},{}", c, snap.lon[c], snap.lat[c]);
      for (const auto& col : snap.columns) line += fmt::format(",{}", col[c]);
      out << line << '\n';
    }
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
  }
  std::ofstream meta = open_for_writing(path.string() + ".meta");
  meta << fmt::format("time_s = {}\ntime_days = {}\nmesh_hash = {:016x}\ncells = {}\n", snap.time,
                      snap.time / 86400.0, snap.mesh_hash, snap.lon.size());
  if (!meta) throw IoError(fmt::format("failed writing '{}.meta'", path.string()));
}

void write_checkpoint(const std::filesystem::path& path, const State& s, std::uint64_t mesh_hash) {
  std::ofstream out = open_for_writing(path, std::ios::out | std::ios::binary);
  auto put = [&out](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  out.write(kMagic, sizeof(kMagic));
  put(kCheckpointVersion);
  put(mesh_hash);
  put(s.time);
  for (const Field* f : {&s.u, &s.D, &s.b, &s.qv, &s.qc, &s.qr, &s.B}) {
    const std::uint64_t n = static_cast<std::uint64_t>(f->values.size());
    put(n);
    out.write(reinterpret_cast<const char*>(f->values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!out) throw IoError(fmt::format("failed writing checkpoint '{}'", path.string()));
}

State read_checkpoint(const std::filesystem::path& path, const Discretisation& disc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint '{}'", path.string()));
  auto get = [&](auto& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw IoError(fmt::format("checkpoint '{}' is truncated", path.string()));
  };
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IncompatibleCheckpointError(fmt::format("'{}' is not a checkpoint file", path.string()));
  }
  std::uint32_t version = 0;
  std::uint64_t hash = 0;
  get(version);
  if (version != kCheckpointVersion) {
    throw IncompatibleCheckpointError(
        fmt::format("checkpoint '{}' has version {}, expected {}", path.string(), version, kCheckpointVersion));
  }
  get(hash);
  if (hash != disc.mesh().hash()) {
    throw IncompatibleCheckpointError(fmt::format("checkpoint '{}' was written for a different mesh", path.string()));
  }
  State s = make_zero_state(disc);
  get(s.time);
  for (Field* f : {&s.u, &s.D, &s.b, &s.qv, &s.qc, &s.qr, &s.B}) {
    std::uint64_t n = 0;
    get(n);
    if (n != static_cast<std::uint64_t>(f->values.size())) {
      throw IncompatibleCheckpointError(fmt::format("checkpoint '{}' has a field of the wrong size", path.string()));
    }
    in.read(reinterpret_cast<char*>(f->values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError(fmt::format("checkpoint '{}' is truncated", path.string()));
  }
  return s;
}

}  // namespace msw
