#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "msw/framework.hpp"
#include "msw/physics.hpp"

namespace msw {

/// Largest cell value of |cell-mean u| dt / shortest cell edge.
double courant_number(const Discretisation& disc, const Field& u, double dt);

/// (zeta + f)/D in DG1, with D kept inside the weighted mass matrix:
/// (lam q D) = -(grad lam . (u x k)) + sum_sides <<lam_s <u>.t_s>> + (lam f).
/// Throws StateError if D <= 0 at any dof.
Field potential_vorticity(const Discretisation& disc, const State& s, const FrameworkConfig& cfg);

struct Totals {
  double mass = 0.0, vapour = 0.0, cloud = 0.0, rain = 0.0;
};
Totals totals(const Discretisation& disc, const State& s);

struct SeriesRow {
  double time_days = 0.0;
  Totals totals;
  double courant = 0.0;
  std::optional<std::array<double, 4>> errors;  // u, D, b, q_v
};

std::string series_header(bool with_errors);
std::string series_line(const SeriesRow& row, bool with_errors);
void write_series(const std::filesystem::path& path, const std::vector<SeriesRow>& rows, bool with_errors);

/// Appends one row per call and flushes, so partial runs leave a valid file.
class SeriesWriter {
 public:
  SeriesWriter(const std::filesystem::path& path, bool with_errors);
  void append(const SeriesRow& row);

 private:
  std::filesystem::path path_;
  bool with_errors_;
  std::ofstream out_;
};

/// Cell-sampled fields at the centroid; lon/lat in degrees.
struct Snapshot {
  double time = 0.0;  // s
  std::uint64_t mesh_hash = 0;
  std::vector<double> lon, lat;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

/// Columns: u_zonal, u_meridional, D, b, qv, qc, qr, B, pv, qsat.
Snapshot make_snapshot(const Discretisation& disc, const State& s, const FrameworkConfig& cfg,
                       const PhysicsParams& physics, const Field* theta);
/// CSV `cell,lon,lat,<fields...>`; time and mesh hash go to `<path>.meta`.
void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);

inline constexpr std::uint32_t kCheckpointVersion = 1;
void write_checkpoint(const std::filesystem::path& path, const State& s, std::uint64_t mesh_hash);
/// Throws IncompatibleCheckpointError on version or mesh-hash mismatch.
State read_checkpoint(const std::filesystem::path& path, const Discretisation& disc);

}  // namespace msw
