#include "msw/assembly.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "msw/errors.hpp"
#include "msw/linear_solvers.hpp"

namespace msw {

int BlockAssembler::add_block(const std::vector<int>& rows, const std::vector<int>& cols) {
  if (finalized_) throw ArgumentError("cannot add blocks after finalize()");
  block_rows_.push_back(rows);
  block_cols_.push_back(cols);
  offsets_.push_back(0);
  return static_cast<int>(block_rows_.size()) - 1;
}

void BlockAssembler::finalize() {
  std::vector<std::vector<int>> pattern(rows_);
  for (std::size_t b = 0; b < block_rows_.size(); ++b) {
    for (int r : block_rows_[b]) pattern[r].insert(pattern[r].end(), block_cols_[b].begin(), block_cols_[b].end());
  }
  std::size_t nnz = 0;
  for (auto& p : pattern) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    nnz += p.size();
  }
  matrix_.resize(rows_, cols_);
  matrix_.reserve(static_cast<Eigen::Index>(nnz));
  for (int r = 0; r < rows_; ++r) {
    matrix_.startVec(r);
    for (int c : pattern[r]) matrix_.insertBack(r, c) = 0.0;
  }
  matrix_.finalize();
  pattern.clear();

  const int* outer = matrix_.outerIndexPtr();
  const int* inner = matrix_.innerIndexPtr();
  std::size_t total = 0;
  for (std::size_t b = 0; b < block_rows_.size(); ++b) {
    offsets_[b] = total;
    total += block_rows_[b].size() * block_cols_[b].size();
  }
  positions_.resize(total);
  for (std::size_t b = 0; b < block_rows_.size(); ++b) {
    std::size_t k = offsets_[b];
    const auto& cols = block_cols_[b];
    // Column-major within the block to match Eigen's default dense storage.
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (int r : block_rows_[b]) {
        const int* first = inner + outer[r];
        const int* last = inner + outer[r + 1];
        positions_[k++] = static_cast<int>(std::lower_bound(first, last, cols[j]) - inner);
      }
    }
  }
  block_rows_.clear();
  block_cols_.clear();
  finalized_ = true;
}

void BlockAssembler::set_zero() {
  std::fill(matrix_.valuePtr(), matrix_.valuePtr() + matrix_.nonZeros(), 0.0);
}

void BlockAssembler::scatter(int block, const Eigen::Ref<const Eigen::MatrixXd>& local) {
  double* values = matrix_.valuePtr();
  const int* pos = &positions_[offsets_[block]];
  for (Eigen::Index j = 0, k = 0; j < local.cols(); ++j) {
    for (Eigen::Index i = 0; i < local.rows(); ++i, ++k) values[pos[k]] += local(i, j);
  }
}

std::vector<int> cell_dof_list(const FunctionSpace& space, int cell) {
  const int* d = space.cell_dofs(cell);
  return {d, d + space.dofs_per_cell()};
}

BlockAssembler cell_block_pattern(const FunctionSpace& rows, const FunctionSpace& cols) {
  BlockAssembler a(rows.num_dofs(), cols.num_dofs());
  for (int c = 0; c < rows.mesh().num_cells(); ++c) a.add_block(cell_dof_list(rows, c), cell_dof_list(cols, c));
  return a;
}

void add_facet_blocks(BlockAssembler& assembler, const Discretisation& disc, const FunctionSpace& rows,
                      const FunctionSpace& cols) {
  for (const Facet& f : disc.mesh().facets()) {
    std::vector<int> r = cell_dof_list(rows, f.cell_plus);
    std::vector<int> rm = cell_dof_list(rows, f.cell_minus);
    r.insert(r.end(), rm.begin(), rm.end());
    std::vector<int> c = cell_dof_list(cols, f.cell_plus);
    std::vector<int> cm = cell_dof_list(cols, f.cell_minus);
    c.insert(c.end(), cm.begin(), cm.end());
    assembler.add_block(r, c);
  }
}

SparseMatrix assemble_mass(const Discretisation& disc, SpaceKind kind) {
  const FunctionSpace& space = kind == SpaceKind::HdivQuadratic ? disc.hdiv() : disc.dg();
  const int nq = disc.num_cell_points();
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(disc.mesh().num_cells()) * space.dofs_per_cell() * space.dofs_per_cell());
  HdivCellEval ev;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(space.dofs_per_cell(), space.dofs_per_cell());
    if (kind == SpaceKind::HdivQuadratic) {
      disc.eval_hdiv_cell(c, ev, false);
      for (int q = 0; q < nq; ++q) local.noalias() += disc.cell_weight(c, q) * ev.values[q].transpose() * ev.values[q];
    } else {
      for (int q = 0; q < nq; ++q) {
        const auto& v = disc.dg_table().values[q];
        local.noalias() += disc.cell_weight(c, q) * v.transpose() * v;
      }
    }
    const int* d = space.cell_dofs(c);
    for (int i = 0; i < space.dofs_per_cell(); ++i) {
      for (int j = 0; j < space.dofs_per_cell(); ++j) trips.emplace_back(d[i], d[j], local(i, j));
    }
  }
  SparseMatrix m(space.num_dofs(), space.num_dofs());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Field project_scalar(const Discretisation& disc, const ScalarFunction& f) {
  Field out(disc.dg());
  const int nq = disc.num_cell_points();
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (int q = 0; q < nq; ++q) {
      rhs += disc.cell_weight(c, q) * f(disc.cell_point(c, q)) * disc.dg_table().values[q].transpose();
    }
    out.values.segment<3>(3 * c) = disc.dg_mass_inverse(c) * rhs;
  }
  if (!out.all_finite()) throw MeshQualityError("scalar projection produced non-finite values");
  return out;
}

Field project_vector(const Discretisation& disc, const VectorFunction& f) {
  const FunctionSpace& space = disc.hdiv();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
  const int nq = disc.num_cell_points();
  HdivCellEval ev;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    disc.eval_hdiv_cell(c, ev, false);
    const Vec3& k = disc.geometry().cells[c].normal;
    Eigen::Matrix<double, kHdivDofs, 1> local = Eigen::Matrix<double, kHdivDofs, 1>::Zero();
    for (int q = 0; q < nq; ++q) {
      Vec3 v = f(disc.cell_point(c, q));
      v -= v.dot(k) * k;
      local.noalias() += disc.cell_weight(c, q) * ev.values[q].transpose() * v;
    }
    const int* d = space.cell_dofs(c);
    for (int i = 0; i < kHdivDofs; ++i) rhs(d[i]) += local(i);
  }
  const SparseMatrix m = assemble_mass(disc, SpaceKind::HdivQuadratic);
  return Field(space, cg_solve(m, rhs, 1e-12));
}

namespace {

// Integrates |field - ref|^2 and |ref|^2 over all cells.
template <typename PointValue, typename RefValue>
std::pair<double, double> accumulate_error(const Discretisation& disc, PointValue&& value, RefValue&& ref) {
  double err = 0.0, norm = 0.0;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    for (int q = 0; q < disc.num_cell_points(); ++q) {
      const double w = disc.cell_weight(c, q);
      const auto r = ref(c, q);
      err += w * (value(c, q) - r).squaredNorm();
      norm += w * r.squaredNorm();
    }
  }
  return {err, norm};
}

double finish(std::pair<double, double> e, bool normalized) {
  if (!normalized) return std::sqrt(e.first);
  if (!(e.second > 0.0)) throw ArgumentError("normalised L2 error requested against a zero-norm reference");
  return std::sqrt(e.first / e.second);
}

}  // namespace

double l2_norm(const Discretisation& disc, const Field& field) {
  Field zero(*field.space);
  return l2_error(disc, field, zero, false);
}

double l2_error(const Discretisation& disc, const Field& field, const ScalarFunction& ref, bool normalized) {
  if (field.space->kind() != SpaceKind::DGLinear) throw ArgumentError("scalar reference needs a DG field");
  auto value = [&](int c, int q) {
    return Eigen::Matrix<double, 1, 1>(disc.dg_table().values[q].row(0).dot(disc.local_dg(field, c)));
  };
  auto r = [&](int c, int q) { return Eigen::Matrix<double, 1, 1>(ref(disc.cell_point(c, q))); };
  return finish(accumulate_error(disc, value, r), normalized);
}

double l2_error(const Discretisation& disc, const Field& field, const VectorFunction& ref, bool normalized) {
  if (field.space->kind() != SpaceKind::HdivQuadratic) throw ArgumentError("vector reference needs an H(div) field");
  HdivCellEval ev;
  int current = -1;
  Eigen::Matrix<double, kHdivDofs, 1> coeffs;
  auto value = [&](int c, int q) -> Vec3 {
    if (c != current) {
      disc.eval_hdiv_cell(c, ev, false);
      coeffs = disc.local_hdiv(field, c);
      current = c;
    }
    return ev.values[q] * coeffs;
  };
  auto r = [&](int c, int q) -> Vec3 {
    const Vec3& k = disc.geometry().cells[c].normal;
    Vec3 v = ref(disc.cell_point(c, q));
    return v - v.dot(k) * k;
  };
  return finish(accumulate_error(disc, value, r), normalized);
}

double l2_error(const Discretisation& disc, const Field& field, const Field& ref, bool normalized) {
  if (field.space != ref.space) throw ArgumentError("L2 error between fields on different spaces");
  if (field.space->kind() == SpaceKind::DGLinear) {
    auto value = [&](int c, int q) {
      return Eigen::Matrix<double, 1, 1>(disc.dg_table().values[q].row(0).dot(disc.local_dg(field, c)));
    };
    auto r = [&](int c, int q) {
      return Eigen::Matrix<double, 1, 1>(disc.dg_table().values[q].row(0).dot(disc.local_dg(ref, c)));
    };
    return finish(accumulate_error(disc, value, r), normalized);
  }
  HdivCellEval ev;
  int current = -1;
  Eigen::Matrix<double, kHdivDofs, 1> a, b;
  auto load = [&](int c) {
    if (c != current) {
      disc.eval_hdiv_cell(c, ev, false);
      a = disc.local_hdiv(field, c);
      b = disc.local_hdiv(ref, c);
      current = c;
    }
  };
  auto value = [&](int c, int q) -> Vec3 {
    load(c);
    return ev.values[q] * a;
  };
  auto r = [&](int c, int q) -> Vec3 {
    load(c);
    return ev.values[q] * b;
  };
  return finish(accumulate_error(disc, value, r), normalized);
}

double integrate(const Discretisation& disc, const Field& field) {
  if (field.space->kind() != SpaceKind::DGLinear) throw ArgumentError("integrate() needs a DG field");
  double total = 0.0;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) total += disc.geometry().cells[c].area * field.values.segment<3>(3 * c).sum() / 3.0;
  return total;
}

}  // namespace msw
