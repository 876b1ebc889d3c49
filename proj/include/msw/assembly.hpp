#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "msw/fem.hpp"

namespace msw {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseColMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

using ScalarFunction = std::function<double(const Vec3&)>;
using VectorFunction = std::function<Vec3(const Vec3&)>;

/// Sparse matrix with a fixed pattern built from dense local blocks. Each
/// block remembers where its entries live so repeated assembly is a scatter.
class BlockAssembler {
 public:
  BlockAssembler(int rows, int cols) : rows_(rows), cols_(cols) {}

  /// Registers a block; returns its id. Repeated indices are allowed.
  int add_block(const std::vector<int>& rows, const std::vector<int>& cols);
  void finalize();

  void set_zero();
  void scatter(int block, const Eigen::Ref<const Eigen::MatrixXd>& local);
  const SparseMatrix& matrix() const { return matrix_; }
  int num_blocks() const { return static_cast<int>(offsets_.size()); }

 private:
  int rows_, cols_;
  std::vector<std::vector<int>> block_rows_, block_cols_;
  std::vector<std::size_t> offsets_;
  std::vector<int> positions_;
  SparseMatrix matrix_;
  bool finalized_ = false;
};

/// Cell-block pattern for a space (every cell couples its own dofs).
BlockAssembler cell_block_pattern(const FunctionSpace& rows, const FunctionSpace& cols);

/// Adds facet blocks coupling the dofs of both adjacent cells, after the cell blocks.
void add_facet_blocks(BlockAssembler& assembler, const Discretisation& disc, const FunctionSpace& rows,
                      const FunctionSpace& cols);

std::vector<int> cell_dof_list(const FunctionSpace& space, int cell);

SparseMatrix assemble_mass(const Discretisation& disc, SpaceKind kind);

/// L2 projection; DG uses cell-local solves, H(div) a global CG solve.
Field project_scalar(const Discretisation& disc, const ScalarFunction& f);
Field project_vector(const Discretisation& disc, const VectorFunction& f);

double l2_norm(const Discretisation& disc, const Field& field);
/// Vector references are projected onto each cell's tangent plane first.
double l2_error(const Discretisation& disc, const Field& field, const ScalarFunction& ref, bool normalized);
double l2_error(const Discretisation& disc, const Field& field, const VectorFunction& ref, bool normalized);
double l2_error(const Discretisation& disc, const Field& field, const Field& ref, bool normalized);

/// Integral of a DG field over the mesh.
double integrate(const Discretisation& disc, const Field& field);

}  // namespace msw
