#pragma once

#include <vector>

#include "fddisac/types.hpp"

namespace fddisac {

/// Square block-diagonal matrix with equally sized dense blocks.
class BlockDiagonal {
 public:
  BlockDiagonal() = default;
  BlockDiagonal(int n_blocks, int block_size);

  static BlockDiagonal identity(int n_blocks, int block_size, double scale = 1.0);

  int n_blocks() const { return static_cast<int>(blocks_.size()); }
  int block_size() const { return block_size_; }
  int dim() const { return n_blocks() * block_size_; }

  CMat& block(int b) { return blocks_[b]; }
  const CMat& block(int b) const { return blocks_[b]; }

  /// Re(p^H M p).
  double quad(const CVec& p) const;
  CVec apply(const CVec& p) const;

  BlockDiagonal& add_scaled(const BlockDiagonal& other, double c);
  BlockDiagonal& add_identity(double c);
  /// Adds c*m to every block.
  BlockDiagonal& add_to_all(const CMat& m, double c);

  /// Solves M x = rhs block by block (Cholesky, LDLT fallback).
  CVec solve(const CVec& rhs) const;

  CMat dense() const;

 private:
  int block_size_ = 0;
  std::vector<CMat> blocks_;
};

}  // namespace fddisac
