#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace spectra {

using Index = std::int32_t;
using Entry = std::pair<Index, Index>;  // (row, col)

/// Sparse 0-1 matrix stored in both compressed-row and compressed-column
/// form; row and column degree queries are both hot paths. Immutable after
/// construction.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  /// Entries may arrive in any order; duplicates are rejected.
  BinaryMatrix(Index rows, Index cols, std::vector<Entry> entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(sorted_entries_.size()); }

  /// Entries sorted lexicographically by (row, col).
  const std::vector<Entry>& entries() const { return sorted_entries_; }

  bool at(Index i, Index j) const;

  Index row_sum(Index i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
  Index col_sum(Index j) const { return col_ptr_[j + 1] - col_ptr_[j]; }

  /// Column indices of ones in row i, ascending.
  const Index* row_begin(Index i) const { return row_idx_.data() + row_ptr_[i]; }
  const Index* row_end(Index i) const { return row_idx_.data() + row_ptr_[i + 1]; }
  /// Row indices of ones in column j, ascending.
  const Index* col_begin(Index j) const { return col_idx_.data() + col_ptr_[j]; }
  const Index* col_end(Index j) const { return col_idx_.data() + col_ptr_[j + 1]; }

  /// Number of ones in row i whose column index is < limit.
  Index row_sum_below(Index i, Index limit) const;
  /// Number of ones in column j whose row index is < limit.
  Index col_sum_below(Index j, Index limit) const;

  /// Submatrix M[row_set, col_set]; index sets must be sorted ascending.
  BinaryMatrix submatrix(const std::vector<Index>& row_set,
                         const std::vector<Index>& col_set) const;

  BinaryMatrix transposed() const;

  /// Text format: header "rows cols nnz", then one "i j" per line,
  /// 0-indexed, sorted lexicographically. Round trips bit-exactly.
  void write(std::ostream& os) const;
  static BinaryMatrix read(std::istream& is);
  std::string to_text() const;
  static BinaryMatrix from_text(const std::string& text);

  bool operator==(const BinaryMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && sorted_entries_ == o.sorted_entries_;
  }

 private:
  Index rows_ = 0, cols_ = 0;
  std::vector<Entry> sorted_entries_;
  std::vector<Index> row_ptr_, row_idx_;
  std::vector<Index> col_ptr_, col_idx_;
};

/// Digraph view of a square 0-1 matrix: M_{ij} = 1 is the edge j -> i
/// (columns act, rows receive), so out-degree of v is the column sum and
/// in-degree is the row sum. Self-loops allowed.
class Digraph {
 public:
  explicit Digraph(const BinaryMatrix& m);
  explicit Digraph(Index n) : n_(n), out_(n), in_(n) {}

  Index size() const { return n_; }
  const std::vector<Index>& out(Index v) const { return out_[v]; }
  const std::vector<Index>& in(Index v) const { return in_[v]; }
  bool has_loop(Index v) const;

 private:
  Index n_ = 0;
  std::vector<std::vector<Index>> out_, in_;
};

}  // namespace spectra
