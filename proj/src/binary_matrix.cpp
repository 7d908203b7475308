#include "spectra/binary_matrix.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "spectra/errors.hpp"

namespace spectra {

BinaryMatrix::BinaryMatrix(Index rows, Index cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), sorted_entries_(std::move(entries)) {
  require(rows >= 0 && cols >= 0, "BinaryMatrix: negative dimensions");
  std::sort(sorted_entries_.begin(), sorted_entries_.end());
  for (size_t k = 0; k < sorted_entries_.size(); ++k) {
    auto [i, j] = sorted_entries_[k];
    require(i >= 0 && i < rows_ && j >= 0 && j < cols_,
            "BinaryMatrix: entry out of range");
    require(k == 0 || sorted_entries_[k] != sorted_entries_[k - 1],
            "BinaryMatrix: duplicate entry");
  }
  row_ptr_.assign(rows_ + 1, 0);
  col_ptr_.assign(cols_ + 1, 0);
  for (auto [i, j] : sorted_entries_) {
    ++row_ptr_[i + 1];
    ++col_ptr_[j + 1];
  }
  for (Index i = 0; i < rows_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (Index j = 0; j < cols_; ++j) col_ptr_[j + 1] += col_ptr_[j];
  row_idx_.resize(sorted_entries_.size());
  col_idx_.resize(sorted_entries_.size());
  std::vector<Index> rfill(row_ptr_.begin(), row_ptr_.end() - 1);
  std::vector<Index> cfill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (auto [i, j] : sorted_entries_) {
    row_idx_[rfill[i]++] = j;
    col_idx_[cfill[j]++] = i;
  }
}

bool BinaryMatrix::at(Index i, Index j) const {
  require(i >= 0 && i < rows_ && j >= 0 && j < cols_, "at: index out of range");
  return std::binary_search(row_begin(i), row_end(i), j);
}

Index BinaryMatrix::row_sum_below(Index i, Index limit) const {
  return static_cast<Index>(std::lower_bound(row_begin(i), row_end(i), limit) -
                            row_begin(i));
}

Index BinaryMatrix::col_sum_below(Index j, Index limit) const {
  return static_cast<Index>(std::lower_bound(col_begin(j), col_end(j), limit) -
                            col_begin(j));
}

BinaryMatrix BinaryMatrix::submatrix(const std::vector<Index>& row_set,
                                     const std::vector<Index>& col_set) const {
  std::vector<Index> colmap(cols_, -1);
  for (size_t k = 0; k < col_set.size(); ++k) {
    require(col_set[k] >= 0 && col_set[k] < cols_, "submatrix: bad column");
    require(k == 0 || col_set[k] > col_set[k - 1], "submatrix: columns not sorted");
    colmap[col_set[k]] = static_cast<Index>(k);
  }
  std::vector<Entry> out;
  for (size_t r = 0; r < row_set.size(); ++r) {
    Index i = row_set[r];
    require(i >= 0 && i < rows_, "submatrix: bad row");
    require(r == 0 || i > row_set[r - 1], "submatrix: rows not sorted");
    for (const Index* p = row_begin(i); p != row_end(i); ++p) {
      if (colmap[*p] >= 0) out.emplace_back(static_cast<Index>(r), colmap[*p]);
    }
  }
  return BinaryMatrix(static_cast<Index>(row_set.size()),
                      static_cast<Index>(col_set.size()), std::move(out));
}

BinaryMatrix BinaryMatrix::transposed() const {
  std::vector<Entry> e;
  e.reserve(sorted_entries_.size());
  for (auto [i, j] : sorted_entries_) e.emplace_back(j, i);
  return BinaryMatrix(cols_, rows_, std::move(e));
}

void BinaryMatrix::write(std::ostream& os) const {
  os << rows_ << ' ' << cols_ << ' ' << nnz() << '\n';
  for (auto [i, j] : sorted_entries_) os << i << ' ' << j << '\n';
}

BinaryMatrix BinaryMatrix::read(std::istream& is) {
  Index r, c, k;
  if (!(is >> r >> c >> k)) throw invalid_parameter("matrix read: bad header");
  std::vector<Entry> e(k);
  for (Index t = 0; t < k; ++t) {
    if (!(is >> e[t].first >> e[t].second))
      throw invalid_parameter("matrix read: truncated entries");
  }
  return BinaryMatrix(r, c, std::move(e));
}

std::string BinaryMatrix::to_text() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

BinaryMatrix BinaryMatrix::from_text(const std::string& text) {
  std::istringstream is(text);
  return read(is);
}

Digraph::Digraph(const BinaryMatrix& m) : n_(m.rows()) {
  require(m.rows() == m.cols(), "Digraph: matrix must be square");
  out_.resize(n_);
  in_.resize(n_);
  for (auto [i, j] : m.entries()) {
    out_[j].push_back(i);
    in_[i].push_back(j);
  }
}

bool Digraph::has_loop(Index v) const {
  for (Index w : out_[v])
    if (w == v) return true;
  return false;
}

}  // namespace spectra
