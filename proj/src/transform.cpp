#include "st24/transform.hpp"

namespace st24 {

Rational sparsity_ratio(Index radius, Index L) {
  if (L < 1) throw Error("kernel matrix row count must be >= 1");
  return Rational(2 * radius + 1, 2 * radius + L);
}

bool sptc_compatible(Index radius, Index L) { return sparsity_ratio(radius, L) <= Rational(1, 2); }

RowPermutation::RowPermutation(Index L, Parity parity) : L_(L), parity_(parity), map_(static_cast<std::size_t>(2 * L)) {
  if (L < 2 || L % 2 != 0) throw Error("row permutation needs an even L >= 2");
  for (Index j = 0; j < 2 * L; ++j) {
    Index target = j;
    if (in_parity_class(j, parity)) target = j < L ? j + L : j - L;
    map_[static_cast<std::size_t>(j)] = target;
  }
}

RowPermutation input_row_permutation(Index L, Parity parity) { return RowPermutation(L, parity); }

}  // namespace st24
