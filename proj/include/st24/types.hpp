#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace st24 {

using Index = Eigen::Index;

// Row-major throughout: kernel rows, grid rows and packed panels are all
// addressed (row, col) and serialized row by row.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// One byte per 4-wide segment: descriptor 0 in bits 0-1, descriptor 1 in bits 2-3.
using MetadataMatrix = Matrix<std::uint8_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Which column class j < L is exchanged with j + L.
enum class Parity : std::uint8_t { Even = 0, Odd = 1 };

inline const char* to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

inline Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  throw Error("unknown parity '" + s + "' (expected even|odd)");
}

constexpr Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }
constexpr Index round_up(Index a, Index b) { return ceil_div(a, b) * b; }

}  // namespace st24
