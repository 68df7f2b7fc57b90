#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qnet {

/// A qualitative value: either a nonempty set of base signs {+, 0, -} or one
/// of the directional derivative markers Up / Down.
///
/// Sign sets are stored as a 3-bit mask. Markers only ever appear as
/// derivatives (the second operand of qmul); qadd rejects them and they are
/// never valid as a change value.
class QSign {
 public:
  enum class Marker : std::uint8_t { none, up, down };

  static constexpr std::uint8_t kPlus = 1;
  static constexpr std::uint8_t kZero = 2;
  static constexpr std::uint8_t kMinus = 4;
  static constexpr std::uint8_t kAll = kPlus | kZero | kMinus;

  /// Default is [0].
  constexpr QSign() = default;

  static constexpr QSign plus() { return QSign(kPlus, Marker::none); }
  static constexpr QSign zero() { return QSign(kZero, Marker::none); }
  static constexpr QSign minus() { return QSign(kMinus, Marker::none); }
  static constexpr QSign unknown() { return QSign(kAll, Marker::none); }
  static constexpr QSign plus_zero() { return QSign(kPlus | kZero, Marker::none); }
  static constexpr QSign minus_zero() { return QSign(kMinus | kZero, Marker::none); }
  static constexpr QSign up() { return QSign(0, Marker::up); }
  static constexpr QSign down() { return QSign(0, Marker::down); }

  /// Builds a sign set from a bit mask; throws std::invalid_argument if the
  /// mask is empty or has bits outside {+, 0, -}.
  static QSign from_bits(std::uint8_t bits);

  /// Parses the textual form ("+", "0", "-", "?", "+0", "-0", "+-", "^", "v").
  static std::optional<QSign> parse(std::string_view text);

  constexpr bool is_marker() const { return marker_ != Marker::none; }
  constexpr bool is_set() const { return marker_ == Marker::none; }
  constexpr Marker marker() const { return marker_; }
  constexpr std::uint8_t bits() const { return bits_; }

  constexpr bool contains(std::uint8_t base) const { return is_set() && (bits_ & base) == base; }
  constexpr bool is_singleton() const {
    return is_set() && (bits_ == kPlus || bits_ == kZero || bits_ == kMinus);
  }

  /// Set inclusion. Markers are only comparable with themselves.
  bool subset_of(QSign other) const;

  /// Union of two sign sets.
  QSign unite(QSign other) const;

  /// Maps + to - and - to +, fixes 0. Markers swap Up and Down.
  QSign negated() const;

  std::string to_string() const;

  friend constexpr bool operator==(QSign a, QSign b) {
    return a.bits_ == b.bits_ && a.marker_ == b.marker_;
  }

 private:
  constexpr QSign(std::uint8_t bits, Marker marker) : bits_(bits), marker_(marker) {}

  std::uint8_t bits_ = kZero;
  Marker marker_ = Marker::none;
};

std::ostream& operator<<(std::ostream& os, QSign s);

/// Sign of a real number, treating |x| <= zero_tolerance as zero.
/// Throws std::domain_error for non-finite input or a negative tolerance.
QSign sign_of(double x, double zero_tolerance = 0.0);

/// Qualitative addition, lifted element-wise over sign sets.
QSign qadd(QSign a, QSign b);

/// Qualitative multiplication of a change by a derivative. The derivative may
/// be a marker: Up passes increases (as [+,0]) and blocks decreases, Down the
/// reverse.
QSign qmul(QSign change, QSign deriv);

using QVector = std::vector<QSign>;

/// Dense row-major matrix of derivative signs; rows index child outcomes,
/// columns parent outcomes.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(std::size_t rows, std::size_t cols, QSign fill = QSign::zero())
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  QSign& at(std::size_t r, std::size_t c);
  QSign at(std::size_t r, std::size_t c) const;

  friend bool operator==(const QMatrix&, const QMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<QSign> data_;
};

/// Entry i is the qadd-fold over j of qmul(v[j], m(i, j)).
/// Throws std::invalid_argument on a dimension mismatch.
QVector qmatvec(const QMatrix& m, const QVector& v);

}  // namespace qnet
