#include "qnet/sign.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qnet {

namespace {

constexpr std::array<std::uint8_t, 3> kBases = {QSign::kPlus, QSign::kZero, QSign::kMinus};

// Sum of two base signs as a mask.
std::uint8_t add_base(std::uint8_t s, std::uint8_t t) {
  if (s == QSign::kZero) return t;
  if (t == QSign::kZero) return s;
  if (s == t) return s;
  return QSign::kAll;
}

std::uint8_t mul_base(std::uint8_t s, std::uint8_t t) {
  if (s == QSign::kZero || t == QSign::kZero) return QSign::kZero;
  return s == t ? QSign::kPlus : QSign::kMinus;
}

std::uint8_t mul_marker(std::uint8_t s, QSign::Marker m) {
  if (m == QSign::Marker::up) {
    return s == QSign::kPlus ? (QSign::kPlus | QSign::kZero) : QSign::kZero;
  }
  return s == QSign::kMinus ? (QSign::kMinus | QSign::kZero) : QSign::kZero;
}

}  // namespace

QSign QSign::from_bits(std::uint8_t bits) {
  if (bits == 0 || (bits & ~kAll) != 0) {
    throw std::invalid_argument("sign set must be a nonempty subset of {+,0,-}");
  }
  return QSign(bits, Marker::none);
}

std::optional<QSign> QSign::parse(std::string_view text) {
  if (text == "^") return up();
  if (text == "v") return down();
  if (text == "?") return unknown();
  if (text.empty() || text.size() > 3) return std::nullopt;
  std::uint8_t bits = 0;
  for (char c : text) {
    std::uint8_t b = 0;
    switch (c) {
      case '+': b = kPlus; break;
      case '0': b = kZero; break;
      case '-': b = kMinus; break;
      default: return std::nullopt;
    }
    if (bits & b) return std::nullopt;
    bits |= b;
  }
  return QSign(bits, Marker::none);
}

bool QSign::subset_of(QSign other) const {
  if (is_marker() || other.is_marker()) return *this == other;
  return (bits_ & ~other.bits_) == 0;
}

QSign QSign::unite(QSign other) const {
  if (is_marker() || other.is_marker()) {
    throw std::invalid_argument("cannot unite a derivative marker");
  }
  return QSign(bits_ | other.bits_, Marker::none);
}

QSign QSign::negated() const {
  if (marker_ == Marker::up) return down();
  if (marker_ == Marker::down) return up();
  std::uint8_t out = bits_ & kZero;
  if (bits_ & kPlus) out |= kMinus;
  if (bits_ & kMinus) out |= kPlus;
  return QSign(out, Marker::none);
}

std::string QSign::to_string() const {
  switch (marker_) {
    case Marker::up: return "^";
    case Marker::down: return "v";
    case Marker::none: break;
  }
  switch (bits_) {
    case kPlus: return "+";
    case kZero: return "0";
    case kMinus: return "-";
    case kAll: return "?";
    case kPlus | kZero: return "+0";
    case kMinus | kZero: return "-0";
    case kPlus | kMinus: return "+-";
    default: return "<invalid>";
  }
}

std::ostream& operator<<(std::ostream& os, QSign s) { return os << '[' << s.to_string() << ']'; }

QSign sign_of(double x, double zero_tolerance) {
  if (!std::isfinite(x)) throw std::domain_error("sign_of: non-finite value");
  if (!(zero_tolerance >= 0.0)) throw std::domain_error("sign_of: negative zero tolerance");
  if (x > zero_tolerance) return QSign::plus();
  if (x < -zero_tolerance) return QSign::minus();
  return QSign::zero();
}

QSign qadd(QSign a, QSign b) {
  if (a.is_marker() || b.is_marker()) {
    throw std::invalid_argument("qadd: derivative markers cannot be added");
  }
  std::uint8_t out = 0;
  for (auto s : kBases) {
    if (!(a.bits() & s)) continue;
    for (auto t : kBases) {
      if (b.bits() & t) out |= add_base(s, t);
    }
  }
  return QSign::from_bits(out);
}

QSign qmul(QSign change, QSign deriv) {
  if (change.is_marker()) {
    throw std::invalid_argument("qmul: a derivative marker cannot be a change value");
  }
  std::uint8_t out = 0;
  for (auto s : kBases) {
    if (!(change.bits() & s)) continue;
    if (deriv.is_marker()) {
      out |= mul_marker(s, deriv.marker());
      continue;
    }
    for (auto t : kBases) {
      if (deriv.bits() & t) out |= mul_base(s, t);
    }
  }
  return QSign::from_bits(out);
}

QSign& QMatrix::at(std::size_t r, std::size_t c) {
  if (r >= rows_ || c >= cols_) throw std::out_of_range("QMatrix index");
  return data_[r * cols_ + c];
}

QSign QMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw std::out_of_range("QMatrix index");
  return data_[r * cols_ + c];
}

QVector qmatvec(const QMatrix& m, const QVector& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument("qmatvec: matrix has " + std::to_string(m.cols()) +
                                " columns but vector has " + std::to_string(v.size()) +
                                " entries");
  }
  QVector out(m.rows(), QSign::zero());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    QSign acc = QSign::zero();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      acc = qadd(acc, qmul(v[j], m.at(i, j)));
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace qnet
