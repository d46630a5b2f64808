// Shared vocabulary types, errors, hashing, seeded randomness and diagnostics.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dyport {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input or configuration violates a documented contract. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A malformed row in one of the TSV inputs.
class ParseError : public ValidationError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& reason)
      : ValidationError(file + ":" + std::to_string(line) + ": " + reason),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Persisted artifact carries an unexpected format tag or schema version.
class SchemaVersionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// ---------------------------------------------------------------------------
// Concept identity
// ---------------------------------------------------------------------------

/// Opaque normalized concept identifier. Non-empty, no whitespace, compared
/// byte-for-byte.
class ConceptId {
 public:
  ConceptId() = default;
  explicit ConceptId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw ValidationError("concept id must be non-empty");
    for (unsigned char c : value_) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
          c == '\f') {
        throw ValidationError("concept id contains whitespace: '" + value_ +
                              "'");
      }
    }
  }

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const ConceptId&, const ConceptId&) = default;
  friend std::strong_ordering operator<=>(const ConceptId& a,
                                          const ConceptId& b) {
    return a.value_.compare(b.value_) <=> 0;
  }
  friend std::ostream& operator<<(std::ostream& os, const ConceptId& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

/// Unordered concept pair, stored canonically with a < b.
struct ConceptPair {
  ConceptId a;
  ConceptId b;

  friend bool operator==(const ConceptPair&, const ConceptPair&) = default;
  friend auto operator<=>(const ConceptPair&, const ConceptPair&) = default;
};

inline ConceptPair make_pair(ConceptId x, ConceptId y) {
  if (x == y) throw ValidationError("self-loop pair on '" + x.str() + "'");
  if (y < x) std::swap(x, y);
  return ConceptPair{std::move(x), std::move(y)};
}

inline std::string to_string(const ConceptPair& p) {
  return "(" + p.a.str() + ", " + p.b.str() + ")";
}

// ---------------------------------------------------------------------------
// Stable hashing and seeds
// ---------------------------------------------------------------------------

/// 64-bit FNV-1a. Stable across platforms and runs; used for content hashes
/// and seed derivation, never for security.
class StableHash {
 public:
  StableHash() = default;
  explicit StableHash(std::uint64_t basis) { add(basis); }

  StableHash& add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
    // Length terminator keeps ("ab","c") distinct from ("a","bc").
    add_raw(bytes.size());
    return *this;
  }
  StableHash& add(std::uint64_t v) {
    add_raw(v);
    return *this;
  }
  StableHash& add(std::int64_t v) { return add(static_cast<std::uint64_t>(v)); }
  StableHash& add(int v) { return add(static_cast<std::int64_t>(v)); }

  std::uint64_t digest() const noexcept { return state_; }

 private:
  void add_raw(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffu;
      state_ *= kPrime;
    }
  }

  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-stage seed from (master, stage name). Adding a stage never perturbs the
/// seeds of existing ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) {
  return splitmix64(StableHash(master).add(stage).digest());
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Seeded splitmix64 stream with portable derived draws. The std
/// distributions are implementation-defined, so every draw is built directly
/// from the raw 64-bit output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    const std::uint64_t out = splitmix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  /// In-place Fisher-Yates over the first k slots (partial shuffle). After
  /// the call items[0..k) is a uniform sample without replacement.
  template <class T>
  void partial_shuffle(std::vector<T>& items, std::size_t k) {
    k = std::min(k, items.size());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(items.size() - i));
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

enum class LogLevel { info, warning };

namespace log {

using Sink = std::function<void(LogLevel, const std::string&)>;

namespace detail {
inline std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}
inline Sink& sink() {
  static Sink s = [](LogLevel level, const std::string& msg) {
    std::cerr << (level == LogLevel::warning ? "[warn] " : "[info] ") << msg
              << '\n';
  };
  return s;
}
}  // namespace detail

/// Replaces the process-wide sink; returns the previous one.
inline Sink set_sink(Sink s) {
  std::lock_guard lock(detail::sink_mutex());
  std::swap(detail::sink(), s);
  return s;
}

inline void emit(LogLevel level, const std::string& msg) {
  std::lock_guard lock(detail::sink_mutex());
  if (detail::sink()) detail::sink()(level, msg);
}

inline void warn(const std::string& msg) { emit(LogLevel::warning, msg); }
inline void info(const std::string& msg) { emit(LogLevel::info, msg); }

/// Captures warnings for the lifetime of the object (tests).
class ScopedCapture {
 public:
  ScopedCapture()
      : previous_(set_sink([this](LogLevel level, const std::string& msg) {
          if (level == LogLevel::warning) warnings_.push_back(msg);
        })) {}
  ~ScopedCapture() { set_sink(std::move(previous_)); }
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::string> warnings_;
  Sink previous_;
};

}  // namespace log

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

namespace text {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Shortest decimal representation that round-trips a double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace text

}  // namespace dyport
