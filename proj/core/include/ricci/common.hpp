// Shared vocabulary types for the ricci-lab core library.

#ifndef RICCI_COMMON_HPP
#define RICCI_COMMON_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ricci
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr const char *kSchemaVersion = "ricci-lab/1";

/// Raised for violated preconditions and unusable inputs.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Decimal rendering with 17 significant digits; used by every file writer.
std::string format_double(double x);

/// Counter-based generator: output k of stream s is a pure function of (seed, s, k).
/// Streams are independent so per-path sampling parallelizes deterministically.
class CounterRng
{
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1].
  double uniform_open0();
  double exponential(double rate);
  double normal();
  std::size_t below(std::size_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

/// Sum with a fixed left-to-right order (Eigen's reductions may vectorize differently).
double ordered_sum(const Vector &v);
double ordered_dot(const Vector &a, const Vector &b);

} // namespace ricci

#endif
