#include "ricci/common.hpp"

#include <cmath>
#include <cstdio>

namespace ricci
{

std::string format_double(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  if (x == 0.0)
    return "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t mix64(std::uint64_t z)
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL)))
{
}

std::uint64_t CounterRng::next_u64()
{
  ++counter_;
  return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform()
{
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open0()
{
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::exponential(double rate)
{
  return -std::log(uniform_open0()) / rate;
}

double CounterRng::normal()
{
  // Box-Muller, one variate per call keeps the stream position simple.
  const double u1 = uniform_open0();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t CounterRng::below(std::size_t n)
{
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

double ordered_sum(const Vector &v)
{
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i)
    s += v[i];
  return s;
}

double ordered_dot(const Vector &a, const Vector &b)
{
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

} // namespace ricci
