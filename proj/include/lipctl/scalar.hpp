#pragma once

#include <gmpxx.h>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lipctl {

/// Exact rational number. Every coordinate, radius and measure in the exact
/// kernel is one of these.
using Scalar = mpq_class;
using Integer = mpz_class;

/// A point in R^k with exact coordinates.
using Point = std::vector<Scalar>;

/// num / den in lowest terms; den must be nonzero.
Scalar ratio(long num, long den);

/// Parses "p/q", "p" or a finite decimal such as "-0.125". Throws InputError.
Scalar parse_scalar(std::string_view text);

/// Canonical "num/den" form; the denominator is always written, so 3 is "3/1".
std::string format_scalar(const Scalar& q);

Integer floor_int(const Scalar& q);
Integer ceil_int(const Scalar& q);
Scalar pow_int(const Scalar& base, unsigned exponent);

/// Max norm of a point.
Scalar norm_inf(std::span<const Scalar> p);
Scalar dist_inf(std::span<const Scalar> a, std::span<const Scalar> b);

/// Smallest value of the form q / 2^bits with (q / 2^bits)^n >= a, for a >= 0.
Scalar dyadic_root_upper(const Scalar& a, unsigned n, unsigned bits);

/// Largest value of the form q / 2^bits with (q / 2^bits)^n <= a, for a >= 0.
Scalar dyadic_root_lower(const Scalar& a, unsigned n, unsigned bits);

double to_double(const Scalar& q);
std::vector<double> to_double(std::span<const Scalar> p);

}  // namespace lipctl
