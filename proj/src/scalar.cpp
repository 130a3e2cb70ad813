#include "lipctl/scalar.hpp"

#include <algorithm>
#include <cctype>

#include "lipctl/errors.hpp"

namespace lipctl {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

Integer parse_integer(std::string_view s, std::string_view whole) {
  std::string_view body = s;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) body.remove_prefix(1);
  if (!all_digits(body)) throw InputError("not a rational number: '" + std::string(whole) + "'");
  // mpz does not accept a leading '+'
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  return Integer(std::string(s), 10);
}

}  // namespace

Scalar ratio(long num, long den) {
  if (den == 0) throw InputError("zero denominator");
  Scalar q(num, den);
  q.canonicalize();
  return q;
}

Scalar parse_scalar(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw InputError("empty rational number");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Integer num = parse_integer(s.substr(0, slash), text);
    std::string_view den_text = s.substr(slash + 1);
    if (!all_digits(den_text)) throw InputError("bad denominator in '" + std::string(text) + "'");
    Integer den(std::string(den_text), 10);
    if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    Scalar q(num, den);
    q.canonicalize();
    return q;
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = s.substr(0, dot);
    std::string_view frac_part = s.substr(dot + 1);
    bool negative = !int_part.empty() && int_part.front() == '-';
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) int_part.remove_prefix(1);
    if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      throw InputError("not a rational number: '" + std::string(text) + "'");
    }
    Integer whole = int_part.empty() ? Integer(0) : Integer(std::string(int_part), 10);
    Integer frac = frac_part.empty() ? Integer(0) : Integer(std::string(frac_part), 10);
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_part.size());
    Scalar q(whole * scale + frac, scale);
    q.canonicalize();
    return negative ? Scalar(-q) : q;
  }
  return Scalar(parse_integer(s, text));
}

std::string format_scalar(const Scalar& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Integer floor_int(const Scalar& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Integer ceil_int(const Scalar& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Scalar pow_int(const Scalar& base, unsigned exponent) {
  Integer num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
  return Scalar(num, den);  // already canonical
}

Scalar norm_inf(std::span<const Scalar> p) {
  Scalar best = 0;
  for (const auto& c : p) {
    Scalar a = abs(c);
    if (a > best) best = a;
  }
  return best;
}

Scalar dist_inf(std::span<const Scalar> a, std::span<const Scalar> b) {
  Scalar best = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    Scalar diff = abs(a[k] - b[k]);
    if (diff > best) best = diff;
  }
  return best;
}

namespace {

// floor((num / den)^(1/n)) for num, den > 0
Integer floor_root(const Integer& num, const Integer& den, unsigned n) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  Integer r;
  mpz_root(r.get_mpz_t(), q.get_mpz_t(), n);
  return r;
}

}  // namespace

Scalar dyadic_root_upper(const Scalar& a, unsigned n, unsigned bits) {
  if (a < 0) throw InputError("dyadic_root_upper of a negative number");
  if (n == 0) throw InputError("zeroth root");
  // smallest integer q with q^n * den >= num * 2^(bits n)
  Integer num = a.get_num();
  num <<= bits * n;
  const Integer& den = a.get_den();
  Integer q = floor_root(num, den, n);
  Integer pw;
  mpz_pow_ui(pw.get_mpz_t(), q.get_mpz_t(), n);
  while (pw * den < num) {
    ++q;
    mpz_pow_ui(pw.get_mpz_t(), q.get_mpz_t(), n);
  }
  Integer scale = 1;
  scale <<= bits;
  Scalar out(q, scale);
  out.canonicalize();
  return out;
}

Scalar dyadic_root_lower(const Scalar& a, unsigned n, unsigned bits) {
  if (a < 0) throw InputError("dyadic_root_lower of a negative number");
  if (n == 0) throw InputError("zeroth root");
  Integer num = a.get_num();
  num <<= bits * n;
  Integer q = floor_root(num, a.get_den(), n);
  Integer scale = 1;
  scale <<= bits;
  Scalar out(q, scale);
  out.canonicalize();
  return out;
}

double to_double(const Scalar& q) { return q.get_d(); }

std::vector<double> to_double(std::span<const Scalar> p) {
  std::vector<double> out;
  out.reserve(p.size());
  for (const auto& c : p) out.push_back(c.get_d());
  return out;
}

}  // namespace lipctl
