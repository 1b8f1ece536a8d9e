#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace airyhier::cas {

using Rational = boost::multiprecision::cpp_rational;

/// Gaussian rational a + b*i with exact components.
struct GRat {
  Rational re{0};
  Rational im{0};

  GRat() = default;
  GRat(long long r) : re(r) {}
  GRat(Rational r) : re(std::move(r)) {}
  GRat(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  static GRat i() { return GRat(Rational(0), Rational(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  GRat operator-() const { return GRat(-re, -im); }
  GRat operator+(const GRat& o) const { return GRat(re + o.re, im + o.im); }
  GRat operator-(const GRat& o) const { return GRat(re - o.re, im - o.im); }
  GRat operator*(const GRat& o) const {
    return GRat(re * o.re - im * o.im, re * o.im + im * o.re);
  }
  GRat operator/(const GRat& o) const {
    Rational d = o.re * o.re + o.im * o.im;
    if (d == 0) throw std::domain_error("GRat division by zero");
    return GRat((re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d);
  }
  bool operator==(const GRat& o) const { return re == o.re && im == o.im; }
};

/// A bracket factor <u^(i), u^(j)> with i <= j.
using Bracket = std::array<int, 2>;

inline Bracket make_bracket(int a, int b) {
  return a <= b ? Bracket{a, b} : Bracket{b, a};
}

/// One additive term of a one-slot expression:
///   c * (t+x)^tx * u^(order) * prod <u^(i),u^(j)>.
/// order == -1 means the term carries no field factor (pure bracket scalar);
/// such terms only occur transiently inside L-applications.
struct Term {
  GRat c;
  int order = 0;
  int tx = 0;
  std::vector<Bracket> brackets;
};

using Expr = std::vector<Term>;

/// One additive term of a two-slot kernel expression S(x,y):
///   c * L(x) * R(y) * prod <u^(i),u^(j)> * prod m_k,
/// where L/R is the unit function (slot == -1) or u^(slot), and m_k denotes
/// the moment scalar <1, u^(k)>. Moments never survive in finished members.
struct Term2 {
  GRat c;
  int left = -1;
  int right = -1;
  std::vector<Bracket> brackets;
  std::vector<int> moments;
};

using Expr2 = std::vector<Term2>;

Expr canonical(Expr e);
Expr2 canonical2(Expr2 e);
Expr add(const Expr& a, const Expr& b);
Expr scale(const Expr& a, const GRat& c);
Expr2 add2(const Expr2& a, const Expr2& b);
Expr2 scale2(const Expr2& a, const GRat& c);

/// Formal t-derivative (Leibniz over field factor, brackets and (t+x)).
Expr d_t(const Expr& e);
Expr2 d_t2(const Expr2& e);

/// Grading weight of a term: (order+1) + sum (i+j+2) + 3*tx; -1-order terms
/// count the brackets only.
int term_weight(const Term& t);
int term_weight2(const Term2& t);

/// Exact formal t-antiderivative by a linear solve over graded candidate
/// monomials. Throws std::runtime_error if the target is not an exact
/// t-derivative within the candidate space.
Expr antideriv_scalar(const Expr& target);
Expr2 antideriv_two_slot(const Expr2& target);

enum class LSign { plus, minus };

/// Apply the recursion operator L+ or L- to a one-slot expression.
Expr apply_L(LSign sign, const Expr& f);

enum class MemberKind { painleve2, mkdv };
enum class OperatorVariant { a11_times_u, a11_times_v };

struct HierarchyMember {
  int n = 0;
  MemberKind kind = MemberKind::painleve2;
  /// Sign s of the (t+x) side as printed: s*(t+x)*u = terms (painleve2),
  /// or s*d v/d t_{2n+1} = s*terms (mkdv). s = (-1)^(n+1).
  int lhs_sign = 1;
  /// The printed right-hand side: painleve2 has leading +u^(2n), mkdv has
  /// leading -v^(2n+1). The mkdv evolution d v/d t_{2n+1} = lhs_sign * terms.
  Expr terms;
  /// Which diagonal product variant reproduced the printed members
  /// (only set by the operator route).
  OperatorVariant variant = OperatorVariant::a11_times_u;
};

HierarchyMember pii_member(int n);
HierarchyMember pii_member_via_operators(int n);
HierarchyMember mkdv_member(int n);

/// The true evolution right-hand side g with d v/d t_{2n+1} = g
/// (undoes the printed-form sign).
Expr mkdv_rhs(const HierarchyMember& m);

/// Explicit form u^(2n) = E(t, x, u, ..., u^(2n-1), brackets); also carries
/// the once-differentiated expression for u^(2n+1).
struct OdeForm {
  int n = 0;
  Expr top;        // expression for u^(2n)
  Expr top_deriv;  // expression for u^(2n+1) = D_t(top)
};

OdeForm to_ode(const HierarchyMember& m);

std::string render(const HierarchyMember& m);
std::string render_expr(const Expr& e, const std::string& field);
std::string to_json(const HierarchyMember& m);

/// Parse the canonical text produced by render_expr back into an Expr
/// (used by the OdeForm round-trip check).
Expr parse_expr(const std::string& s, const std::string& field);

/// The delta-weight collapse <f,g> -> f*g: returns multiset monomials
/// {sorted derivative orders} with coefficients, for structural comparison
/// with the classical hierarchy members.
std::vector<std::pair<Rational, std::vector<int>>> delta_collapse(const Expr& e);

}  // namespace airyhier::cas
