#include "airyhier/cas.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <json.hpp>

namespace airyhier::cas {

namespace {

// ---------------------------------------------------------------------------
// Canonical ordering
// ---------------------------------------------------------------------------

bool bracket_list_less(const std::vector<Bracket>& a, const std::vector<Bracket>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

// Order: (t+x) power descending (puts the (t+x)u term first in ODE forms),
// then derivative order descending, then bracket count ascending, then
// bracket list lexicographic.
bool term_less(const Term& a, const Term& b) {
  if (a.tx != b.tx) return a.tx > b.tx;
  if (a.order != b.order) return a.order > b.order;
  if (a.brackets.size() != b.brackets.size()) return a.brackets.size() < b.brackets.size();
  return a.brackets < b.brackets;
}

bool term2_less(const Term2& a, const Term2& b) {
  if (a.left != b.left) return a.left > b.left;
  if (a.right != b.right) return a.right > b.right;
  if (bracket_list_less(a.brackets, b.brackets)) return true;
  if (bracket_list_less(b.brackets, a.brackets)) return false;
  return a.moments < b.moments;
}

bool same_monomial(const Term& a, const Term& b) {
  return a.order == b.order && a.tx == b.tx && a.brackets == b.brackets;
}

bool same_monomial2(const Term2& a, const Term2& b) {
  return a.left == b.left && a.right == b.right && a.brackets == b.brackets &&
         a.moments == b.moments;
}

std::string monomial_key(const Term& t) {
  std::ostringstream os;
  os << 'o' << t.order << 'x' << t.tx << 'b';
  for (const auto& br : t.brackets) os << br[0] << ',' << br[1] << ';';
  return os.str();
}

std::string monomial_key2(const Term2& t) {
  std::ostringstream os;
  os << 'l' << t.left << 'r' << t.right << 'b';
  for (const auto& br : t.brackets) os << br[0] << ',' << br[1] << ';';
  os << 'm';
  for (int a : t.moments) os << a << ';';
  return os.str();
}

}  // namespace

Expr canonical(Expr e) {
  for (auto& t : e) {
    for (auto& br : t.brackets) br = make_bracket(br[0], br[1]);
    std::sort(t.brackets.begin(), t.brackets.end());
  }
  std::sort(e.begin(), e.end(), term_less);
  Expr out;
  for (auto& t : e) {
    if (!out.empty() && same_monomial(out.back(), t)) {
      out.back().c = out.back().c + t.c;
      if (out.back().c.is_zero()) out.pop_back();
    } else if (!t.c.is_zero()) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

Expr2 canonical2(Expr2 e) {
  for (auto& t : e) {
    for (auto& br : t.brackets) br = make_bracket(br[0], br[1]);
    std::sort(t.brackets.begin(), t.brackets.end());
    std::sort(t.moments.begin(), t.moments.end());
  }
  std::sort(e.begin(), e.end(), term2_less);
  Expr2 out;
  for (auto& t : e) {
    if (!out.empty() && same_monomial2(out.back(), t)) {
      out.back().c = out.back().c + t.c;
      if (out.back().c.is_zero()) out.pop_back();
    } else if (!t.c.is_zero()) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

Expr add(const Expr& a, const Expr& b) {
  Expr e = a;
  e.insert(e.end(), b.begin(), b.end());
  return canonical(std::move(e));
}

Expr scale(const Expr& a, const GRat& c) {
  Expr e = a;
  for (auto& t : e) t.c = t.c * c;
  return canonical(std::move(e));
}

Expr2 add2(const Expr2& a, const Expr2& b) {
  Expr2 e = a;
  e.insert(e.end(), b.begin(), b.end());
  return canonical2(std::move(e));
}

Expr2 scale2(const Expr2& a, const GRat& c) {
  Expr2 e = a;
  for (auto& t : e) t.c = t.c * c;
  return canonical2(std::move(e));
}

// ---------------------------------------------------------------------------
// Formal t-derivative
// ---------------------------------------------------------------------------

Expr d_t(const Expr& e) {
  Expr out;
  for (const auto& t : e) {
    if (t.order >= 0) {
      Term d = t;
      ++d.order;
      out.push_back(std::move(d));
    }
    for (std::size_t k = 0; k < t.brackets.size(); ++k) {
      for (int slot = 0; slot < 2; ++slot) {
        Term d = t;
        d.brackets[k] = make_bracket(t.brackets[k][slot] + 1, t.brackets[k][1 - slot]);
        out.push_back(std::move(d));
      }
    }
    if (t.tx > 0) {
      Term d = t;
      d.c = d.c * GRat(t.tx);
      --d.tx;
      out.push_back(std::move(d));
    }
  }
  return canonical(std::move(out));
}

Expr2 d_t2(const Expr2& e) {
  Expr2 out;
  for (const auto& t : e) {
    if (t.left >= 0) {
      Term2 d = t;
      ++d.left;
      out.push_back(std::move(d));
    }
    if (t.right >= 0) {
      Term2 d = t;
      ++d.right;
      out.push_back(std::move(d));
    }
    for (std::size_t k = 0; k < t.brackets.size(); ++k) {
      for (int slot = 0; slot < 2; ++slot) {
        Term2 d = t;
        d.brackets[k] = make_bracket(t.brackets[k][slot] + 1, t.brackets[k][1 - slot]);
        out.push_back(std::move(d));
      }
    }
    for (std::size_t k = 0; k < t.moments.size(); ++k) {
      Term2 d = t;
      ++d.moments[k];
      out.push_back(std::move(d));
    }
  }
  return canonical2(std::move(out));
}

// ---------------------------------------------------------------------------
// Grading
// ---------------------------------------------------------------------------

int term_weight(const Term& t) {
  int w = (t.order >= 0 ? t.order + 1 : 0) + 3 * t.tx;
  for (const auto& br : t.brackets) w += br[0] + br[1] + 2;
  return w;
}

int term_weight2(const Term2& t) {
  int w = (t.left >= 0 ? t.left + 1 : 0) + (t.right >= 0 ? t.right + 1 : 0);
  for (const auto& br : t.brackets) w += br[0] + br[1] + 2;
  for (int a : t.moments) w += a + 1;
  return w;
}

// ---------------------------------------------------------------------------
// Antiderivative by exact linear solve over graded candidates
// ---------------------------------------------------------------------------

namespace {

// All multisets of brackets (nondecreasing lex) with total weight exactly w.
void enum_bracket_sets(int w, const Bracket& min_b, std::vector<Bracket>& cur,
                       std::vector<std::vector<Bracket>>& out) {
  if (w == 0) {
    out.push_back(cur);
    return;
  }
  for (int bw = 2; bw <= w; ++bw) {
    for (int i = 0; 2 * i <= bw - 2; ++i) {
      Bracket b{i, bw - 2 - i};
      if (b < min_b) continue;
      cur.push_back(b);
      enum_bracket_sets(w - bw, b, cur, out);
      cur.pop_back();
    }
  }
}

std::vector<std::vector<Bracket>> bracket_sets_of_weight(int w) {
  std::vector<std::vector<Bracket>> out;
  std::vector<Bracket> cur;
  if (w >= 0) enum_bracket_sets(w, Bracket{0, 0}, cur, out);
  return out;
}

// Exact solve of A x = rhs (rows indexed by monomial keys). Throws if
// inconsistent. Columns are expected independent (D_t is injective on
// positive-weight homogeneous spaces); an underdetermined system still
// returns one valid solution.
std::vector<GRat> solve_exact(std::map<std::string, std::vector<GRat>>& rows,
                              std::map<std::string, GRat>& rhs, std::size_t ncols,
                              const char* what) {
  std::size_t nrows = rows.size();
  std::vector<std::vector<GRat>> A;
  std::vector<GRat> b;
  A.reserve(nrows);
  b.reserve(nrows);
  for (auto& [key, row] : rows) {
    row.resize(ncols);
    A.push_back(std::move(row));
    auto it = rhs.find(key);
    b.push_back(it == rhs.end() ? GRat() : it->second);
  }
  // Any rhs monomial that never appears in a candidate image is unmatchable.
  for (auto& [key, val] : rhs) {
    if (!rows.count(key) && !val.is_zero())
      throw std::runtime_error(std::string("antiderivative inconsistent (") + what +
                               "): target monomial outside candidate image");
  }
  std::vector<GRat> x(ncols);
  std::vector<int> pivot_col(nrows, -1);
  std::size_t rank = 0;
  for (std::size_t col = 0; col < ncols && rank < nrows; ++col) {
    std::size_t sel = rank;
    while (sel < nrows && A[sel][col].is_zero()) ++sel;
    if (sel == nrows) continue;
    std::swap(A[sel], A[rank]);
    std::swap(b[sel], b[rank]);
    GRat inv = GRat(1) / A[rank][col];
    for (std::size_t j = col; j < ncols; ++j) A[rank][j] = A[rank][j] * inv;
    b[rank] = b[rank] * inv;
    for (std::size_t r = 0; r < nrows; ++r) {
      if (r == rank || A[r][col].is_zero()) continue;
      GRat f = A[r][col];
      for (std::size_t j = col; j < ncols; ++j) A[r][j] = A[r][j] - f * A[rank][j];
      b[r] = b[r] - f * b[rank];
    }
    pivot_col[rank] = static_cast<int>(col);
    ++rank;
  }
  for (std::size_t r = rank; r < nrows; ++r) {
    if (!b[r].is_zero())
      throw std::runtime_error(std::string("antiderivative inconsistent (") + what +
                               "): residual after elimination");
  }
  for (std::size_t r = 0; r < rank; ++r) x[pivot_col[r]] = b[r];
  return x;
}

}  // namespace

Expr antideriv_scalar(const Expr& target) {
  Expr tgt = canonical(target);
  if (tgt.empty()) return {};
  // Group by grading weight; each homogeneous block solves independently.
  std::map<int, Expr> blocks;
  for (const auto& t : tgt) {
    if (t.order != -1 || t.tx != 0)
      throw std::runtime_error("antideriv_scalar: target must be a pure bracket scalar");
    blocks[term_weight(t)].push_back(t);
  }
  Expr result;
  for (auto& [w, block] : blocks) {
    auto sets = bracket_sets_of_weight(w - 1);
    std::map<std::string, std::vector<GRat>> rows;
    std::map<std::string, GRat> rhs;
    for (std::size_t c = 0; c < sets.size(); ++c) {
      Term cand;
      cand.c = GRat(1);
      cand.order = -1;
      cand.brackets = sets[c];
      for (const auto& img : d_t(Expr{cand})) {
        auto& row = rows[monomial_key(img)];
        row.resize(sets.size());
        row[c] = img.c;
      }
    }
    for (const auto& t : block) rhs[monomial_key(t)] = t.c;
    auto x = solve_exact(rows, rhs, sets.size(), "scalar");
    for (std::size_t c = 0; c < sets.size(); ++c) {
      if (x[c].is_zero()) continue;
      Term t;
      t.c = x[c];
      t.order = -1;
      t.brackets = sets[c];
      result.push_back(std::move(t));
    }
  }
  return canonical(std::move(result));
}

Expr2 antideriv_two_slot(const Expr2& target) {
  Expr2 tgt = canonical2(target);
  if (tgt.empty()) return {};
  std::map<int, Expr2> blocks;
  for (const auto& t : tgt) {
    if (t.left < 0 || t.right < 0 || !t.moments.empty())
      throw std::runtime_error("antideriv_two_slot: target must be u^(p)(x)u^(q)(y) terms");
    blocks[term_weight2(t)].push_back(t);
  }
  Expr2 result;
  for (auto& [w, block] : blocks) {
    // Candidates u^(p)(x) u^(q)(y) * brackets with (p+1)+(q+1)+wb = w-1.
    std::vector<Term2> cands;
    for (int p = 0; p + 2 <= w - 1; ++p) {
      for (int q = 0; p + q + 2 <= w - 1; ++q) {
        for (auto& bs : bracket_sets_of_weight(w - 1 - (p + 1) - (q + 1))) {
          Term2 cand;
          cand.c = GRat(1);
          cand.left = p;
          cand.right = q;
          cand.brackets = bs;
          cands.push_back(std::move(cand));
        }
      }
    }
    std::map<std::string, std::vector<GRat>> rows;
    std::map<std::string, GRat> rhs;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      for (const auto& img : d_t2(Expr2{cands[c]})) {
        auto& row = rows[monomial_key2(img)];
        row.resize(cands.size());
        row[c] = img.c;
      }
    }
    for (const auto& t : block) rhs[monomial_key2(t)] = t.c;
    auto x = solve_exact(rows, rhs, cands.size(), "two-slot");
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (x[c].is_zero()) continue;
      Term2 t = cands[c];
      t.c = x[c];
      result.push_back(std::move(t));
    }
  }
  return canonical2(std::move(result));
}

// ---------------------------------------------------------------------------
// Recursion operators L+/L-
// ---------------------------------------------------------------------------

Expr apply_L(LSign sign, const Expr& f) {
  const GRat I = GRat::i();
  for (const auto& t : f) {
    if (t.order < 0 || t.tx != 0)
      throw std::runtime_error("apply_L: operand must carry a field factor and no (t+x)");
  }
  // i * D_t f
  Expr result = scale(d_t(f), I);

  // Rank-two kernel term: {u,f} (L+) or [u,f] (L-), formally t-integrated,
  // then contracted in the second slot with u.
  Expr2 kernel;
  const GRat comm_sign = (sign == LSign::plus) ? GRat(1) : GRat(-1);
  for (const auto& t : f) {
    Term2 a;  // u(x) * f_term(y)
    a.c = t.c;
    a.left = 0;
    a.right = t.order;
    a.brackets = t.brackets;
    kernel.push_back(a);
    Term2 b;  // f_term(x) * u(y), sign + for {.,.}, - for [.,.]
    b.c = t.c * comm_sign;
    b.left = t.order;
    b.right = 0;
    b.brackets = t.brackets;
    kernel.push_back(b);
  }
  Expr2 P = antideriv_two_slot(canonical2(std::move(kernel)));
  Expr contracted;
  for (const auto& t : P) {
    Term c;
    c.c = t.c;
    c.order = t.left;
    c.brackets = t.brackets;
    c.brackets.push_back(make_bracket(t.right, 0));
    contracted.push_back(std::move(c));
  }
  // L+ : -i <D_t^{-1}{u,f}(x,.), u>;  L- : +i <D_t^{-1}[u,f](x,.), u>
  result = add(result, scale(contracted, (sign == LSign::plus) ? -I : I));

  if (sign == LSign::plus) {
    // -2i (D_t^{-1}<u,f>) u
    Expr scalar;
    for (const auto& t : f) {
      Term s;
      s.c = t.c;
      s.order = -1;
      s.brackets = t.brackets;
      s.brackets.push_back(make_bracket(0, t.order));
      scalar.push_back(std::move(s));
    }
    Expr Q = antideriv_scalar(canonical(std::move(scalar)));
    for (auto& t : Q) t.order = 0;  // multiply by u
    result = add(result, scale(Q, GRat(Rational(-2)) * I));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Members
// ---------------------------------------------------------------------------

namespace {

void validate_member(const HierarchyMember& m) {
  const int lead_order = (m.kind == MemberKind::painleve2) ? 2 * m.n : 2 * m.n + 1;
  const int target_weight = (m.kind == MemberKind::painleve2) ? 2 * m.n + 1 : 2 * m.n + 2;
  bool found_leading = false;
  for (const auto& t : m.terms) {
    if (!t.c.is_real())
      throw std::runtime_error("hierarchy member has a non-real coefficient");
    if (t.tx != 0)
      throw std::runtime_error("hierarchy member right side carries (t+x)");
    if (term_weight(t) != target_weight)
      throw std::runtime_error("hierarchy member is not grading-homogeneous");
    if (t.order == lead_order) {
      const GRat want = (m.kind == MemberKind::painleve2) ? GRat(1) : GRat(-1);
      if (!t.brackets.empty() || !(t.c == want))
        throw std::runtime_error("hierarchy member leading term malformed");
      found_leading = true;
    }
  }
  if (!found_leading) throw std::runtime_error("hierarchy member lacks its leading term");
}

}  // namespace

HierarchyMember pii_member(int n) {
  if (n < 1 || n > 8) throw std::invalid_argument("pii_member: require 1 <= n <= 8");
  Expr e{Term{GRat(1), 0, 0, {}}};  // u
  for (int k = 0; k < n; ++k) {
    e = apply_L(LSign::minus, e);
    e = apply_L(LSign::plus, e);
  }
  // -(t+x)u = e; multiply both sides by -lhs_sign so the printed form
  // lhs_sign*(t+x)u = terms has leading +u^(2n).
  HierarchyMember m;
  m.n = n;
  m.kind = MemberKind::painleve2;
  m.lhs_sign = (n % 2 == 1) ? 1 : -1;
  m.terms = scale(e, GRat(-m.lhs_sign));
  validate_member(m);
  return m;
}

Expr mkdv_rhs(const HierarchyMember& m) {
  if (m.kind != MemberKind::mkdv) throw std::invalid_argument("mkdv_rhs: wrong kind");
  return scale(m.terms, GRat(m.lhs_sign));
}

HierarchyMember mkdv_member(int n) {
  if (n < 1 || n > 8) throw std::invalid_argument("mkdv_member: require 1 <= n <= 8");
  Expr g{Term{GRat(1), 1, 0, {}}};  // dv/dt1
  for (int k = 0; k < n; ++k) {
    g = apply_L(LSign::plus, g);
    g = apply_L(LSign::minus, g);
  }
  HierarchyMember m;
  m.n = n;
  m.kind = MemberKind::mkdv;
  m.lhs_sign = (n % 2 == 1) ? 1 : -1;
  m.terms = scale(g, GRat(m.lhs_sign));
  validate_member(m);
  return m;
}

// ---------------------------------------------------------------------------
// Operator-recursion route (independent cross-check)
// ---------------------------------------------------------------------------

namespace {

// Composition (S o T)(x,y) = integral S(x,z) T(z,y) dsigma(z): contract the
// right slot of S with the left slot of T. unit.unit -> 1 (unit mass),
// unit.u^(b) / u^(a).unit -> moment symbol, u^(a).u^(b) -> bracket.
Expr2 compose2(const Expr2& S, const Expr2& T) {
  Expr2 out;
  for (const auto& s : S) {
    for (const auto& t : T) {
      Term2 r;
      r.c = s.c * t.c;
      r.left = s.left;
      r.right = t.right;
      r.brackets = s.brackets;
      r.brackets.insert(r.brackets.end(), t.brackets.begin(), t.brackets.end());
      r.moments = s.moments;
      r.moments.insert(r.moments.end(), t.moments.begin(), t.moments.end());
      if (s.right >= 0 && t.left >= 0) {
        r.brackets.push_back(make_bracket(s.right, t.left));
      } else if (s.right >= 0) {
        r.moments.push_back(s.right);
      } else if (t.left >= 0) {
        r.moments.push_back(t.left);
      }  // unit.unit: total mass 1, no factor
      out.push_back(std::move(r));
    }
  }
  return canonical2(std::move(out));
}

// Runs the coupled recursion up to A_{2n+1}; returns A^{12}_{2n+1}.
Expr2 operator_chain(int n, OperatorVariant variant) {
  const GRat I = GRat::i();
  const int K = 2 * n + 1;
  std::vector<Expr2> A11(K + 1), A12(K + 1), A21(K + 1), A22(K + 1);
  const Expr2 U{Term2{GRat(1), 0, -1, {}, {}}};   // u(x) * 1(y)
  const Expr2 V{Term2{GRat(1), -1, 0, {}, {}}};   // 1(x) * u(y)
  A12[1] = scale2(U, -I);
  A21[1] = scale2(V, I);
  for (int k = 1; k < K; ++k) {
    Expr2 s11, s22;
    for (int j = 1; j <= k; ++j) {
      s11 = add2(s11, add2(compose2(A11[j], A11[k + 1 - j]),
                           compose2(A12[j], A21[k + 1 - j])));
      s22 = add2(s22, add2(compose2(A22[j], A22[k + 1 - j]),
                           compose2(A21[j], A12[k + 1 - j])));
    }
    A11[k + 1] = scale2(s11, -I);
    A22[k + 1] = scale2(s22, I);
    const Expr2& tail12 = (variant == OperatorVariant::a11_times_u) ? U : V;
    A12[k + 1] = add2(scale2(d_t2(A12[k]), I),
                      add2(scale2(compose2(U, A22[k]), GRat(-1)),
                           compose2(A11[k], tail12)));
    A21[k + 1] = add2(scale2(d_t2(A21[k]), -I),
                      add2(scale2(compose2(V, A11[k]), GRat(-1)),
                           compose2(A22[k], V)));
  }
  return A12[K];
}

// A localized final kernel must be Z(x) * 1(y) with no moment symbols.
bool is_localized(const Expr2& e) {
  for (const auto& t : e)
    if (t.right != -1 || !t.moments.empty()) return false;
  return true;
}

}  // namespace

HierarchyMember pii_member_via_operators(int n) {
  if (n < 1 || n > 8)
    throw std::invalid_argument("pii_member_via_operators: require 1 <= n <= 8");
  OperatorVariant variant = OperatorVariant::a11_times_u;
  Expr2 final12 = operator_chain(n, variant);
  if (!is_localized(final12)) {
    variant = OperatorVariant::a11_times_v;
    final12 = operator_chain(n, variant);
    if (!is_localized(final12))
      throw std::runtime_error(
          "operator route: neither recursion variant localizes A^{12}_{2n+1}");
  }
  // A^{12}_{2n+1}(x,y) = i (t+x) u(x) * 1(y) once localized; strip the i and
  // the unit slot to read the member: (t+x)u = E.
  Expr E;
  for (const auto& t : final12) {
    Term r;
    r.c = t.c * (GRat() - GRat::i());  // multiply by -i = 1/i
    r.order = t.left;
    r.brackets = t.brackets;
    E.push_back(std::move(r));
  }
  HierarchyMember m;
  m.n = n;
  m.kind = MemberKind::painleve2;
  m.lhs_sign = (n % 2 == 1) ? 1 : -1;
  m.terms = scale(canonical(std::move(E)), GRat(m.lhs_sign));
  m.variant = variant;
  validate_member(m);
  return m;
}

// ---------------------------------------------------------------------------
// ODE compilation
// ---------------------------------------------------------------------------

OdeForm to_ode(const HierarchyMember& m) {
  if (m.kind != MemberKind::painleve2)
    throw std::invalid_argument("to_ode: painleve2 members only");
  OdeForm ode;
  ode.n = m.n;
  // lhs_sign*(t+x)u = u^(2n) + rest  =>  u^(2n) = lhs_sign*(t+x)u - rest.
  Expr top;
  top.push_back(Term{GRat(m.lhs_sign), 0, 1, {}});
  for (const auto& t : m.terms) {
    if (t.order == 2 * m.n) {
      if (!t.brackets.empty() || !(t.c == GRat(1)))
        throw std::runtime_error("to_ode: leading term is not linear in u^(2n)");
      continue;
    }
    Term neg = t;
    neg.c = -neg.c;
    top.push_back(std::move(neg));
  }
  ode.top = canonical(std::move(top));
  ode.top_deriv = d_t(ode.top);
  return ode;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string field_string(const std::string& field, int order) {
  if (order <= 3) return field + std::string(static_cast<std::size_t>(order), '\'');
  return field + "^(" + std::to_string(order) + ")";
}

std::string rational_string(const Rational& r) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(r);
  if (boost::multiprecision::denominator(r) != 1)
    os << '/' << boost::multiprecision::denominator(r);
  return os.str();
}

std::string term_body(const Term& t, const std::string& field) {
  std::vector<std::string> factors;
  Rational mag = boost::multiprecision::abs(t.c.re);
  if (mag != 1) factors.push_back(rational_string(mag));
  for (int k = 0; k < t.tx; ++k) factors.push_back("(t+x)");
  if (t.order >= 0) factors.push_back(field_string(field, t.order));
  for (std::size_t k = 0; k < t.brackets.size();) {
    std::size_t j = k;
    while (j < t.brackets.size() && t.brackets[j] == t.brackets[k]) ++j;
    std::string b = "<" + field_string(field, t.brackets[k][0]) + "," +
                    field_string(field, t.brackets[k][1]) + ">";
    if (j - k > 1) b += "^" + std::to_string(j - k);
    factors.push_back(std::move(b));
    k = j;
  }
  if (factors.empty()) factors.push_back("1");
  std::string out = factors[0];
  for (std::size_t k = 1; k < factors.size(); ++k) out += "*" + factors[k];
  return out;
}

}  // namespace

std::string render_expr(const Expr& e, const std::string& field) {
  Expr c = canonical(e);
  if (c.empty()) return "0";
  std::string out;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Term& t = c[k];
    if (!t.c.is_real())
      throw std::runtime_error("render_expr: non-real coefficient");
    const bool neg = t.c.re < 0;
    if (k == 0)
      out += neg ? "-" : "";
    else
      out += neg ? " - " : " + ";
    out += term_body(t, field);
  }
  return out;
}

std::string render(const HierarchyMember& m) {
  std::string lhs;
  if (m.kind == MemberKind::painleve2)
    lhs = (m.lhs_sign == 1 ? "(t+x)*u" : "-(t+x)*u");
  else
    lhs = (m.lhs_sign == 1 ? "" : "-") + std::string("dv/dt") +
          std::to_string(2 * m.n + 1);
  return lhs + " = " + render_expr(m.terms, m.kind == MemberKind::painleve2 ? "u" : "v");
}

std::string to_json(const HierarchyMember& m) {
  nlohmann::ordered_json j;
  j["n"] = m.n;
  j["kind"] = (m.kind == MemberKind::painleve2) ? "pii" : "mkdv";
  j["lhs_sign"] = m.lhs_sign;
  j["lhs"] = (m.kind == MemberKind::painleve2)
                 ? std::string(m.lhs_sign == 1 ? "(t+x)*u" : "-(t+x)*u")
                 : std::string(m.lhs_sign == 1 ? "" : "-") + "dv/dt" +
                       std::to_string(2 * m.n + 1);
  if (m.kind == MemberKind::painleve2)
    j["operator_variant"] =
        (m.variant == OperatorVariant::a11_times_u) ? "a11_times_u" : "a11_times_v";
  auto terms = nlohmann::ordered_json::array();
  for (const auto& t : canonical(m.terms)) {
    nlohmann::ordered_json jt;
    if (!t.c.is_real()) throw std::runtime_error("to_json: non-real coefficient");
    jt["coeff_num"] = boost::multiprecision::numerator(t.c.re).convert_to<std::int64_t>();
    jt["coeff_den"] = boost::multiprecision::denominator(t.c.re).convert_to<std::int64_t>();
    jt["derivative_order"] = t.order;
    auto brackets = nlohmann::ordered_json::array();
    for (const auto& br : t.brackets) brackets.push_back({br[0], br[1]});
    jt["brackets"] = brackets;
    jt["t_plus_x_power"] = t.tx;
    terms.push_back(std::move(jt));
  }
  j["terms"] = terms;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Parsing (round-trip of the canonical text format)
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  const std::string& s;
  const std::string& field;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && s[pos] == ' ') ++pos;
  }

  bool consume(const std::string& tok) {
    if (s.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }

  Rational parse_rational() {
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) throw std::runtime_error("parse_expr: expected digits at " + s.substr(start));
    Rational num(s.substr(start, pos - start));
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      std::size_t d0 = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      return num / Rational(s.substr(d0, pos - d0));
    }
    return num;
  }

  // field name with primes or ^(k); returns order or -1 if not at a field.
  int try_field() {
    if (s.compare(pos, field.size(), field) != 0) return -1;
    std::size_t p = pos + field.size();
    int order = 0;
    if (p < s.size() && s[p] == '^' && p + 1 < s.size() && s[p + 1] == '(') {
      std::size_t q = p + 2, d0 = q;
      while (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) ++q;
      if (q >= s.size() || s[q] != ')') throw std::runtime_error("parse_expr: bad ^(k)");
      order = std::stoi(s.substr(d0, q - d0));
      p = q + 1;
    } else {
      while (p < s.size() && s[p] == '\'') {
        ++order;
        ++p;
      }
    }
    pos = p;
    return order;
  }

  Term parse_term() {
    Term t;
    t.c = GRat(1);
    any_field = false;
    bool any = false;
    for (;;) {
      skip_ws();
      if (consume("(t+x)")) {
        ++t.tx;
      } else if (pos < s.size() && s[pos] == '<') {
        ++pos;
        int i = try_field();
        if (i < 0 || !consume(",")) throw std::runtime_error("parse_expr: bad bracket");
        int j = try_field();
        if (j < 0 || !consume(">")) throw std::runtime_error("parse_expr: bad bracket");
        int rep = 1;
        if (pos < s.size() && s[pos] == '^' && pos + 1 < s.size() &&
            std::isdigit(static_cast<unsigned char>(s[pos + 1]))) {
          ++pos;
          std::size_t d0 = pos;
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
          rep = std::stoi(s.substr(d0, pos - d0));
        }
        for (int r = 0; r < rep; ++r) t.brackets.push_back(make_bracket(i, j));
      } else if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        t.c = t.c * GRat(parse_rational());
      } else {
        int order = try_field();
        if (order < 0) throw std::runtime_error("parse_expr: unexpected token at '" +
                                                s.substr(pos) + "'");
        if (any_field)
          throw std::runtime_error("parse_expr: multiple field factors in a term");
        t.order = order;
        any_field = true;
      }
      any = true;
      skip_ws();
      if (!consume("*")) break;
    }
    if (!any) throw std::runtime_error("parse_expr: empty term");
    if (!any_field) t.order = -1;
    return t;
  }

  bool any_field = false;

  Expr parse() {
    Expr e;
    skip_ws();
    if (consume("0")) {
      skip_ws();
      if (pos == s.size()) return e;
      throw std::runtime_error("parse_expr: trailing input after 0");
    }
    int sign = 1;
    if (consume("-")) sign = -1;
    for (;;) {
      Term t = parse_term();
      t.c = t.c * GRat(sign);
      e.push_back(std::move(t));
      skip_ws();
      if (pos == s.size()) break;
      if (consume("+"))
        sign = 1;
      else if (consume("-"))
        sign = -1;
      else
        throw std::runtime_error("parse_expr: expected +/- at '" + s.substr(pos) + "'");
    }
    return canonical(std::move(e));
  }
};

}  // namespace

Expr parse_expr(const std::string& s, const std::string& field) {
  Parser p{s, field};
  return p.parse();
}

// ---------------------------------------------------------------------------
// Delta collapse <f,g> -> f*g
// ---------------------------------------------------------------------------

std::vector<std::pair<Rational, std::vector<int>>> delta_collapse(const Expr& e) {
  std::map<std::vector<int>, Rational> acc;
  for (const auto& t : canonical(e)) {
    if (!t.c.is_real() || t.tx != 0)
      throw std::runtime_error("delta_collapse: expects real bracket terms without (t+x)");
    std::vector<int> mono;
    if (t.order >= 0) mono.push_back(t.order);
    for (const auto& br : t.brackets) {
      mono.push_back(br[0]);
      mono.push_back(br[1]);
    }
    std::sort(mono.begin(), mono.end(), std::greater<int>());
    acc[mono] += t.c.re;
  }
  std::vector<std::pair<Rational, std::vector<int>>> out;
  for (auto& [mono, c] : acc)
    if (c != 0) out.emplace_back(c, mono);
  return out;
}

}  // namespace airyhier::cas
