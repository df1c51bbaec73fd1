#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "linalg.hpp"

namespace steercost::sdp {

enum class BlockKind { Psd, Free };

struct Block {
  std::string name;
  std::size_t dim = 0;
  BlockKind kind = BlockKind::Psd;
};

/// sum_k coeff_k X_{block_k} = rhs   (one Hermitian matrix equation)
struct MatrixConstraint {
  std::vector<std::pair<std::size_t, double>> terms;
  CMat rhs;
};

/// sum_k tr(A_k X_{block_k}) = rhs   (one real equation)
struct TraceConstraint {
  std::vector<std::pair<std::size_t, CMat>> terms;
  double rhs = 0.0;
};

using Constraint = std::variant<MatrixConstraint, TraceConstraint>;

enum class Sense { Minimize, Maximize };

/// Linear program over Hermitian blocks: optimise sum_k tr(C_k X_k) subject
/// to linear equalities, with PSD blocks constrained to the cone.
struct SdpProblem {
  std::vector<Block> blocks;
  std::map<std::size_t, CMat> objective;  // block index -> C_k; absent blocks have zero cost
  std::vector<Constraint> constraints;
  Sense sense = Sense::Minimize;

  std::size_t add_block(std::string name, std::size_t dim, BlockKind kind = BlockKind::Psd) {
    blocks.push_back({std::move(name), dim, kind});
    return blocks.size() - 1;
  }

  void validate() const {
    if (blocks.empty()) throw Error(ErrorKind::IllFormedProblem, "problem has no blocks");
    auto check_block = [&](std::size_t b) {
      if (b >= blocks.size()) throw Error(ErrorKind::IllFormedProblem, "constraint references unknown block");
    };
    for (const auto& [b, c] : objective) {
      check_block(b);
      if (c.rows() != blocks[b].dim || !c.square() || hermiticity_defect(c) > Tolerances::hermiticity)
        throw Error(ErrorKind::IllFormedProblem, "objective coefficient has wrong shape or is not Hermitian");
    }
    for (const auto& con : constraints) {
      if (const auto* mc = std::get_if<MatrixConstraint>(&con)) {
        if (!mc->rhs.square() || hermiticity_defect(mc->rhs) > Tolerances::hermiticity)
          throw Error(ErrorKind::IllFormedProblem, "constraint constant is not Hermitian");
        for (const auto& [b, coeff] : mc->terms) {
          check_block(b);
          if (blocks[b].dim != mc->rhs.rows())
            throw Error(ErrorKind::IllFormedProblem, "matrix constraint dimension mismatch");
          if (!std::isfinite(coeff)) throw Error(ErrorKind::IllFormedProblem, "non-finite coefficient");
        }
      } else {
        const auto& tc = std::get<TraceConstraint>(con);
        for (const auto& [b, a] : tc.terms) {
          check_block(b);
          if (a.rows() != blocks[b].dim || !a.square() || hermiticity_defect(a) > Tolerances::hermiticity)
            throw Error(ErrorKind::IllFormedProblem, "trace constraint coefficient has wrong shape or is not Hermitian");
        }
      }
    }
  }
};

struct SolverConfig {
  double eps_abs = 1e-8;
  double eps_feas = Tolerances::eps_feas;
  long max_iter = 200000;
  double penalty = 1.0;
  double relaxation = 1.6;
  long adapt_interval = 100;
};

enum class Status { Optimal, Infeasible, MaxIterations };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

/// Farkas-type proof that {x in K : A x = b} is empty: blocks S in the dual
/// cone, S in the row space of A, and <S, x0> < 0 for any x0 with A x0 = b.
struct InfeasibilityCertificate {
  bool inconsistent_equalities = false;  // A x = b alone has no solution; blocks unused
  std::vector<CMat> blocks;
  double value = 0.0;       // <S, x0>, negative
  double cone_defect = 0.0; // max(-min eig) over PSD blocks, max |S| over free blocks
  double range_defect = 0.0;
};

struct SdpSolution {
  Status status = Status::MaxIterations;
  double objective = 0.0;
  std::map<std::string, CMat> block_values;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  long iterations = 0;
  std::optional<InfeasibilityCertificate> certificate;

  // Solver state for warm starts.
  std::vector<double> z;
  std::vector<double> u;
  double rho = 1.0;
};

namespace detail {

inline std::size_t vec_size(std::size_t n) { return n * n; }

/// Isometric real coordinates of a Hermitian matrix: diagonal entries, then
/// sqrt(2) Re and sqrt(2) Im of the strict upper triangle.
inline void vectorize(const CMat& m, double* out) {
  const std::size_t n = m.rows();
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) out[k++] = m(i, i).real();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      out[k++] = std::sqrt(2.0) * m(i, j).real();
      out[k++] = std::sqrt(2.0) * m(i, j).imag();
    }
}

inline CMat devectorize(const double* in, std::size_t n) {
  CMat m(n, n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) m(i, i) = in[k++];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx z(in[k] / std::sqrt(2.0), in[k + 1] / std::sqrt(2.0));
      k += 2;
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// Vectorised problem: rows of A are orthonormalised once so that the affine
/// projection is x - Q^T (Q x - beta).
class Workspace {
 public:
  explicit Workspace(const SdpProblem& p) : p_(p) {
    offsets_.reserve(p.blocks.size());
    for (const auto& b : p.blocks) {
      offsets_.push_back(n_);
      n_ += vec_size(b.dim);
    }
    c_.assign(n_, 0.0);
    std::vector<double> tmp;
    for (const auto& [b, cm] : p.objective) {
      vectorize(hermitian_part(cm), c_.data() + offsets_[b]);
    }
    if (p.sense == Sense::Maximize)
      for (auto& v : c_) v = -v;
    build_rows();
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<double>& cost() const noexcept { return c_; }
  bool affine_consistent() const noexcept { return consistent_; }
  double affine_inconsistency() const noexcept { return inconsistency_; }

  /// In-place projection onto {x : A x = b}.
  void project_affine(std::vector<double>& x) const {
    for (std::size_t r = 0; r < q_.size(); ++r) {
      const auto& q = q_[r];
      const double coef = dot(q, x) - beta_[r];
      for (std::size_t i = 0; i < n_; ++i) x[i] -= coef * q[i];
    }
  }

  /// Orthogonal projection onto the row space of A.
  std::vector<double> project_range(const std::vector<double>& s) const {
    std::vector<double> out(n_, 0.0);
    for (const auto& q : q_) {
      const double coef = dot(q, s);
      for (std::size_t i = 0; i < n_; ++i) out[i] += coef * q[i];
    }
    return out;
  }

  /// Minimum-norm solution of A x = b.
  std::vector<double> particular_solution() const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t r = 0; r < q_.size(); ++r)
      for (std::size_t i = 0; i < n_; ++i) out[i] += beta_[r] * q_[r][i];
    return out;
  }

  /// In-place projection onto the cone (PSD blocks clipped, free blocks untouched).
  void project_cone(std::vector<double>& x) const {
    for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
      if (p_.blocks[b].kind != BlockKind::Psd) continue;
      const std::size_t d = p_.blocks[b].dim;
      double* v = x.data() + offsets_[b];
      if (d == 1) {
        v[0] = std::max(v[0], 0.0);
        continue;
      }
      vectorize(psd_project(devectorize(v, d)), v);
    }
  }

  CMat block(const std::vector<double>& x, std::size_t b) const {
    return devectorize(x.data() + offsets_[b], p_.blocks[b].dim);
  }

  /// How far s is from the dual cone, measured as in InfeasibilityCertificate.
  double cone_defect(const std::vector<double>& s) const {
    double worst = 0.0;
    for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
      const CMat m = block(s, b);
      if (p_.blocks[b].kind == BlockKind::Psd)
        worst = std::max(worst, -min_eigenvalue(m));
      else
        worst = std::max(worst, m.max_abs());
    }
    return worst;
  }

 private:
  void build_rows() {
    // Expand every constraint into real rows of A.
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (const auto& con : p_.constraints) {
      if (const auto* mc = std::get_if<MatrixConstraint>(&con)) {
        const std::size_t d = mc->rhs.rows();
        const std::size_t m = vec_size(d);
        std::vector<double> bvec(m);
        vectorize(hermitian_part(mc->rhs), bvec.data());
        for (std::size_t c = 0; c < m; ++c) {
          std::vector<double> row(n_, 0.0);
          for (const auto& [b, coeff] : mc->terms) row[offsets_[b] + c] += coeff;
          rows.push_back(std::move(row));
          rhs.push_back(bvec[c]);
        }
      } else {
        const auto& tc = std::get<TraceConstraint>(con);
        std::vector<double> row(n_, 0.0);
        std::vector<double> tmp;
        for (const auto& [b, a] : tc.terms) {
          tmp.assign(vec_size(a.rows()), 0.0);
          vectorize(hermitian_part(a), tmp.data());
          for (std::size_t c = 0; c < tmp.size(); ++c) row[offsets_[b] + c] += tmp[c];
        }
        rows.push_back(std::move(row));
        rhs.push_back(tc.rhs);
      }
    }
    // Modified Gram-Schmidt with one reorthogonalisation pass; dependent rows
    // are dropped after checking that their right-hand side is consistent.
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<double> v = rows[r];
      const double orig = norm(v);
      double beta = rhs[r];
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < q_.size(); ++k) {
          const double coef = dot(q_[k], v);
          for (std::size_t i = 0; i < n_; ++i) v[i] -= coef * q_[k][i];
          beta -= coef * beta_[k];
        }
      const double nv = norm(v);
      if (orig == 0.0 || nv <= 1e-10 * orig) {
        const double scale = std::max(1.0, std::abs(rhs[r]));
        if (std::abs(beta) > 1e-9 * scale) {
          consistent_ = false;
          inconsistency_ = std::max(inconsistency_, std::abs(beta));
        }
        continue;
      }
      for (auto& e : v) e /= nv;
      q_.push_back(std::move(v));
      beta_.push_back(beta / nv);
    }
  }

  const SdpProblem& p_;
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<double> c_;
  std::vector<std::vector<double>> q_;
  std::vector<double> beta_;
  bool consistent_ = true;
  double inconsistency_ = 0.0;
};

inline std::optional<InfeasibilityCertificate> make_certificate(const Workspace& ws, const SdpProblem& p,
                                                                const std::vector<double>& displacement) {
  std::vector<double> s = ws.project_range(displacement);
  const double ns = norm(s);
  if (ns <= 1e-12) return std::nullopt;
  for (auto& v : s) v /= ns;
  InfeasibilityCertificate cert;
  cert.value = dot(s, ws.particular_solution());
  cert.cone_defect = ws.cone_defect(s);
  std::vector<double> back = ws.project_range(s);
  for (std::size_t i = 0; i < s.size(); ++i) back[i] -= s[i];
  cert.range_defect = norm(back);
  if (cert.value >= -1e-8 || cert.cone_defect > 1e-8 || cert.range_defect > 1e-8) return std::nullopt;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) cert.blocks.push_back(ws.block(s, b));
  return cert;
}

}  // namespace detail

/// Checks a certificate against the problem from scratch.
inline bool verify_certificate(const SdpProblem& p, const InfeasibilityCertificate& cert, double tol = 1e-8) {
  detail::Workspace ws(p);
  if (cert.inconsistent_equalities) return !ws.affine_consistent();
  if (cert.blocks.size() != p.blocks.size()) return false;
  std::vector<double> s(ws.size());
  std::size_t off = 0;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    detail::vectorize(hermitian_part(cert.blocks[b]), s.data() + off);
    off += detail::vec_size(p.blocks[b].dim);
  }
  const double ns = detail::norm(s);
  if (ns == 0.0) return false;
  for (auto& v : s) v /= ns;
  std::vector<double> back = ws.project_range(s);
  for (std::size_t i = 0; i < s.size(); ++i) back[i] -= s[i];
  return detail::norm(back) <= tol && ws.cone_defect(s) <= tol &&
         detail::dot(s, ws.particular_solution()) < -tol;
}

/// ADMM with over-relaxation and per-block PSD projection.
///
/// Iterates x = P_aff(z - u - c/rho), z = P_K(alpha x + (1-alpha) z + u),
/// u += alpha x + (1-alpha) z_old - z. Stops when ||x - z|| and
/// rho ||z - z_old|| both drop below eps_abs. A persistent displacement
/// between the affine set and the cone that verifies as a Farkas
/// certificate ends the solve with Status::Infeasible.
inline SdpSolution solve(const SdpProblem& p, const SolverConfig& cfg = {}, const SdpSolution* warm = nullptr) {
  p.validate();
  if (!(cfg.eps_abs > 0) || cfg.max_iter <= 0 || !(cfg.penalty > 0) || !(cfg.relaxation > 0 && cfg.relaxation < 2))
    throw Error(ErrorKind::IllFormedProblem, "invalid solver configuration");

  detail::Workspace ws(p);
  const std::size_t n = ws.size();
  SdpSolution sol;

  auto finish = [&](std::vector<double>& z) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += ws.cost()[i] * z[i];
    sol.objective = p.sense == Sense::Maximize ? -obj : obj;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) sol.block_values[p.blocks[b].name] = ws.block(z, b);
  };

  if (!ws.affine_consistent()) {
    // The equality constraints alone are contradictory.
    sol.status = Status::Infeasible;
    sol.primal_residual = ws.affine_inconsistency();
    sol.z.assign(n, 0.0);
    sol.u.assign(n, 0.0);
    finish(sol.z);
    return sol;
  }

  std::vector<double> z(n, 0.0), u(n, 0.0), x(n), xh(n), zold(n), disp_prev(n, 0.0);
  double rho = cfg.penalty;
  if (warm && warm->z.size() == n && warm->u.size() == n) {
    z = warm->z;
    u = warm->u;
    rho = warm->rho;
  }
  const double alpha = cfg.relaxation;
  const auto& c = ws.cost();

  long it = 0;
  double rp = 0.0, rd = 0.0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] - u[i] - c[i] / rho;
    ws.project_affine(x);
    zold = z;
    for (std::size_t i = 0; i < n; ++i) {
      xh[i] = alpha * x[i] + (1.0 - alpha) * zold[i];
      z[i] = xh[i] + u[i];
    }
    ws.project_cone(z);
    double sp = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += xh[i] - z[i];
      sp += (x[i] - z[i]) * (x[i] - z[i]);
      sd += (z[i] - zold[i]) * (z[i] - zold[i]);
    }
    rp = std::sqrt(sp);
    rd = rho * std::sqrt(sd);
    if (!std::isfinite(rp) || !std::isfinite(rd))
      throw Error(ErrorKind::NumericalBreakdown, "NaN encountered in ADMM iterate");
    if (rp <= cfg.eps_abs && rd <= cfg.eps_abs) {
      sol.status = Status::Optimal;
      break;
    }
    if (it % cfg.adapt_interval == 0) {
      // Infeasibility: x - z settles to a nonzero displacement.
      std::vector<double> disp(n);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        disp[i] = z[i] - x[i];
        change += (disp[i] - disp_prev[i]) * (disp[i] - disp_prev[i]);
      }
      if (rp > 1e3 * cfg.eps_abs && std::sqrt(change) <= 1e-3 * rp) {
        if (auto cert = detail::make_certificate(ws, p, disp)) {
          sol.status = Status::Infeasible;
          sol.certificate = std::move(cert);
          break;
        }
      }
      disp_prev = std::move(disp);
      // Residual balancing.
      if (rp > 10.0 * rd) {
        rho *= 2.0;
        for (auto& v : u) v *= 0.5;
      } else if (rd > 10.0 * rp) {
        rho *= 0.5;
        for (auto& v : u) v *= 2.0;
      }
    }
  }
  sol.iterations = std::min(it, cfg.max_iter);
  sol.primal_residual = rp;
  sol.dual_residual = rd;
  finish(z);
  sol.z = std::move(z);
  sol.u = std::move(u);
  sol.rho = rho;
  return sol;
}

/// Decides feasibility of {X_k in K : constraints}. Returns a verified
/// certificate when infeasible, nullopt when a feasible point was found.
/// Throws Inconclusive when the iteration cap is hit first.
inline std::optional<InfeasibilityCertificate> detect_infeasibility(const SdpProblem& p, const SolverConfig& cfg = {}) {
  SdpProblem feas = p;
  feas.objective.clear();
  const SdpSolution sol = solve(feas, cfg);
  if (sol.status == Status::Optimal) return std::nullopt;
  if (sol.status == Status::Infeasible) {
    if (sol.certificate) return sol.certificate;
    InfeasibilityCertificate cert;
    cert.inconsistent_equalities = true;
    cert.value = -sol.primal_residual;
    return cert;
  }
  throw Error(ErrorKind::Inconclusive, "residuals stagnated before feasibility was decided");
}

/// Max Frobenius-norm violation of the equality constraints at the given blocks.
inline double constraint_violation(const SdpProblem& p, const std::map<std::string, CMat>& values) {
  double worst = 0.0;
  for (const auto& con : p.constraints) {
    if (const auto* mc = std::get_if<MatrixConstraint>(&con)) {
      CMat lhs = CMat::zeros(mc->rhs.rows());
      for (const auto& [b, coeff] : mc->terms) lhs.axpy(coeff, values.at(p.blocks[b].name));
      worst = std::max(worst, (lhs - mc->rhs).norm_fro());
    } else {
      const auto& tc = std::get<TraceConstraint>(con);
      double lhs = 0.0;
      for (const auto& [b, a] : tc.terms) lhs += trace_product_re(a, values.at(p.blocks[b].name));
      worst = std::max(worst, std::abs(lhs - tc.rhs));
    }
  }
  return worst;
}

}  // namespace steercost::sdp
