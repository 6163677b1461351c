#include "wigner/model.hpp"

#include <stdexcept>

#include "wigner/errors.hpp"

namespace wigner {

CircuitModel CircuitModel::make_static(const CMat& D, const CVec& c,
                                       std::vector<std::string> labels) {
  CircuitModel m;
  m.num_modes = 0;
  m.num_ports = static_cast<int>(D.rows());
  m.A.resize(0, 0);
  m.B.resize(0, m.num_ports);
  m.C.resize(m.num_ports, 0);
  m.D = D;
  m.a.resize(0);
  m.c = c;
  m.in_labels = labels;
  m.out_labels = std::move(labels);
  m.check_consistent();
  return m;
}

void CircuitModel::check_consistent() const {
  const auto m = static_cast<Eigen::Index>(num_modes);
  const auto n = static_cast<Eigen::Index>(num_ports);
  if (A.rows() != m || A.cols() != m || B.rows() != m || B.cols() != n ||
      C.rows() != n || C.cols() != m || D.rows() != n || D.cols() != n ||
      a.size() != m || c.size() != n ||
      in_labels.size() != static_cast<size_t>(n) ||
      out_labels.size() != static_cast<size_t>(n))
    throw std::logic_error("CircuitModel: inconsistent dimensions");
  for (const auto& nl : nonlin) {
    const int hi = std::max({nl.m0, nl.m1, nl.m2});
    if (hi >= num_modes) throw std::logic_error("CircuitModel: nonlinear block out of range");
  }
}

void CircuitModel::add_nonlinear_drift(const CVec& alpha, CVec& acc) const {
  constexpr Complex I{0.0, 1.0};
  for (const auto& nl : nonlin) {
    switch (nl.kind) {
      case NonlinBlock::Kind::Kerr1: {
        const Complex z = alpha[nl.m0];
        acc[nl.m0] += -I * nl.c0 * std::norm(z) * z;
        break;
      }
      case NonlinBlock::Kind::Kerr2: {
        const Complex za = alpha[nl.m0], zb = alpha[nl.m1];
        const double na = std::norm(za), nb = std::norm(zb);
        acc[nl.m0] += -I * (nl.c0 * na + nl.c2 * nb) * za;
        acc[nl.m1] += -I * (nl.c2 * na + nl.c1 * nb) * zb;
        break;
      }
      case NonlinBlock::Kind::Nopo: {
        const Complex zs = alpha[nl.m0], zi = alpha[nl.m1], zp = alpha[nl.m2];
        acc[nl.m0] += nl.c0 * std::conj(zi) * zp;
        acc[nl.m1] += nl.c0 * std::conj(zs) * zp;
        acc[nl.m2] += -nl.c0 * zs * zi;
        break;
      }
    }
  }
}

CVec CircuitModel::nonlinear_drift(const CVec& alpha) const {
  CVec acc = CVec::Zero(num_modes);
  add_nonlinear_drift(alpha, acc);
  return acc;
}

void CircuitModel::add_nonlinear_jacobian(const CVec& alpha, CMat& P, CMat& Q) const {
  constexpr Complex I{0.0, 1.0};
  for (const auto& nl : nonlin) {
    switch (nl.kind) {
      case NonlinBlock::Kind::Kerr1: {
        const Complex z = alpha[nl.m0];
        P(nl.m0, nl.m0) += -2.0 * I * nl.c0 * std::norm(z);
        Q(nl.m0, nl.m0) += -I * nl.c0 * z * z;
        break;
      }
      case NonlinBlock::Kind::Kerr2: {
        const int ja = nl.m0, jb = nl.m1;
        const Complex za = alpha[ja], zb = alpha[jb];
        const double na = std::norm(za), nb = std::norm(zb);
        P(ja, ja) += -I * (2.0 * nl.c0 * na + nl.c2 * nb);
        Q(ja, ja) += -I * nl.c0 * za * za;
        P(ja, jb) += -I * nl.c2 * std::conj(zb) * za;
        Q(ja, jb) += -I * nl.c2 * zb * za;
        P(jb, jb) += -I * (2.0 * nl.c1 * nb + nl.c2 * na);
        Q(jb, jb) += -I * nl.c1 * zb * zb;
        P(jb, ja) += -I * nl.c2 * std::conj(za) * zb;
        Q(jb, ja) += -I * nl.c2 * za * zb;
        break;
      }
      case NonlinBlock::Kind::Nopo: {
        const int js = nl.m0, ji = nl.m1, jp = nl.m2;
        const Complex zs = alpha[js], zi = alpha[ji], zp = alpha[jp];
        Q(js, ji) += nl.c0 * zp;
        P(js, jp) += nl.c0 * std::conj(zi);
        Q(ji, js) += nl.c0 * zp;
        P(ji, jp) += nl.c0 * std::conj(zs);
        P(jp, js) += -nl.c0 * zi;
        P(jp, ji) += -nl.c0 * zs;
        break;
      }
    }
  }
}

CVec CircuitModel::drift(const CVec& alpha, const CVec& beta_in) const {
  CVec f = A * alpha + a + B * beta_in;
  add_nonlinear_drift(alpha, f);
  return f;
}

CVec CircuitModel::output(const CVec& alpha, const CVec& beta_in) const {
  return C * alpha + c + D * beta_in;
}

CircuitModel concatenate(std::span<const CircuitModel> models) {
  if (models.empty()) throw std::invalid_argument("concatenate: empty model list");
  int m = 0, n = 0;
  for (const auto& x : models) {
    m += x.num_modes;
    n += x.num_ports;
  }
  CircuitModel out;
  out.num_modes = m;
  out.num_ports = n;
  out.A = CMat::Zero(m, m);
  out.B = CMat::Zero(m, n);
  out.C = CMat::Zero(n, m);
  out.D = CMat::Zero(n, n);
  out.a = CVec::Zero(m);
  out.c = CVec::Zero(n);
  out.in_labels.reserve(n);
  out.out_labels.reserve(n);
  int mo = 0, no = 0;
  for (const auto& x : models) {
    const int mi = x.num_modes, ni = x.num_ports;
    out.A.block(mo, mo, mi, mi) = x.A;
    out.B.block(mo, no, mi, ni) = x.B;
    out.C.block(no, mo, ni, mi) = x.C;
    out.D.block(no, no, ni, ni) = x.D;
    out.a.segment(mo, mi) = x.a;
    out.c.segment(no, ni) = x.c;
    for (auto nl : x.nonlin) {
      nl.shift_modes(mo);
      out.nonlin.push_back(nl);
    }
    out.in_labels.insert(out.in_labels.end(), x.in_labels.begin(), x.in_labels.end());
    out.out_labels.insert(out.out_labels.end(), x.out_labels.begin(), x.out_labels.end());
    mo += mi;
    no += ni;
  }
  out.check_consistent();
  return out;
}

CircuitModel feedback_reduce(const CircuitModel& model,
                             std::span<const std::pair<int, int>> loops) {
  const int n = model.num_ports;
  const int p = static_cast<int>(loops.size());
  if (p == 0) return model;

  std::vector<char> out_used(n, 0), in_used(n, 0);
  for (const auto& [o, l] : loops) {
    if (o < 0 || o >= n || l < 0 || l >= n)
      throw std::invalid_argument("feedback_reduce: loop port out of range");
    if (out_used[o]++) throw std::invalid_argument("feedback_reduce: output port used twice");
    if (in_used[l]++) throw std::invalid_argument("feedback_reduce: input port used twice");
  }
  std::vector<int> kept_in, kept_out, loop_in(p), loop_out(p);
  for (int j = 0; j < n; ++j) {
    if (!in_used[j]) kept_in.push_back(j);
    if (!out_used[j]) kept_out.push_back(j);
  }
  for (int i = 0; i < p; ++i) {
    loop_out[i] = loops[i].first;
    loop_in[i] = loops[i].second;
  }
  const int nk = static_cast<int>(kept_in.size());

  const int m = model.num_modes;
  CMat B_l(m, p), B_k(m, nk);
  for (int i = 0; i < p; ++i) B_l.col(i) = model.B.col(loop_in[i]);
  for (int i = 0; i < nk; ++i) B_k.col(i) = model.B.col(kept_in[i]);

  CMat C_o(p, m), C_r(nk, m);
  CVec c_o(p), c_r(nk);
  CMat D_ol(p, p), D_ok(p, nk), D_rl(nk, p), D_rk(nk, nk);
  for (int i = 0; i < p; ++i) {
    C_o.row(i) = model.C.row(loop_out[i]);
    c_o[i] = model.c[loop_out[i]];
    for (int j = 0; j < p; ++j) D_ol(i, j) = model.D(loop_out[i], loop_in[j]);
    for (int j = 0; j < nk; ++j) D_ok(i, j) = model.D(loop_out[i], kept_in[j]);
  }
  for (int i = 0; i < nk; ++i) {
    C_r.row(i) = model.C.row(kept_out[i]);
    c_r[i] = model.c[kept_out[i]];
    for (int j = 0; j < p; ++j) D_rl(i, j) = model.D(kept_out[i], loop_in[j]);
    for (int j = 0; j < nk; ++j) D_rk(i, j) = model.D(kept_out[i], kept_in[j]);
  }

  const CMat M = CMat::Identity(p, p) - D_ol;
  Eigen::PartialPivLU<CMat> lu(M);
  if (!(lu.rcond() > 1e-12))
    throw SingularLoopError("feedback_reduce: ill-posed zero-delay loop, rcond = " +
                            std::to_string(lu.rcond()));

  // u = M^{-1} (C_o alpha + c_o + D_ok v): substitute the solved loop inputs
  const CMat Minv_Co = lu.solve(C_o);
  const CVec Minv_co = lu.solve(c_o);
  const CMat Minv_Dok = lu.solve(D_ok);

  CircuitModel out;
  out.num_modes = m;
  out.num_ports = nk;
  out.A = model.A + B_l * Minv_Co;
  out.a = model.a + B_l * Minv_co;
  out.B = B_k + B_l * Minv_Dok;
  out.C = C_r + D_rl * Minv_Co;
  out.c = c_r + D_rl * Minv_co;
  out.D = D_rk + D_rl * Minv_Dok;
  out.nonlin = model.nonlin;
  out.in_labels.reserve(nk);
  out.out_labels.reserve(nk);
  for (int i = 0; i < nk; ++i) {
    out.in_labels.push_back(model.in_labels[kept_in[i]]);
    out.out_labels.push_back(model.out_labels[kept_out[i]]);
  }
  out.check_consistent();
  return out;
}

} // namespace wigner
