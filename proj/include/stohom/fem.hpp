#pragma once

// Corrector problems on the unit cube: structured trilinear hexahedral
// mesh, Galerkin assembly of the six constant-strain load cases, SPD
// solves, and the volume-averaged effective elasticity matrix.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/maxent.hpp"

namespace stohom {

// Structured mesh of (0,1)^3 with n trilinear hexahedra per axis and full
// 2x2x2 Gauss quadrature. Nodes, elements, and quadrature locations are
// implicit in the lattice; only the Dirichlet dof map is materialized.
struct HexMesh {
  int n = 1;
  double h = 1.0;
  std::vector<int> free_index;  // per dof: >=0 free numbering, -1 constrained
  int free_count = 0;

  int nodes_per_axis() const { return n + 1; }
  int node_count() const {
    int m = n + 1;
    return m * m * m;
  }
  int element_count() const { return n * n * n; }
  int dof_count() const { return 3 * node_count(); }
  int boundary_node_count() const {
    int m = n + 1;
    int inner = n - 1;
    return m * m * m - inner * inner * inner;
  }
  int constrained_dof_count() const { return 3 * boundary_node_count(); }
  int quadrature_point_count() const { return 8 * element_count(); }

  int node_id(int ix, int iy, int iz) const {
    int m = n + 1;
    return (ix * m + iy) * m + iz;
  }
  bool on_boundary(int ix, int iy, int iz) const {
    return ix == 0 || iy == 0 || iz == 0 || ix == n || iy == n || iz == n;
  }
  std::array<double, 3> node_coord(int ix, int iy, int iz) const {
    return {ix * h, iy * h, iz * h};
  }
  std::array<int, 8> element_nodes(int ex, int ey, int ez) const {
    return {node_id(ex, ey, ez),         node_id(ex + 1, ey, ez),
            node_id(ex + 1, ey + 1, ez), node_id(ex, ey + 1, ez),
            node_id(ex, ey, ez + 1),     node_id(ex + 1, ey, ez + 1),
            node_id(ex + 1, ey + 1, ez + 1), node_id(ex, ey + 1, ez + 1)};
  }
};

inline HexMesh build_mesh(int n) {
  if (n < 1) throw std::invalid_argument("mesh subdivisions must be >= 1");
  HexMesh mesh;
  mesh.n = n;
  mesh.h = 1.0 / n;
  mesh.free_index.assign(mesh.dof_count(), -1);
  int next = 0;
  for (int ix = 0; ix <= n; ++ix)
    for (int iy = 0; iy <= n; ++iy)
      for (int iz = 0; iz <= n; ++iz) {
        if (mesh.on_boundary(ix, iy, iz)) continue;
        int nd = mesh.node_id(ix, iy, iz);
        for (int c = 0; c < 3; ++c) mesh.free_index[3 * nd + c] = next++;
      }
  mesh.free_count = next;
  return mesh;
}

// Strain-displacement matrices of the reference element at the 8 Gauss
// points, identical for every element of the regular mesh.
struct ElementBasis {
  std::array<Eigen::Matrix<double, 6, 24>, 8> b;  // engineering Voigt strains
  std::array<std::array<double, 3>, 8> gauss_offset;  // from element corner
  double w_detj = 0.0;

  explicit ElementBasis(double h) {
    // local corner signs, standard hex ordering
    static constexpr int sign[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1},
                                       {-1, 1, -1},  {-1, -1, 1}, {1, -1, 1},
                                       {1, 1, 1},    {-1, 1, 1}};
    const double gp = 1.0 / std::sqrt(3.0);
    w_detj = std::pow(h / 2.0, 3);
    int q = 0;
    for (int gx = 0; gx < 2; ++gx)
      for (int gy = 0; gy < 2; ++gy)
        for (int gz = 0; gz < 2; ++gz, ++q) {
          const double xi = gp * (2 * gx - 1);
          const double eta = gp * (2 * gy - 1);
          const double zeta = gp * (2 * gz - 1);
          gauss_offset[q] = {h * 0.5 * (1.0 + xi), h * 0.5 * (1.0 + eta),
                             h * 0.5 * (1.0 + zeta)};
          Eigen::Matrix<double, 6, 24>& bq = b[q];
          bq.setZero();
          for (int a = 0; a < 8; ++a) {
            const double sx = sign[a][0], sy = sign[a][1], sz = sign[a][2];
            const double scale = 2.0 / h / 8.0;  // d/dx = (2/h) d/dxi
            const double dx = scale * sx * (1.0 + sy * eta) * (1.0 + sz * zeta);
            const double dy = scale * sy * (1.0 + sx * xi) * (1.0 + sz * zeta);
            const double dz = scale * sz * (1.0 + sx * xi) * (1.0 + sy * eta);
            const int c = 3 * a;
            bq(0, c + 0) = dx;
            bq(1, c + 1) = dy;
            bq(2, c + 2) = dz;
            bq(3, c + 1) = dz;  // gamma_23
            bq(3, c + 2) = dy;
            bq(4, c + 0) = dz;  // gamma_13
            bq(4, c + 2) = dx;
            bq(5, c + 0) = dy;  // gamma_12
            bq(5, c + 1) = dx;
          }
        }
  }
};

using FieldEval = std::function<Matrix6(const std::array<double, 3>&)>;

// Stiffness on the free dofs, the six constant-strain load cases, and the
// field values cached per quadrature point for the effective-matrix pass.
struct AssembledSystem {
  Eigen::SparseMatrix<double> stiffness;          // free x free
  Eigen::Matrix<double, Eigen::Dynamic, 6> loads;  // free x 6
  std::vector<Matrix6> field_at_gauss;             // element-major, 8 per elem
};

inline AssembledSystem assemble(const HexMesh& mesh, const FieldEval& field) {
  const ElementBasis basis(mesh.h);
  AssembledSystem sys;
  sys.loads = Eigen::Matrix<double, Eigen::Dynamic, 6>::Zero(mesh.free_count, 6);
  sys.field_at_gauss.resize(mesh.quadrature_point_count());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.element_count()) * 300);

  Eigen::Matrix<double, 24, 24> ke;
  Eigen::Matrix<double, 24, 6> fe;
  std::array<int, 24> dof{};
  const int n = mesh.n;
  for (int ex = 0; ex < n; ++ex)
    for (int ey = 0; ey < n; ++ey)
      for (int ez = 0; ez < n; ++ez) {
        const int e = (ex * n + ey) * n + ez;
        const auto nodes = mesh.element_nodes(ex, ey, ez);
        const std::array<double, 3> corner{ex * mesh.h, ey * mesh.h,
                                           ez * mesh.h};
        ke.setZero();
        fe.setZero();
        for (int q = 0; q < 8; ++q) {
          const std::array<double, 3> xg{corner[0] + basis.gauss_offset[q][0],
                                         corner[1] + basis.gauss_offset[q][1],
                                         corner[2] + basis.gauss_offset[q][2]};
          const Matrix6 c = field(xg);
          if (!c.allFinite() ||
              Eigen::LLT<Matrix6>(Matrix6(0.5 * (c + c.transpose())))
                      .info() != Eigen::Success)
            throw std::runtime_error(
                "field evaluation is not SPD at element " + std::to_string(e) +
                " gauss point " + std::to_string(q));
          sys.field_at_gauss[8 * e + q] = c;
          const auto& bq = basis.b[q];
          const Eigen::Matrix<double, 6, 24> cb = c * bq;
          ke.noalias() += basis.w_detj * bq.transpose() * cb;
          fe.noalias() -= basis.w_detj * bq.transpose() * c;
        }
        for (int a = 0; a < 8; ++a)
          for (int comp = 0; comp < 3; ++comp)
            dof[3 * a + comp] = mesh.free_index[3 * nodes[a] + comp];
        for (int i = 0; i < 24; ++i) {
          if (dof[i] < 0) continue;
          sys.loads.row(dof[i]) += fe.row(i);
          for (int j = 0; j < 24; ++j)
            if (dof[j] >= 0)
              trips.emplace_back(dof[i], dof[j], ke(i, j));
        }
      }
  sys.stiffness.resize(mesh.free_count, mesh.free_count);
  sys.stiffness.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

struct SolverOptions {
  enum class Kind { automatic, pcg, direct };
  Kind kind = Kind::automatic;
  double tol = 1e-9;          // relative residual
  int max_iter_factor = 20;   // cap = factor * sqrt(free dofs)

  static Kind parse(const std::string& s) {
    if (s == "auto") return Kind::automatic;
    if (s == "pcg") return Kind::pcg;
    if (s == "direct") return Kind::direct;
    throw std::invalid_argument("solver must be auto, pcg, or direct");
  }
};

struct SolveReport {
  std::array<int, 6> iterations{};
  std::array<double, 6> rel_residual{};
  bool converged = true;
};

// Jacobi-preconditioned conjugate gradients on the reduced SPD system.
inline int pcg_solve(const Eigen::SparseMatrix<double>& a,
                     const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
                     int max_iter, const Eigen::VectorXd& inv_diag) {
  const double norm_b = b.norm();
  x.setZero();
  if (norm_b == 0.0) return 0;
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd q(b.size());
  double rz = r.dot(z);
  int it = 0;
  while (it < max_iter) {
    q.noalias() = a * p;
    const double alpha = rz / p.dot(q);
    x += alpha * p;
    r -= alpha * q;
    ++it;
    if (r.norm() <= tol * norm_b) break;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return it;
}

// Solves the six load cases; returns the free-dof displacements (one
// column per case). The direct Cholesky path serves the small meshes.
inline Eigen::MatrixXd solve_correctors(const HexMesh& mesh,
                                        const AssembledSystem& sys,
                                        const SolverOptions& opts,
                                        SolveReport* report = nullptr) {
  SolveReport local;
  SolveReport& rep = report ? *report : local;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(mesh.free_count, 6);
  if (mesh.free_count == 0) return u;

  SolverOptions::Kind kind = opts.kind;
  if (kind == SolverOptions::Kind::automatic)
    kind = mesh.n <= 10 ? SolverOptions::Kind::direct
                        : SolverOptions::Kind::pcg;

  if (kind == SolverOptions::Kind::direct) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.stiffness);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("Cholesky factorization failed");
    for (int j = 0; j < 6; ++j) {
      u.col(j) = llt.solve(sys.loads.col(j));
      rep.iterations[j] = 0;
    }
  } else {
    const int cap = static_cast<int>(
        opts.max_iter_factor * std::sqrt(static_cast<double>(mesh.free_count)));
    const Eigen::VectorXd inv_diag =
        sys.stiffness.diagonal().cwiseInverse();
    for (int j = 0; j < 6; ++j) {
      Eigen::VectorXd xj(mesh.free_count);
      rep.iterations[j] = pcg_solve(sys.stiffness, sys.loads.col(j), xj,
                                    opts.tol, cap, inv_diag);
      u.col(j) = xj;
    }
  }
  for (int j = 0; j < 6; ++j) {
    const double fn = sys.loads.col(j).norm();
    const double rn = (sys.stiffness * u.col(j) - sys.loads.col(j)).norm();
    rep.rel_residual[j] = fn > 0.0 ? rn / fn : rn;
    if (fn > 0.0 && rep.rel_residual[j] > opts.tol * 10.0)
      rep.converged = false;
  }
  return u;
}

// One realization's effective matrix, eigenvalues sorted descending.
struct EffectiveSample {
  Matrix6 c_eff = Matrix6::Zero();
  std::array<double, 6> lambda{};
  double raw_asymmetry = 0.0;
  std::uint64_t kappa = 0;
  std::uint64_t master_seed = 0;
};

// C_eff[:,J] = |Omega|^{-1} int C(x) (eps_V(U^J) + e_J) dx by the same
// quadrature used in assembly; |Omega| = 1 for the unit cube.
inline EffectiveSample effective_matrix(const HexMesh& mesh,
                                        const AssembledSystem& sys,
                                        const Eigen::MatrixXd& u_free) {
  const ElementBasis basis(mesh.h);
  Matrix6 c_eff = Matrix6::Zero();
  Eigen::Matrix<double, 24, 6> ue;
  const int n = mesh.n;
  for (int ex = 0; ex < n; ++ex)
    for (int ey = 0; ey < n; ++ey)
      for (int ez = 0; ez < n; ++ez) {
        const int e = (ex * n + ey) * n + ez;
        const auto nodes = mesh.element_nodes(ex, ey, ez);
        for (int a = 0; a < 8; ++a)
          for (int comp = 0; comp < 3; ++comp) {
            const int fi = mesh.free_index[3 * nodes[a] + comp];
            for (int j = 0; j < 6; ++j)
              ue(3 * a + comp, j) = fi >= 0 ? u_free(fi, j) : 0.0;
          }
        for (int q = 0; q < 8; ++q) {
          const Matrix6& c = sys.field_at_gauss[8 * e + q];
          Eigen::Matrix<double, 6, 6> strain = basis.b[q] * ue;
          strain += Matrix6::Identity();  // constant strain of u0^J
          c_eff.noalias() += basis.w_detj * c * strain;
        }
      }
  EffectiveSample out;
  out.raw_asymmetry =
      (c_eff - c_eff.transpose()).norm() / std::max(c_eff.norm(), 1e-300);
  out.c_eff = 0.5 * (c_eff + c_eff.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix6> es(out.c_eff);
  for (int i = 0; i < 6; ++i) out.lambda[i] = es.eigenvalues()(5 - i);
  if (!(out.lambda[5] > 0.0))
    throw std::runtime_error("effective matrix lost positive definiteness");
  return out;
}

// ||u||_H^2 = int ||eps(u)||_F^2 dx with tensor shear components, by the
// element quadrature; used for the a-priori energy bound checks.
inline double corrector_h_norm(const HexMesh& mesh,
                               const Eigen::MatrixXd& u_free, int load_case) {
  const ElementBasis basis(mesh.h);
  double acc = 0.0;
  Eigen::Matrix<double, 24, 1> ue;
  const int n = mesh.n;
  for (int ex = 0; ex < n; ++ex)
    for (int ey = 0; ey < n; ++ey)
      for (int ez = 0; ez < n; ++ez) {
        const auto nodes = mesh.element_nodes(ex, ey, ez);
        for (int a = 0; a < 8; ++a)
          for (int comp = 0; comp < 3; ++comp) {
            const int fi = mesh.free_index[3 * nodes[a] + comp];
            ue(3 * a + comp) = fi >= 0 ? u_free(fi, load_case) : 0.0;
          }
        for (int q = 0; q < 8; ++q) {
          Eigen::Matrix<double, 6, 1> ev = basis.b[q] * ue;
          double frob2 = ev(0) * ev(0) + ev(1) * ev(1) + ev(2) * ev(2) +
                         0.5 * (ev(3) * ev(3) + ev(4) * ev(4) + ev(5) * ev(5));
          acc += basis.w_detj * frob2;
        }
      }
  return std::sqrt(acc);
}

}  // namespace stohom
