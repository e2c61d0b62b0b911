#pragma once

// Dirichlet elimination and the direct solve of the Stokes-type block
// system
//
//     [ A  B^T  0 ] [v]   [f]
//     [ B  0    m ] [p] = [g]
//     [ 0  m^T  0 ] [l]   [0]
//
// where the last row enforces a zero-mean pressure (m_i = integral of the
// P1 basis function i).

#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>
#ifdef URANS_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include "assembly.hpp"

namespace urans
{

struct SaddleSystem
{
    SparseMatrix A; // n_v x n_v
    SparseMatrix B; // n_p x n_v
    Vector f;       // n_v
    Vector g;       // n_p
};

/// Prescribed values for a subset of the Dirichlet dofs (dof -> value);
/// Dirichlet dofs not listed are homogeneous.
using DirichletValues = std::map<int, double>;

/// System restricted to the free velocity dofs.
struct ReducedSaddle
{
    SparseMatrix A;
    SparseMatrix B;
    Vector f;
    Vector g;
    std::vector<int> free_dofs;
    std::vector<int> fixed_dofs;
    Vector fixed_values;
    std::size_t full_size = 0;

    /// Full velocity vector from free-dof values plus the boundary data.
    Vector extend(const Vector& v_free) const
    {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(full_size));
        for (std::size_t i = 0; i < free_dofs.size(); ++i)
            v[free_dofs[i]] = v_free[static_cast<Eigen::Index>(i)];
        for (std::size_t i = 0; i < fixed_dofs.size(); ++i)
            v[fixed_dofs[i]] = fixed_values[static_cast<Eigen::Index>(i)];
        return v;
    }

    Vector restrict_free(const Vector& full) const
    {
        Vector v(static_cast<Eigen::Index>(free_dofs.size()));
        for (std::size_t i = 0; i < free_dofs.size(); ++i)
            v[static_cast<Eigen::Index>(i)] = full[free_dofs[i]];
        return v;
    }
};

/// Eliminates the space's Dirichlet dofs symmetrically: constrained rows
/// and columns are dropped and their known values moved to the right-hand
/// side. Throws if `values` names a dof that is not a Dirichlet dof.
inline ReducedSaddle apply_dirichlet(const SaddleSystem& sys, const FESpace& space,
                                     const DirichletValues& values = {})
{
    const auto n = space.num_velocity_dofs();
    for (const auto& [dof, val] : values)
        if (dof < 0 || static_cast<std::size_t>(dof) >= n || !space.is_dirichlet(dof))
            throw std::invalid_argument("apply_dirichlet: dof " + std::to_string(dof)
                                        + " is not a Dirichlet dof");

    ReducedSaddle r;
    r.full_size = n;
    std::vector<int> map(n, -1);
    Vector bc = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t d = 0; d < n; ++d)
    {
        if (space.is_dirichlet(d))
        {
            r.fixed_dofs.push_back(static_cast<int>(d));
            auto it = values.find(static_cast<int>(d));
            bc[static_cast<Eigen::Index>(d)] = it == values.end() ? 0.0 : it->second;
        }
        else
        {
            map[d] = static_cast<int>(r.free_dofs.size());
            r.free_dofs.push_back(static_cast<int>(d));
        }
    }
    r.fixed_values.resize(static_cast<Eigen::Index>(r.fixed_dofs.size()));
    for (std::size_t i = 0; i < r.fixed_dofs.size(); ++i)
        r.fixed_values[static_cast<Eigen::Index>(i)] = bc[r.fixed_dofs[i]];

    const auto nf = static_cast<Eigen::Index>(r.free_dofs.size());
    r.f = r.restrict_free(sys.f);
    r.g = sys.g;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(sys.A.nonZeros()));
    for (Eigen::Index c = 0; c < sys.A.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(sys.A, c); it; ++it)
        {
            const int row = map[it.row()], col = map[it.col()];
            if (row >= 0 && col >= 0)
                trip.emplace_back(row, col, it.value());
            else if (row >= 0)
                r.f[row] -= it.value() * bc[it.col()];
        }
    r.A.resize(nf, nf);
    r.A.setFromTriplets(trip.begin(), trip.end());

    trip.clear();
    for (Eigen::Index c = 0; c < sys.B.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(sys.B, c); it; ++it)
        {
            const int col = map[it.col()];
            if (col >= 0)
                trip.emplace_back(it.row(), col, it.value());
            else
                r.g[it.row()] -= it.value() * bc[it.col()];
        }
    r.B.resize(sys.B.rows(), nf);
    r.B.setFromTriplets(trip.begin(), trip.end());
    return r;
}

class SolveError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct SaddleSolution
{
    Vector v;
    Vector p;
    double multiplier = 0.0;
    double residual = 0.0; // ||K x - rhs|| / ||rhs|| (0 for zero rhs)
};

/// Direct solver for the block system. Keeps the symbolic factorisation
/// while the sparsity pattern stays the same.
class SaddleSolver
{
public:
    static constexpr double residual_tolerance = 1e-10;

    SaddleSolution solve(const SparseMatrix& A, const SparseMatrix& B, const Vector& mean_weights,
                         const Vector& f, const Vector& g)
    {
        const Eigen::Index nv = A.rows(), np = B.rows(), n = nv + np + 1;
        if (A.cols() != nv || B.cols() != nv || f.size() != nv || g.size() != np || mean_weights.size() != np)
            throw std::invalid_argument("SaddleSolver: block dimension mismatch");

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * B.nonZeros() + 2 * np));
        for (Eigen::Index c = 0; c < A.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(A, c); it; ++it)
                trip.emplace_back(it.row(), it.col(), it.value());
        for (Eigen::Index c = 0; c < B.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(B, c); it; ++it)
            {
                trip.emplace_back(nv + it.row(), it.col(), it.value());
                trip.emplace_back(it.col(), nv + it.row(), it.value());
            }
        for (Eigen::Index i = 0; i < np; ++i)
        {
            trip.emplace_back(nv + i, n - 1, mean_weights[i]);
            trip.emplace_back(n - 1, nv + i, mean_weights[i]);
        }
        SparseMatrix K(n, n);
        K.setFromTriplets(trip.begin(), trip.end());
        K.makeCompressed();

        Vector rhs = Vector::Zero(n);
        rhs.head(nv) = f;
        rhs.segment(nv, np) = g;

        if (!same_pattern(K))
        {
            lu_ = std::make_unique<Factorization>();
#ifdef URANS_HAVE_UMFPACK
            // Structurally symmetric block matrix: order on A + A^T.
            lu_->umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
#endif
            lu_->analyzePattern(K);
            remember_pattern(K);
        }
        lu_->factorize(K);
        if (lu_->info() != Eigen::Success)
            throw SolveError("saddle-point factorization failed (singular system?)");

        Vector x = lu_->solve(rhs);
        const double rhs_norm = rhs.norm();
        double res = (K * x - rhs).norm();
        for (int refine = 0; refine < 2 && res > residual_tolerance * rhs_norm; ++refine)
        {
            const Vector r = rhs - K * x;
            x += lu_->solve(r);
            res = (K * x - rhs).norm();
        }
        const double rel = rhs_norm > 0.0 ? res / rhs_norm : res;
        if (!(rel <= residual_tolerance))
            throw SolveError("saddle-point residual " + std::to_string(rel) + " above tolerance");

        SaddleSolution s;
        s.v = x.head(nv);
        s.p = x.segment(nv, np);
        s.multiplier = x[n - 1];
        s.residual = rel;
        return s;
    }

private:
#ifdef URANS_HAVE_UMFPACK
    using Factorization = Eigen::UmfPackLU<SparseMatrix>;
#else
    using Factorization = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
#endif

    bool same_pattern(const SparseMatrix& K) const
    {
        if (!lu_ || K.rows() != rows_ || K.nonZeros() != static_cast<Eigen::Index>(inner_.size()))
            return false;
        return std::equal(inner_.begin(), inner_.end(), K.innerIndexPtr())
               && std::equal(outer_.begin(), outer_.end(), K.outerIndexPtr());
    }

    void remember_pattern(const SparseMatrix& K)
    {
        rows_ = K.rows();
        inner_.assign(K.innerIndexPtr(), K.innerIndexPtr() + K.nonZeros());
        outer_.assign(K.outerIndexPtr(), K.outerIndexPtr() + K.outerSize() + 1);
    }

    std::unique_ptr<Factorization> lu_;
    Eigen::Index rows_ = -1;
    std::vector<int> inner_, outer_;
};

/// One-shot solve of the block system with a zero-mean pressure.
inline SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& B, const Vector& mean_weights,
                                   const Vector& f, const Vector& g)
{
    SaddleSolver solver;
    return solver.solve(A, B, mean_weights, f, g);
}

} // namespace urans
