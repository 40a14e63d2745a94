#pragma once

#include "robustpi/errors.hpp"
#include "robustpi/model.hpp"
#include "robustpi/rational.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace robustpi {

/// Dense n x n grid of rationals, row-major.
class SquareRationalMatrix {
public:
    SquareRationalMatrix() = default;
    explicit SquareRationalMatrix(std::size_t n) : n_(n), data_(n * n) {}

    static SquareRationalMatrix identity(std::size_t n) {
        SquareRationalMatrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    std::size_t size() const { return n_; }
    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    std::vector<Rational> operator*(const std::vector<Rational>& x) const {
        if (x.size() != n_)
            throw ModelError("matrix-vector dimension mismatch");
        std::vector<Rational> y(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            Rational acc = 0;
            for (std::size_t j = 0; j < n_; ++j)
                if (sgn((*this)(i, j)) != 0)
                    acc += (*this)(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

private:
    std::size_t n_ = 0;
    std::vector<Rational> data_;
};

/// Which row to swap in when the current column needs a pivot.
enum class PivotRule {
    FirstNonzero, ///< smallest row index with a non-zero entry
    LastNonzero,  ///< largest row index with a non-zero entry
};

/**
 * Solves A x = b exactly with Bareiss fraction-free elimination.
 *
 * Each row is first scaled to integers by the lcm of its denominators. The
 * Bareiss update a_ij <- (p_k a_ij - a_ik a_kj) / p_{k-1} keeps every entry
 * an integer minor of the scaled system. A row whose entry in the pivot column
 * is zero would only be multiplied by p_k / p_{k-1}; that factor telescopes,
 * so it is applied lazily when the row is next touched. Back substitution
 * is invariant to row scaling, so rows never need to be brought fully up to
 * date.
 *
 * Throws SingularMatrixError when no pivot exists in some column.
 */
inline std::vector<Rational> solve_linear_system(const SquareRationalMatrix& a,
                                                 const std::vector<Rational>& b,
                                                 PivotRule rule = PivotRule::FirstNonzero) {
    const std::size_t n = a.size();
    if (b.size() != n)
        throw ModelError("solve_linear_system: right-hand side has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(n));
    const std::size_t w = n + 1;
    std::vector<Integer> m(n * w);

    for (std::size_t i = 0; i < n; ++i) {
        Integer scale = 1;
        for (std::size_t j = 0; j < n; ++j)
            if (sgn(a(i, j)) != 0)
                mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), a(i, j).get_den_mpz_t());
        if (sgn(b[i]) != 0)
            mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), b[i].get_den_mpz_t());
        auto to_int = [&](const Rational& q, Integer& out) {
            if (sgn(q) == 0)
                return;
            mpz_divexact(out.get_mpz_t(), scale.get_mpz_t(), q.get_den_mpz_t());
            out *= q.get_num();
        };
        for (std::size_t j = 0; j < n; ++j)
            to_int(a(i, j), m[i * w + j]);
        to_int(b[i], m[i * w + n]);
    }

    // pivots[k + 1] holds p_k; pivots[0] = p_{-1} = 1.
    std::vector<Integer> pivots(n + 1);
    pivots[0] = 1;
    // synced[i] = k + 1 means row i reflects every update up to step k.
    std::vector<std::size_t> synced(n, 0);

    auto entry = [&](std::size_t i, std::size_t j) -> Integer& { return m[i * w + j]; };
    auto bring_up_to = [&](std::size_t i, std::size_t target) {
        if (synced[i] == target)
            return;
        const Integer& num = pivots[target];
        const Integer& den = pivots[synced[i]];
        for (std::size_t j = 0; j < w; ++j) {
            Integer& x = entry(i, j);
            if (sgn(x) == 0)
                continue;
            mpz_mul(x.get_mpz_t(), x.get_mpz_t(), num.get_mpz_t());
            mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), den.get_mpz_t());
        }
        synced[i] = target;
    };

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot_row = n;
        for (std::size_t r = k; r < n; ++r) {
            if (sgn(entry(r, k)) != 0) {
                pivot_row = r;
                if (rule == PivotRule::FirstNonzero)
                    break;
            }
        }
        if (pivot_row == n)
            throw SingularMatrixError("singular matrix: no pivot in column " + std::to_string(k));
        if (pivot_row != k) {
            for (std::size_t j = 0; j < w; ++j)
                mpz_swap(entry(k, j).get_mpz_t(), entry(pivot_row, j).get_mpz_t());
            std::swap(synced[k], synced[pivot_row]);
        }
        bring_up_to(k, k);
        pivots[k + 1] = entry(k, k);
        const Integer& pk = pivots[k + 1];
        const Integer& prev = pivots[k];

        for (std::size_t i = k + 1; i < n; ++i) {
            if (sgn(entry(i, k)) == 0)
                continue;
            bring_up_to(i, k);
            const Integer factor = entry(i, k);
            for (std::size_t j = k + 1; j < w; ++j) {
                Integer& x = entry(i, j);
                const Integer& y = entry(k, j);
                if (sgn(x) == 0 && sgn(y) == 0)
                    continue;
                mpz_mul(x.get_mpz_t(), x.get_mpz_t(), pk.get_mpz_t());
                mpz_submul(x.get_mpz_t(), factor.get_mpz_t(), y.get_mpz_t());
                mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), prev.get_mpz_t());
            }
            entry(i, k) = 0;
            synced[i] = k + 1;
        }
    }

    std::vector<Rational> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        Rational acc(entry(ii, n));
        for (std::size_t j = ii + 1; j < n; ++j)
            if (sgn(entry(ii, j)) != 0)
                acc -= Rational(entry(ii, j)) * x[j];
        acc /= Rational(entry(ii, ii));
        x[ii] = acc;
    }
    return x;
}

/// I - gamma * P with P the global transition matrix of `adversary` over `rows`.
inline SquareRationalMatrix evaluation_matrix(const Rational& discount, const std::vector<Row>& rows,
                                              const AdversaryPolicy& adversary) {
    const std::size_t n = rows.size();
    SquareRationalMatrix a = SquareRationalMatrix::identity(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& succ = rows[s].successors;
        for (std::size_t k = 0; k < succ.size(); ++k)
            if (sgn(adversary[s][k]) != 0)
                a(s, succ[k]) -= discount * adversary[s][k];
    }
    return a;
}

/**
 * Value of a fixed adversary policy: v = (I - gamma P^tau)^{-1} c.
 * Throws ModelError if the policy is not feasible for the chain.
 */
inline ValueVector policy_value(const Rmc& chain, const AdversaryPolicy& adversary) {
    if (!is_feasible(chain.rows, adversary))
        throw ModelError("policy_value: adversary policy is not feasible for the model");
    return solve_linear_system(evaluation_matrix(chain.discount, chain.rows, adversary), chain.cost);
}

} // namespace robustpi
