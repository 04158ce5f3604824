#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "pgsrhb/hp_space.hpp"

namespace pgsrhb {

// Sorted 0-based variable indices of one parity (monomial) term.
using BasisIndex = std::vector<int>;

// chi_S(x) = prod_{i in S} x_i. The empty set evaluates to +1.
int eval_basis(const BasisIndex& term, const BinaryConfig& x);

// All nonempty index sets of size <= max_degree over n variables, ordered by
// (degree, lexicographic). The intercept is handled by the solver and is not
// enumerated.
std::vector<BasisIndex> enumerate_basis(int n, int max_degree);

struct DesignMatrix {
    Eigen::MatrixXd values;                       // one row per observation
    std::vector<BasisIndex> basis;                // one entry per column
    std::vector<std::vector<int>> column_groups;  // partition of the columns
};

DesignMatrix build_design(const std::vector<BinaryConfig>& configs,
                          const std::vector<BasisIndex>& basis);

// Partition columns by the set of variable groups their term touches; blocks
// are ordered by that signature, lexicographically. Every variable mentioned
// by the basis must belong to exactly one group.
std::vector<std::vector<int>> group_columns(const std::vector<BasisIndex>& basis,
                                            const std::vector<Group>& groups);

struct SurrogateTerm {
    BasisIndex vars;
    double coeff = 0.0;

    bool operator==(const SurrogateTerm&) const = default;
};

// Sparse polynomial g(x) = intercept + sum_i coeff_i * chi_{S_i}(x).
struct Surrogate {
    std::vector<SurrogateTerm> terms;
    double intercept = 0.0;
};

double eval_surrogate(const Surrogate& s, const BinaryConfig& x);

// Coordinates in `indices` (ascending) pinned to the aligned entry of
// `values`; all other coordinates stay free.
struct Restriction {
    std::vector<int> indices;
    std::vector<std::int8_t> values;
};

// Draw with the restricted coordinates pinned and every free coordinate
// uniform on {-1,+1}, drawn in index order.
BinaryConfig restrict_sample(int total_bits, const Restriction& r, Rng& rng);
BinaryConfig restrict_sample(const SearchSpace& space, const Restriction& r, Rng& rng);

// Exact Fourier coefficients of f on {-1,+1}^n by full enumeration (n <= 16);
// a reference oracle for tests, not a production path. Entry `mask` holds the
// coefficient of the set {i : bit i of mask set}.
std::vector<double> exact_fourier_coeffs(int n,
                                         const std::function<double(const BinaryConfig&)>& f);

std::uint32_t basis_mask(const BasisIndex& term);
BasisIndex mask_to_basis(std::uint32_t mask);

}  // namespace pgsrhb
