#include "pgsrhb/fourier.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace pgsrhb {

namespace {

void check_term(const BasisIndex& term, int n) {
    for (std::size_t i = 0; i < term.size(); ++i) {
        if (term[i] < 0 || term[i] >= n)
            throw std::out_of_range("basis index " + std::to_string(term[i]) +
                                    " outside 0.." + std::to_string(n - 1));
        if (i > 0 && term[i] <= term[i - 1])
            throw std::invalid_argument("basis index set not strictly ascending");
    }
}

}  // namespace

int eval_basis(const BasisIndex& term, const BinaryConfig& x) {
    check_term(term, int(x.size()));
    int v = 1;
    for (int i : term) {
        std::int8_t b = x[std::size_t(i)];
        if (b != 1 && b != -1) throw EncodingError("config entry outside {-1,+1}");
        v *= b;
    }
    return v;
}

std::vector<BasisIndex> enumerate_basis(int n, int max_degree) {
    if (n < 1) throw std::invalid_argument("need at least one variable");
    if (max_degree < 1 || max_degree > n)
        throw std::invalid_argument("degree must be in 1.." + std::to_string(n));

    std::vector<BasisIndex> out;
    for (int d = 1; d <= max_degree; ++d) {
        BasisIndex idx(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) idx[std::size_t(i)] = i;
        while (true) {
            out.push_back(idx);
            // Next combination in lexicographic order.
            int i = d - 1;
            while (i >= 0 && idx[std::size_t(i)] == n - d + i) --i;
            if (i < 0) break;
            ++idx[std::size_t(i)];
            for (int j = i + 1; j < d; ++j) idx[std::size_t(j)] = idx[std::size_t(j - 1)] + 1;
        }
    }
    return out;
}

DesignMatrix build_design(const std::vector<BinaryConfig>& configs,
                          const std::vector<BasisIndex>& basis) {
    DesignMatrix m;
    m.basis = basis;
    m.values.resize(Eigen::Index(configs.size()), Eigen::Index(basis.size()));
    for (std::size_t r = 0; r < configs.size(); ++r) {
        if (configs[r].size() != configs[0].size())
            throw EncodingError("configs of mixed widths in design");
        for (std::size_t c = 0; c < basis.size(); ++c)
            m.values(Eigen::Index(r), Eigen::Index(c)) = double(eval_basis(basis[c], configs[r]));
    }
    return m;
}

std::vector<std::vector<int>> group_columns(const std::vector<BasisIndex>& basis,
                                            const std::vector<Group>& groups) {
    std::map<int, int> var_to_group;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (int v : groups[g].indices) {
            if (!var_to_group.emplace(v, int(g)).second)
                throw std::invalid_argument("variable " + std::to_string(v) +
                                            " appears in two groups");
        }
    }

    std::map<std::vector<int>, std::vector<int>> blocks;
    for (std::size_t c = 0; c < basis.size(); ++c) {
        std::vector<int> sig;
        for (int v : basis[c]) {
            auto it = var_to_group.find(v);
            if (it == var_to_group.end())
                throw std::invalid_argument("variable " + std::to_string(v) +
                                            " not covered by any group");
            sig.push_back(it->second);
        }
        std::sort(sig.begin(), sig.end());
        sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
        blocks[sig].push_back(int(c));
    }

    std::vector<std::vector<int>> out;
    out.reserve(blocks.size());
    for (auto& [sig, cols] : blocks) out.push_back(std::move(cols));
    return out;
}

double eval_surrogate(const Surrogate& s, const BinaryConfig& x) {
    double v = s.intercept;
    for (const auto& t : s.terms) v += t.coeff * double(eval_basis(t.vars, x));
    return v;
}

BinaryConfig restrict_sample(int total_bits, const Restriction& r, Rng& rng) {
    if (r.indices.size() != r.values.size())
        throw std::invalid_argument("restriction indices and values differ in length");
    BinaryConfig out(std::size_t(total_bits), 0);
    for (std::size_t i = 0; i < r.indices.size(); ++i) {
        int idx = r.indices[i];
        if (idx < 0 || idx >= total_bits) throw std::out_of_range("restriction index out of range");
        if (i > 0 && idx <= r.indices[i - 1])
            throw std::invalid_argument("restriction indices not strictly ascending");
        if (r.values[i] != 1 && r.values[i] != -1)
            throw EncodingError("restriction value outside {-1,+1}");
        out[std::size_t(idx)] = r.values[i];
    }
    for (auto& b : out)
        if (b == 0) b = rng.sign();
    return out;
}

BinaryConfig restrict_sample(const SearchSpace& space, const Restriction& r, Rng& rng) {
    return restrict_sample(space.total_bits(), r, rng);
}

std::vector<double> exact_fourier_coeffs(int n,
                                         const std::function<double(const BinaryConfig&)>& f) {
    if (n < 1 || n > 16) throw std::invalid_argument("exact transform limited to 1..16 variables");
    const std::size_t size = std::size_t{1} << n;
    std::vector<double> table(size);
    BinaryConfig x(static_cast<std::size_t>(n));
    for (std::size_t idx = 0; idx < size; ++idx) {
        for (int i = 0; i < n; ++i)
            x[std::size_t(i)] = (idx >> i) & 1 ? std::int8_t{-1} : std::int8_t{1};
        table[idx] = f(x);
    }
    // In-place Walsh-Hadamard transform; entry `mask` then holds
    // sum_x f(x) chi_mask(x), so dividing by 2^n gives the coefficients.
    for (std::size_t len = 1; len < size; len <<= 1) {
        for (std::size_t i = 0; i < size; i += len << 1) {
            for (std::size_t j = i; j < i + len; ++j) {
                double a = table[j], b = table[j + len];
                table[j] = a + b;
                table[j + len] = a - b;
            }
        }
    }
    for (auto& v : table) v /= double(size);
    return table;
}

std::uint32_t basis_mask(const BasisIndex& term) {
    std::uint32_t m = 0;
    for (int i : term) {
        if (i < 0 || i > 31) throw std::out_of_range("basis index outside mask range");
        m |= std::uint32_t{1} << i;
    }
    return m;
}

BasisIndex mask_to_basis(std::uint32_t mask) {
    BasisIndex term;
    for (int i = 0; i < 32; ++i)
        if (mask & (std::uint32_t{1} << i)) term.push_back(i);
    return term;
}

}  // namespace pgsrhb
