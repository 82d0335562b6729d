// Brute-force reference implementations used only by tests. Everything here
// is computed from first principles (explicit operator action, permutation
// sums, finite differences) and never calls the code paths it checks.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

namespace oracle {

// All (n0, nm, np) occupations with n0 + nm + np = N.
struct ThreeModeBasis {
    std::vector<std::tuple<int, int, int>> states;
    std::map<std::tuple<int, int, int>, int> index;

    explicit ThreeModeBasis(int N) {
        for (int n0 = N; n0 >= 0; --n0)
            for (int nm = 0; nm + n0 <= N; ++nm) {
                const int np = N - n0 - nm;
                index[{n0, nm, np}] = static_cast<int>(states.size());
                states.push_back({n0, nm, np});
            }
    }
};

// Dense spin-changing-collision Hamiltonian assembled by applying the
// second-quantised operators term by term to every occupation state.
inline Eigen::MatrixXd scc_hamiltonian_dense(int N, double lambda, double q,
                                             const ThreeModeBasis& basis) {
    const int dim = static_cast<int>(basis.states.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        auto [n0, nm, np] = basis.states[i];
        h(i, i) += 2.0 * lambda * n0 * (nm + np) + (q - lambda) * (nm + np);
        if (n0 >= 2) {  // a0 a0 adag- adag+
            const int j = basis.index.at({n0 - 2, nm + 1, np + 1});
            h(j, i) += 2.0 * lambda * std::sqrt(double(n0) * (n0 - 1)) *
                       std::sqrt(double(nm + 1)) * std::sqrt(double(np + 1));
        }
        if (nm >= 1 && np >= 1) {  // adag0 adag0 a- a+
            const int j = basis.index.at({n0 + 2, nm - 1, np - 1});
            h(j, i) += 2.0 * lambda * std::sqrt(double(n0 + 1) * (n0 + 2)) *
                       std::sqrt(double(nm) * np);
        }
    }
    return h;
}

// H projected onto the paired ladder states. The k-th ladder state is the
// occupation (2(n-k), k, k) with sign (-1)^k from the pair creator.
inline Eigen::MatrixXd scc_hamiltonian_paired(int N, double lambda, double q) {
    const int n = N / 2;
    ThreeModeBasis basis(N);
    Eigen::MatrixXd h = scc_hamiltonian_dense(N, lambda, q, basis);
    Eigen::MatrixXd out(n + 1, n + 1);
    for (int k = 0; k <= n; ++k)
        for (int l = 0; l <= n; ++l) {
            const int i = basis.index.at({2 * (n - k), k, k});
            const int j = basis.index.at({2 * (n - l), l, l});
            const double sign = ((k + l) % 2 == 0) ? 1.0 : -1.0;
            out(k, l) = sign * h(i, j);
        }
    return out;
}

// Expansion coefficients of a Bethe state over the pair ladder, evaluated as
// the literal sum over all permutations (O(n!) — tiny n only).
inline Eigen::VectorXd alpha_by_permutations(const Eigen::VectorXd& rapidities) {
    const int n = static_cast<int>(rapidities.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n + 1);
    for (int k = 0; k <= n; ++k) {
        std::vector<int> p = perm;
        double sum = 0.0;
        do {
            double term = 1.0;
            for (int a = 0; a < k; ++a) term *= -1.0 / (1.0 + rapidities[p[a]]);
            for (int b = k; b < n; ++b) term *= 1.0 / (1.0 - rapidities[p[b]]);
            sum += term;
        } while (std::next_permutation(p.begin(), p.end()));
        alpha[k] = sum;
    }
    return alpha;
}

// Central finite difference of a scalar function.
template <typename F>
double central_difference(F&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
