#include "tiltalloc/zerodim.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <random>

namespace tiltalloc {

namespace {

using Complex = std::complex<double>;

// Compiled double image of a rational polynomial for fast evaluation.
struct DoublePoly {
    std::vector<std::pair<Monomial, double>> terms;
    double coeff_l1 = 0.0;

    static DoublePoly from(const Polynomial<Rational>& p) {
        DoublePoly d;
        for (const auto& [m, c] : p.terms()) {
            const double x = c.get_d();
            d.terms.emplace_back(m, x);
            d.coeff_l1 += std::abs(x);
        }
        return d;
    }

    Complex eval(std::span<const Complex> x) const {
        Complex acc = 0.0;
        for (const auto& [m, c] : terms) {
            Complex t = c;
            for (size_t i = 0; i < m.size(); ++i)
                for (int e = 0; e < m[i]; ++e) t *= x[i];
            acc += t;
        }
        return acc;
    }

    // sum of term magnitudes at x: the attainable evaluation scale
    double eval_scale(std::span<const Complex> x) const {
        double acc = 0.0;
        for (const auto& [m, c] : terms) {
            double t = std::abs(c);
            for (size_t i = 0; i < m.size(); ++i)
                for (int e = 0; e < m[i]; ++e) t *= std::abs(x[i]);
            acc += t;
        }
        return acc;
    }
};

struct CompiledSystem {
    std::vector<DoublePoly> polys;
    std::vector<std::vector<DoublePoly>> jacobian;  // [poly][var]
    int nvars = 0;

    static CompiledSystem from(const PolySystem<Rational>& sys, bool with_jacobian) {
        CompiledSystem c;
        if (sys.polys.empty()) return c;
        c.nvars = sys.polys.front().nvars();
        for (const auto& p : sys.polys) {
            c.polys.push_back(DoublePoly::from(p));
            if (with_jacobian) {
                std::vector<DoublePoly> row;
                for (int k = 0; k < c.nvars; ++k)
                    row.push_back(DoublePoly::from(p.derivative(k)));
                c.jacobian.push_back(std::move(row));
            }
        }
        return c;
    }

    // max_i |p_i(x)| / (1 + sum of term magnitudes). For roots of order one
    // this matches |p(x)| / (1 + |coeffs_i|_1); for large roots it is the
    // backward-error measure attainable in double evaluation.
    double scaled_residual(std::span<const Complex> x) const {
        double r = 0.0;
        for (const auto& p : polys)
            r = std::max(r, std::abs(p.eval(x)) / (1.0 + std::max(p.coeff_l1, p.eval_scale(x))));
        return r;
    }
};

// A few damped Newton steps on the square (or overdetermined) system.
void polish_root(const CompiledSystem& sys, std::vector<Complex>& x) {
    if (sys.jacobian.empty()) return;
    const int n = sys.nvars;
    const int m = static_cast<int>(sys.polys.size());
    double best = sys.scaled_residual(x);
    for (int iter = 0; iter < 40 && best > 1e-14; ++iter) {
        Eigen::VectorXcd f(m);
        Eigen::MatrixXcd jac(m, n);
        for (int i = 0; i < m; ++i) {
            f(i) = sys.polys[i].eval(x);
            for (int k = 0; k < n; ++k) jac(i, k) = sys.jacobian[i][k].eval(x);
        }
        Eigen::VectorXcd step = jac.completeOrthogonalDecomposition().solve(f);
        double damping = 1.0;
        bool improved = false;
        for (int half = 0; half < 8 && !improved; ++half, damping *= 0.5) {
            std::vector<Complex> trial = x;
            for (int k = 0; k < n; ++k) trial[k] -= damping * step(k);
            const double r = sys.scaled_residual(trial);
            if (r < best) {
                best = r;
                x = std::move(trial);
                improved = true;
            }
        }
        if (!improved) break;
    }
}

}  // namespace

int NormalSet::index_of(const Monomial& m) const {
    auto it = std::find(monomials.begin(), monomials.end(), m);
    return it == monomials.end() ? -1 : static_cast<int>(it - monomials.begin());
}

NormalSet normal_set(const GroebnerBasis& gb) {
    if (gb.elements.empty()) throw std::invalid_argument("empty basis");
    const int n = gb.elements.front().nvars();
    std::vector<Monomial> lms;
    for (const auto& g : gb.elements) lms.push_back(g.leading_monomial());

    // zero-dimensionality: every variable must have a pure-power leading monomial
    std::vector<int> bound(n, -1);
    for (const auto& lm : lms) {
        int var = -1;
        bool pure = true;
        for (int i = 0; i < n; ++i) {
            if (lm[i] == 0) continue;
            if (var >= 0) {
                pure = false;
                break;
            }
            var = i;
        }
        if (pure && var >= 0)
            bound[var] = bound[var] < 0 ? lm[var] : std::min(bound[var], lm[var]);
        if (pure && var < 0)
            throw std::invalid_argument("basis contains a nonzero constant: ideal is trivial");
    }
    for (int i = 0; i < n; ++i)
        if (bound[i] < 0)
            throw NotZeroDimensionalError(
                "no pure power of variable " + std::to_string(i) +
                " among leading monomials: ideal is not zero-dimensional");

    NormalSet ns;
    Monomial m(n, 0);
    // enumerate the exponent box below the pure-power bounds
    while (true) {
        bool divisible = false;
        for (const auto& lm : lms)
            if (mono_divides(lm, m)) {
                divisible = true;
                break;
            }
        if (!divisible) ns.monomials.push_back(m);
        int i = 0;
        while (i < n) {
            if (++m[i] < bound[i]) break;
            m[i] = 0;
            ++i;
        }
        if (i == n) break;
    }
    std::sort(ns.monomials.begin(), ns.monomials.end(),
              [&](const Monomial& a, const Monomial& b) { return gb.order.less(a, b); });
    return ns;
}

std::vector<std::vector<Rational>> multiplication_matrix_exact(const GroebnerBasis& gb,
                                                               const NormalSet& ns, int var) {
    const int n = gb.elements.front().nvars();
    const size_t dim = ns.size();
    std::map<Monomial, int> index;
    for (size_t i = 0; i < dim; ++i) index[ns.monomials[i]] = static_cast<int>(i);

    std::vector<std::vector<Rational>> mat(dim, std::vector<Rational>(dim, Rational(0)));
    for (size_t j = 0; j < dim; ++j) {
        Monomial m = ns.monomials[j];
        m[var] += 1;
        Polynomial<Rational> p(n, gb.order);
        p.add_term(m, Rational(1));
        Polynomial<Rational> nf = normal_form<Rational>(p, gb.elements);
        for (const auto& [mono, c] : nf.terms()) {
            auto it = index.find(mono);
            if (it == index.end())
                throw std::logic_error("normal form left the span of the normal set");
            mat[it->second][j] = c;
        }
    }
    return mat;
}

Eigen::MatrixXd multiplication_matrix(const GroebnerBasis& gb, const NormalSet& ns, int var) {
    auto exact = multiplication_matrix_exact(gb, ns, var);
    const auto dim = static_cast<Eigen::Index>(ns.size());
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = exact[i][j].get_d();
    return m;
}

std::vector<Eigen::MatrixXd> multiplication_matrices(const GroebnerBasis& gb,
                                                     const NormalSet& ns) {
    std::vector<Eigen::MatrixXd> mats;
    const int n = gb.elements.front().nvars();
    for (int k = 0; k < n; ++k) mats.push_back(multiplication_matrix(gb, ns, k));
    return mats;
}

namespace {

// Parlett-Reinsch balancing with power-of-two factors: D^-1 M D with row and
// column norms equalized. Exact in floating point; greatly improves eigen
// accuracy when entry magnitudes span many orders.
Eigen::VectorXd balance_in_place(Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    bool converged = false;
    while (!converged) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(m(j, i));
                r += std::abs(m(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / 2.0) {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while (c >= r * 2.0) {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if ((c + r) < 0.95 * s) {
                converged = false;
                d(i) *= f;
                m.col(i) *= f;
                m.row(i) /= f;
            }
        }
    }
    return d;
}

}  // namespace

EigenPairs eigen_decompose(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
    Eigen::MatrixXd balanced = m;
    const Eigen::VectorXd d = balance_in_place(balanced);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(balanced);
    if (solver.info() != Eigen::Success)
        throw EigenConvergenceError("eigen decomposition did not converge");
    EigenPairs out{solver.eigenvalues(), solver.eigenvectors()};
    const double scale = balanced.norm();
    for (Eigen::Index l = 0; l < out.values.size(); ++l) {
        Eigen::VectorXcd v = out.vectors.col(l);
        const double res = (balanced * v - out.values(l) * v).norm() / v.norm();
        if (res > 1e-8 * std::max(scale, 1.0))
            throw EigenConvergenceError("eigenpair residual exceeds tolerance");
        v = d.asDiagonal() * v;  // undo balancing
        v.normalize();
        out.vectors.col(l) = v;
    }
    return out;
}

std::vector<CandidateRoot> solve_roots(const GroebnerBasis& gb, const NormalSet& ns,
                                       const std::vector<Eigen::MatrixXd>& mats,
                                       const PolySystem<Rational>& original,
                                       const SolveOptions& opts) {
    const int n = static_cast<int>(mats.size());
    const auto dim = static_cast<Eigen::Index>(ns.size());
    for (const auto& m : mats)
        if (m.rows() != dim || m.cols() != dim)
            throw std::invalid_argument("matrix size inconsistent with normal set");

    const CompiledSystem sys = CompiledSystem::from(original, opts.newton_polish);

    // coordinate read-off fallback needs the unit and pure-variable monomials
    const int unit_idx = ns.index_of(Monomial(n, 0));
    std::vector<int> var_idx(n, -1);
    for (int k = 0; k < n; ++k) {
        Monomial m(n, 0);
        m[k] = 1;
        var_idx[k] = ns.index_of(m);
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    std::vector<Eigen::MatrixXcd> cmats;
    for (const auto& m : mats) cmats.push_back(m.cast<Complex>());

    std::vector<CandidateRoot> best;
    double best_residual = std::numeric_limits<double>::infinity();
    bool best_ok = false;

    for (int attempt = 0; attempt <= opts.max_redraws; ++attempt) {
        Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(dim, dim);
        for (int k = 0; k < n; ++k) combo += unif(rng) * mats[k];
        EigenPairs pairs = eigen_decompose(combo);

        bool separated = true;
        for (Eigen::Index a = 0; a < dim && separated; ++a)
            for (Eigen::Index b = a + 1; b < dim; ++b)
                if (std::abs(pairs.values(a) - pairs.values(b)) < opts.eigen_separation) {
                    separated = false;
                    break;
                }

        std::vector<CandidateRoot> roots;
        double max_res = 0.0;
        for (Eigen::Index l = 0; l < dim; ++l) {
            const Eigen::VectorXcd v = pairs.vectors.col(l);
            CandidateRoot root;
            root.coords.resize(n);
            // bilinear (not Hermitian) normalization; near-isotropic vectors
            // are rescued by the read-off fallback below
            const Complex vtv = (v.transpose() * v).value();
            const bool isotropic = std::abs(vtv) < 1e-12;
            for (int k = 0; k < n; ++k) {
                const Complex num = (v.transpose() * cmats[k] * v).value();
                root.coords[k] = isotropic ? num : num / vtv;
            }

            // cross-check against the normal-set coordinate read-off
            if (unit_idx >= 0 && std::abs(v(unit_idx)) > 1e-8) {
                std::vector<Complex> readoff(n);
                bool have_all = true;
                for (int k = 0; k < n; ++k) {
                    if (var_idx[k] < 0) {
                        have_all = false;
                        break;
                    }
                    readoff[k] = v(var_idx[k]) / v(unit_idx);
                }
                if (have_all) {
                    double diverge = 0.0;
                    for (int k = 0; k < n; ++k)
                        diverge = std::max(diverge, std::abs(readoff[k] - root.coords[k]));
                    if (diverge > 1e-6 &&
                        sys.scaled_residual(readoff) < sys.scaled_residual(root.coords))
                        root.coords = std::move(readoff);
                }
            }

            if (opts.newton_polish) polish_root(sys, root.coords);
            root.residual = sys.scaled_residual(root.coords);
            for (const auto& c : root.coords)
                root.imag_norm = std::max(root.imag_norm, std::abs(c.imag()));
            max_res = std::max(max_res, root.residual);
            roots.push_back(std::move(root));
        }

        const bool ok = separated && max_res <= opts.residual_tol;
        if (max_res < best_residual || (ok && !best_ok)) {
            best_residual = max_res;
            best = roots;
            best_ok = max_res <= opts.residual_tol;
        }
        if (ok) break;
        if (attempt == opts.max_redraws && !best_ok)
            throw DegenerateCombinationError(
                "no random combination yielded roots within tolerance");
    }

    // deduplicate eigen clusters by coordinate distance
    std::vector<CandidateRoot> out;
    for (auto& r : best) {
        double scale = 0.0;
        for (const auto& c : r.coords) scale = std::max(scale, std::abs(c));
        bool merged = false;
        for (auto& o : out) {
            double d = 0.0;
            for (int k = 0; k < n; ++k) d = std::max(d, std::abs(o.coords[k] - r.coords[k]));
            if (d < opts.cluster_tol * (1.0 + scale)) {
                o.multiplicity += 1;
                if (r.residual < o.residual) {
                    o.coords = r.coords;
                    o.residual = r.residual;
                    o.imag_norm = r.imag_norm;
                }
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::vector<double>> filter_real(const std::vector<CandidateRoot>& roots,
                                             double imag_tol) {
    std::vector<std::vector<double>> out;
    for (const auto& r : roots) {
        double scale = 0.0;
        for (const auto& c : r.coords) scale = std::max(scale, std::abs(c));
        if (r.imag_norm <= imag_tol * (1.0 + scale)) {
            std::vector<double> x;
            for (const auto& c : r.coords) x.push_back(c.real());
            out.push_back(std::move(x));
        }
    }
    return out;
}

double max_commutator(const std::vector<Eigen::MatrixXd>& mats) {
    double worst = 0.0;
    for (size_t j = 0; j < mats.size(); ++j)
        for (size_t k = j + 1; k < mats.size(); ++k) {
            const double denom = mats[j].norm() * mats[k].norm();
            if (denom == 0.0) continue;
            worst = std::max(worst,
                             (mats[j] * mats[k] - mats[k] * mats[j]).norm() / denom);
        }
    return worst;
}

void dump_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ",";
            os << m(i, j);
        }
        os << "\n";
    }
}

void dump_roots_json(std::ostream& os, const std::vector<CandidateRoot>& roots) {
    os << "[";
    for (size_t i = 0; i < roots.size(); ++i) {
        if (i) os << ",";
        os << "[";
        for (size_t k = 0; k < roots[i].coords.size(); ++k) {
            if (k) os << ",";
            os << "[" << roots[i].coords[k].real() << "," << roots[i].coords[k].imag() << "]";
        }
        os << "]";
    }
    os << "]";
}

}  // namespace tiltalloc
