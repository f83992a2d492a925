#pragma once

// Multivariate polynomials over C, just enough for the supported class of
// test maps: evaluation, holomorphic partial derivatives, and arithmetic
// to assemble components.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nevlab {

using Complex = std::complex<double>;

class Polynomial {
public:
    struct Term {
        Complex coeff;
        std::vector<int> exps; // one exponent per variable
    };

    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    static Polynomial constant(Complex c, int nvars) {
        Polynomial p(nvars);
        if (c != Complex(0.0)) p.terms_.push_back({c, std::vector<int>(nvars, 0)});
        return p;
    }

    static Polynomial variable(int index, int nvars) {
        if (index < 0 || index >= nvars) throw std::invalid_argument("Polynomial: variable index out of range");
        Polynomial p(nvars);
        std::vector<int> e(nvars, 0);
        e[index] = 1;
        p.terms_.push_back({Complex(1.0), std::move(e)});
        return p;
    }

    int nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    Complex eval(const std::vector<Complex>& z) const {
        if (static_cast<int>(z.size()) != nvars_) throw std::invalid_argument("Polynomial: wrong arity");
        Complex sum(0.0);
        for (const Term& t : terms_) {
            Complex prod = t.coeff;
            for (int v = 0; v < nvars_; ++v)
                for (int k = 0; k < t.exps[v]; ++k) prod *= z[v];
            sum += prod;
        }
        return sum;
    }

    Polynomial derivative(int var) const {
        Polynomial out(nvars_);
        for (const Term& t : terms_) {
            if (t.exps[var] == 0) continue;
            Term d = t;
            d.coeff *= static_cast<double>(t.exps[var]);
            d.exps[var] -= 1;
            out.terms_.push_back(std::move(d));
        }
        return out;
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial out = *this;
        for (const Term& t : o.terms_) out.add_term(t);
        return out;
    }

    Polynomial operator*(Complex c) const {
        Polynomial out = *this;
        if (c == Complex(0.0)) {
            out.terms_.clear();
            return out;
        }
        for (Term& t : out.terms_) t.coeff *= c;
        return out;
    }

    Polynomial operator*(const Polynomial& o) const {
        Polynomial out(nvars_);
        for (const Term& s : terms_) {
            for (const Term& t : o.terms_) {
                Term prod;
                prod.coeff = s.coeff * t.coeff;
                prod.exps.resize(nvars_);
                for (int v = 0; v < nvars_; ++v) prod.exps[v] = s.exps[v] + t.exps[v];
                out.add_term(prod);
            }
        }
        return out;
    }

private:
    void add_term(const Term& t) {
        if (t.coeff == Complex(0.0)) return;
        for (Term& mine : terms_) {
            if (mine.exps == t.exps) {
                mine.coeff += t.coeff;
                return;
            }
        }
        terms_.push_back(t);
    }

    int nvars_ = 0;
    std::vector<Term> terms_;
};

} // namespace nevlab
