#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvpd {

/// Default cap on polynomial degree. Contractions that would produce terms
/// above the cap are rejected (dense degree-k tensors grow as m^k).
inline constexpr int kDefaultDegreeCap = 6;

/// Finite underlying space: an ordered list of node positions x_1 < ... < x_m.
/// Positions double as labels; use Grid::labels for purely abstract points.
class Grid {
public:
    explicit Grid(std::vector<double> points);

    static Grid labels(int m);                        // 1, 2, ..., m
    static Grid uniform(double a, double b, int m);   // m equispaced nodes on [a,b]

    int size() const { return static_cast<int>(points_.size()); }
    double point(int i) const { return points_[static_cast<size_t>(i)]; }
    const std::vector<double>& points() const { return points_; }

    bool uniform_spacing() const;
    double spacing() const;   // throws unless uniform

    bool operator==(const Grid& other) const { return points_ == other.points_; }

private:
    std::vector<double> points_;
};

/// Non-negative measure on a grid, stored as its weight vector:
/// nu = c_1 δ_{x_1} + ... + c_m δ_{x_m} with c_i >= 0.
class MeasureVec {
public:
    MeasureVec(Grid grid, std::vector<double> weights);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    double weight(int i) const { return weights_[static_cast<size_t>(i)]; }
    int size() const { return grid_.size(); }
    double total_mass() const;

private:
    Grid grid_;
    std::vector<double> weights_;
};

/// Symmetric coefficient tensor of degree k on an m-point grid, stored densely
/// over {0..m-1}^k and symmetrized at construction. Degree 0 is a scalar.
class SymCoeff {
public:
    SymCoeff(int grid_size, int degree, std::vector<double> values);

    static SymCoeff zero(int grid_size, int degree);
    static SymCoeff constant(int grid_size, double value);            // degree 0
    static SymCoeff from_vector(std::vector<double> values);          // degree 1
    static SymCoeff rank_one(const std::vector<double>& g, int power);

    int degree() const { return degree_; }
    int grid_size() const { return m_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    size_t flat_size() const { return values_.size(); }

    double value_at(std::span<const int> idx) const;
    double scalar() const;   // degree-0 access

    double max_abs() const;
    bool is_zero() const { return max_abs() == 0.0; }

    SymCoeff& operator*=(double s);
    SymCoeff& axpy(double a, const SymCoeff& other);   // *this += a * other

private:
    int m_ = 0;
    int degree_ = 0;
    std::vector<double> values_;

    void symmetrize();
};

/// <g, nu^k> = sum over index tuples of g(i_1..i_k) c_{i_1}...c_{i_k}.
double pair(const SymCoeff& g, const MeasureVec& nu);

/// Symmetric tensor product: degree adds, and
/// pair(sym_tensor(g,h), nu) == pair(g,nu) * pair(h,nu).
SymCoeff sym_tensor(const SymCoeff& g, const SymCoeff& h,
                    int degree_cap = kDefaultDegreeCap);

/// Contract the last slot of a tensor against a weight vector.
SymCoeff contract_last(const SymCoeff& g, const std::vector<double>& c);

/// Polynomial on measures: p(nu) = sum_k <g_k, nu^k>, one SymCoeff per degree.
class PolyRep {
public:
    explicit PolyRep(int grid_size) : m_(grid_size) {}

    static PolyRep constant(int grid_size, double value);
    static PolyRep linear(std::vector<double> g);        // <g, nu>
    static PolyRep monomial(SymCoeff g);

    int grid_size() const { return m_; }
    int max_stored_degree() const { return static_cast<int>(terms_.size()) - 1; }
    int degree() const;    // largest k with nonzero coefficient, -1 for the zero polynomial

    const SymCoeff* term(int k) const;
    SymCoeff& ensure_term(int k);
    void add_term(const SymCoeff& g);

    PolyRep& operator*=(double s);
    PolyRep& axpy(double a, const PolyRep& other);

private:
    int m_ = 0;
    std::vector<SymCoeff> terms_;   // terms_[k] has degree k
};

double poly_eval(const PolyRep& p, const MeasureVec& nu);

/// Directional derivative map x -> d/d(eps) p(nu + eps δ_x) at eps = 0:
/// partial(p,nu)(i) = sum_k k <g_k(i,·), nu^{k-1}>.
std::vector<double> partial(const PolyRep& p, const MeasureVec& nu);

/// Second derivative as a degree-2 coefficient:
/// partial2(p,nu)(i,j) = sum_k k(k-1) <g_k(i,j,·), nu^{k-2}>.
SymCoeff partial2(const PolyRep& p, const MeasureVec& nu);

PolyRep poly_mul(const PolyRep& p, const PolyRep& q,
                 int degree_cap = kDefaultDegreeCap);

/// Enumerates canonical (non-decreasing) multi-indices of a dense symmetric
/// tensor; used for compact CSV export.
std::vector<std::vector<int>> canonical_indices(int grid_size, int degree);

size_t flat_index(std::span<const int> idx, int grid_size);

}  // namespace mvpd
