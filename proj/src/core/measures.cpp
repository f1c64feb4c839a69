#include "core/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvpd {

namespace {

size_t pow_size(int m, int k) {
    size_t n = 1;
    for (int i = 0; i < k; ++i) n *= static_cast<size_t>(m);
    return n;
}

void check_same_grid(int a, int b) {
    if (a != b) throw std::invalid_argument("grid mismatch");
}

}  // namespace

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("grid needs at least one point");
    for (size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1]))
            throw std::invalid_argument("grid points must be strictly increasing");
    }
}

Grid Grid::labels(int m) {
    if (m < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> pts(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) pts[static_cast<size_t>(i)] = i + 1;
    return Grid(std::move(pts));
}

Grid Grid::uniform(double a, double b, int m) {
    if (m < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> pts(static_cast<size_t>(m));
    if (m == 1) {
        pts[0] = 0.5 * (a + b);
    } else {
        double h = (b - a) / (m - 1);
        for (int i = 0; i < m; ++i) pts[static_cast<size_t>(i)] = a + h * i;
    }
    return Grid(std::move(pts));
}

bool Grid::uniform_spacing() const {
    if (size() < 3) return true;
    double h = points_[1] - points_[0];
    for (size_t i = 2; i < points_.size(); ++i) {
        double hi = points_[i] - points_[i - 1];
        if (std::abs(hi - h) > 1e-12 * std::max(1.0, std::abs(h))) return false;
    }
    return true;
}

double Grid::spacing() const {
    if (size() < 2) throw std::domain_error("spacing undefined for a single-node grid");
    if (!uniform_spacing()) throw std::domain_error("grid is not uniform");
    return points_[1] - points_[0];
}

MeasureVec::MeasureVec(Grid grid, std::vector<double> weights)
    : grid_(std::move(grid)), weights_(std::move(weights)) {
    if (static_cast<int>(weights_.size()) != grid_.size())
        throw std::invalid_argument("weight vector size does not match grid");
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("measure weights must be non-negative");
    }
}

double MeasureVec::total_mass() const {
    double s = 0;
    for (double w : weights_) s += w;
    return s;
}

size_t flat_index(std::span<const int> idx, int grid_size) {
    size_t f = 0;
    for (int i : idx) f = f * static_cast<size_t>(grid_size) + static_cast<size_t>(i);
    return f;
}

SymCoeff::SymCoeff(int grid_size, int degree, std::vector<double> values)
    : m_(grid_size), degree_(degree), values_(std::move(values)) {
    if (grid_size < 1) throw std::invalid_argument("grid needs at least one point");
    if (degree < 0) throw std::invalid_argument("negative degree");
    if (values_.size() != pow_size(m_, degree_))
        throw std::invalid_argument("dense value array has wrong size for degree");
    symmetrize();
}

SymCoeff SymCoeff::zero(int grid_size, int degree) {
    return SymCoeff(grid_size, degree, std::vector<double>(pow_size(grid_size, degree), 0.0));
}

SymCoeff SymCoeff::constant(int grid_size, double value) {
    return SymCoeff(grid_size, 0, {value});
}

SymCoeff SymCoeff::from_vector(std::vector<double> values) {
    int m = static_cast<int>(values.size());
    return SymCoeff(m, 1, std::move(values));
}

SymCoeff SymCoeff::rank_one(const std::vector<double>& g, int power) {
    int m = static_cast<int>(g.size());
    if (power == 0) return constant(m, 1.0);
    std::vector<double> vals(pow_size(m, power));
    std::vector<int> idx(static_cast<size_t>(power), 0);
    for (size_t f = 0; f < vals.size(); ++f) {
        double prod = 1.0;
        for (int d : idx) prod *= g[static_cast<size_t>(d)];
        vals[f] = prod;
        for (int pos = power - 1; pos >= 0; --pos) {
            if (++idx[static_cast<size_t>(pos)] < m) break;
            idx[static_cast<size_t>(pos)] = 0;
        }
    }
    return SymCoeff(m, power, std::move(vals));
}

double SymCoeff::value_at(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != degree_)
        throw std::invalid_argument("index tuple length does not match degree");
    return values_[flat_index(idx, m_)];
}

double SymCoeff::scalar() const {
    if (degree_ != 0) throw std::domain_error("scalar() on tensor of positive degree");
    return values_[0];
}

double SymCoeff::max_abs() const {
    double mx = 0;
    for (double v : values_) mx = std::max(mx, std::abs(v));
    return mx;
}

SymCoeff& SymCoeff::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

SymCoeff& SymCoeff::axpy(double a, const SymCoeff& other) {
    check_same_grid(m_, other.m_);
    if (degree_ != other.degree_) throw std::invalid_argument("degree mismatch in axpy");
    for (size_t i = 0; i < values_.size(); ++i) values_[i] += a * other.values_[i];
    return *this;
}

void SymCoeff::symmetrize() {
    if (degree_ <= 1) return;
    std::vector<int> canon(static_cast<size_t>(degree_), 0);
    std::vector<int> perm;
    while (true) {
        // Average over the orbit of this canonical tuple, then scatter back.
        perm.assign(canon.begin(), canon.end());
        double sum = 0;
        int count = 0;
        do {
            sum += values_[flat_index(perm, m_)];
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        double avg = sum / count;
        perm.assign(canon.begin(), canon.end());
        do {
            values_[flat_index(perm, m_)] = avg;
        } while (std::next_permutation(perm.begin(), perm.end()));

        int j = degree_ - 1;
        while (j >= 0 && canon[static_cast<size_t>(j)] == m_ - 1) --j;
        if (j < 0) break;
        ++canon[static_cast<size_t>(j)];
        for (int l = j + 1; l < degree_; ++l) canon[static_cast<size_t>(l)] = canon[static_cast<size_t>(j)];
    }
}

double pair(const SymCoeff& g, const MeasureVec& nu) {
    check_same_grid(g.grid_size(), nu.size());
    int k = g.degree();
    if (k == 0) return g.values()[0];
    int m = g.grid_size();
    const auto& c = nu.weights();
    const auto& vals = g.values();
    std::vector<int> idx(static_cast<size_t>(k), 0);
    double total = 0;
    for (size_t f = 0; f < vals.size(); ++f) {
        double prod = vals[f];
        for (int d : idx) prod *= c[static_cast<size_t>(d)];
        total += prod;
        for (int pos = k - 1; pos >= 0; --pos) {
            if (++idx[static_cast<size_t>(pos)] < m) break;
            idx[static_cast<size_t>(pos)] = 0;
        }
    }
    return total;
}

SymCoeff sym_tensor(const SymCoeff& g, const SymCoeff& h, int degree_cap) {
    check_same_grid(g.grid_size(), h.grid_size());
    int k = g.degree(), l = h.degree();
    if (k + l > degree_cap)
        throw std::domain_error("sym_tensor result exceeds degree cap");
    int m = g.grid_size();
    if (k == 0) {
        SymCoeff out = h;
        out *= g.values()[0];
        return out;
    }
    if (l == 0) {
        SymCoeff out = g;
        out *= h.values()[0];
        return out;
    }
    // Place g on the first k slots, h on the rest; the SymCoeff constructor
    // averages over all (k+l)! slot permutations, which is exactly the
    // symmetric tensor product.
    size_t hs = h.flat_size();
    std::vector<double> vals(g.flat_size() * hs);
    for (size_t i = 0; i < g.flat_size(); ++i) {
        double gv = g.values()[i];
        double* row = vals.data() + i * hs;
        for (size_t j = 0; j < hs; ++j) row[j] = gv * h.values()[j];
    }
    return SymCoeff(m, k + l, std::move(vals));
}

SymCoeff contract_last(const SymCoeff& g, const std::vector<double>& c) {
    int m = g.grid_size();
    check_same_grid(m, static_cast<int>(c.size()));
    int k = g.degree();
    if (k == 0) throw std::domain_error("cannot contract a degree-0 coefficient");
    size_t out_size = g.flat_size() / static_cast<size_t>(m);
    std::vector<double> vals(out_size, 0.0);
    const auto& src = g.values();
    for (size_t j = 0; j < out_size; ++j) {
        double s = 0;
        const double* row = src.data() + j * static_cast<size_t>(m);
        for (int i = 0; i < m; ++i) s += row[i] * c[static_cast<size_t>(i)];
        vals[j] = s;
    }
    return SymCoeff(m, k - 1, std::move(vals));
}

PolyRep PolyRep::constant(int grid_size, double value) {
    PolyRep p(grid_size);
    p.add_term(SymCoeff::constant(grid_size, value));
    return p;
}

PolyRep PolyRep::linear(std::vector<double> g) {
    PolyRep p(static_cast<int>(g.size()));
    p.add_term(SymCoeff::from_vector(std::move(g)));
    return p;
}

PolyRep PolyRep::monomial(SymCoeff g) {
    PolyRep p(g.grid_size());
    p.add_term(g);
    return p;
}

int PolyRep::degree() const {
    for (int k = max_stored_degree(); k >= 0; --k) {
        if (!terms_[static_cast<size_t>(k)].is_zero()) return k;
    }
    return -1;
}

const SymCoeff* PolyRep::term(int k) const {
    if (k < 0 || k > max_stored_degree()) return nullptr;
    return &terms_[static_cast<size_t>(k)];
}

SymCoeff& PolyRep::ensure_term(int k) {
    while (max_stored_degree() < k) {
        terms_.push_back(SymCoeff::zero(m_, max_stored_degree() + 1));
    }
    return terms_[static_cast<size_t>(k)];
}

void PolyRep::add_term(const SymCoeff& g) {
    check_same_grid(m_, g.grid_size());
    ensure_term(g.degree()).axpy(1.0, g);
}

PolyRep& PolyRep::operator*=(double s) {
    for (auto& t : terms_) t *= s;
    return *this;
}

PolyRep& PolyRep::axpy(double a, const PolyRep& other) {
    check_same_grid(m_, other.m_);
    for (int k = 0; k <= other.max_stored_degree(); ++k) {
        const SymCoeff& t = *other.term(k);
        if (t.is_zero()) continue;
        ensure_term(k).axpy(a, t);
    }
    return *this;
}

double poly_eval(const PolyRep& p, const MeasureVec& nu) {
    check_same_grid(p.grid_size(), nu.size());
    double s = 0;
    for (int k = 0; k <= p.max_stored_degree(); ++k) {
        const SymCoeff* t = p.term(k);
        if (t && !t->is_zero()) s += pair(*t, nu);
    }
    return s;
}

std::vector<double> partial(const PolyRep& p, const MeasureVec& nu) {
    check_same_grid(p.grid_size(), nu.size());
    int m = p.grid_size();
    std::vector<double> grad(static_cast<size_t>(m), 0.0);
    for (int k = 1; k <= p.max_stored_degree(); ++k) {
        const SymCoeff* t = p.term(k);
        if (!t || t->is_zero()) continue;
        SymCoeff down = *t;
        for (int j = 0; j < k - 1; ++j) down = contract_last(down, nu.weights());
        for (int i = 0; i < m; ++i) grad[static_cast<size_t>(i)] += k * down.values()[static_cast<size_t>(i)];
    }
    return grad;
}

SymCoeff partial2(const PolyRep& p, const MeasureVec& nu) {
    check_same_grid(p.grid_size(), nu.size());
    int m = p.grid_size();
    SymCoeff hess = SymCoeff::zero(m, 2);
    for (int k = 2; k <= p.max_stored_degree(); ++k) {
        const SymCoeff* t = p.term(k);
        if (!t || t->is_zero()) continue;
        SymCoeff down = *t;
        for (int j = 0; j < k - 2; ++j) down = contract_last(down, nu.weights());
        hess.axpy(static_cast<double>(k) * (k - 1), down);
    }
    return hess;
}

PolyRep poly_mul(const PolyRep& p, const PolyRep& q, int degree_cap) {
    if (p.grid_size() != q.grid_size()) throw std::invalid_argument("grid mismatch");
    PolyRep out(p.grid_size());
    for (int k = 0; k <= p.max_stored_degree(); ++k) {
        const SymCoeff* a = p.term(k);
        if (!a || a->is_zero()) continue;
        for (int l = 0; l <= q.max_stored_degree(); ++l) {
            const SymCoeff* b = q.term(l);
            if (!b || b->is_zero()) continue;
            out.add_term(sym_tensor(*a, *b, degree_cap));
        }
    }
    return out;
}

std::vector<std::vector<int>> canonical_indices(int grid_size, int degree) {
    std::vector<std::vector<int>> out;
    if (degree == 0) {
        out.push_back({});
        return out;
    }
    std::vector<int> idx(static_cast<size_t>(degree), 0);
    while (true) {
        out.push_back(idx);
        int j = degree - 1;
        while (j >= 0 && idx[static_cast<size_t>(j)] == grid_size - 1) --j;
        if (j < 0) break;
        ++idx[static_cast<size_t>(j)];
        for (int l = j + 1; l < degree; ++l) idx[static_cast<size_t>(l)] = idx[static_cast<size_t>(j)];
    }
    return out;
}

}  // namespace mvpd
