#pragma once

// Delaunay triangulation (d <= 3) by incremental Bowyer-Watson insertion and
// piecewise-linear interpolation over the resulting simplices.
//
// The hull is closed with "ghost" simplices that share a symbolic vertex at
// infinity instead of a finite super-simplex, so the final triangulation
// covers exactly the convex hull of the input.

#include "precml/core/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OutsideHull : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Simplices are positively oriented; neighbors[s][k] is the simplex across
/// the facet opposite vertex k, or -1 on the hull. Only the first dim+1
/// entries of each array are meaningful.
struct Triangulation {
    int dim = 0;
    Eigen::MatrixXd vertices;
    Eigen::VectorXd values;
    std::vector<std::array<int, 4>> simplices;
    std::vector<std::array<int, 4>> neighbors;

    // Similarity map (x - center) / scale applied before every geometric
    // predicate; it leaves the Delaunay property and barycentric weights intact.
    Eigen::VectorXd center;
    double scale = 1.0;
    std::size_t skipped_points = 0;

    std::size_t simplex_count() const { return simplices.size(); }
    /// Stored numbers: d coordinates plus one value per vertex.
    Eigen::Index param_count() const { return vertices.rows() * (dim + 1); }
};

namespace detail {

template <int D>
using Pt = std::array<double, D>;

template <int D>
inline double dist2(const Pt<D>& a, const Pt<D>& b) {
    double s = 0.0;
    for (int i = 0; i < D; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

/// D! times the signed volume of the simplex.
template <int D>
inline double orient(const std::array<Pt<D>, D + 1>& v) {
    if constexpr (D == 1) {
        return v[1][0] - v[0][0];
    } else if constexpr (D == 2) {
        return (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
    } else {
        const double ax = v[1][0] - v[0][0], ay = v[1][1] - v[0][1], az = v[1][2] - v[0][2];
        const double bx = v[2][0] - v[0][0], by = v[2][1] - v[0][1], bz = v[2][2] - v[0][2];
        const double cx = v[3][0] - v[0][0], cy = v[3][1] - v[0][1], cz = v[3][2] - v[0][2];
        return ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx);
    }
}

template <int D>
inline std::pair<Pt<D>, double> circumsphere(const std::array<Pt<D>, D + 1>& v) {
    Eigen::Matrix<double, D, D> a;
    Eigen::Matrix<double, D, 1> rhs;
    for (int i = 0; i < D; ++i) {
        double n2 = 0.0;
        for (int j = 0; j < D; ++j) {
            a(i, j) = v[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)] - v[0][static_cast<std::size_t>(j)];
            n2 += a(i, j) * a(i, j);
        }
        rhs(i) = 0.5 * n2;
    }
    const Eigen::Matrix<double, D, 1> c = a.partialPivLu().solve(rhs);
    Pt<D> center{};
    for (int j = 0; j < D; ++j) center[static_cast<std::size_t>(j)] = v[0][static_cast<std::size_t>(j)] + c(j);
    return {center, c.squaredNorm()};
}

template <int D>
class BowyerWatson {
public:
    static constexpr int ghost = -1;
    static constexpr int K = D + 1;

    BowyerWatson(std::vector<Pt<D>> pts, double det_tol, double dup_tol, std::uint64_t seed)
        : pts_(std::move(pts)), det_tol_(det_tol), dup_tol2_(dup_tol * dup_tol), rng_(seed) {}

    void build() {
        const int n = static_cast<int>(pts_.size());
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        shuffle(std::span<int>(order), rng_);

        const auto seed_simplex = initial_vertices(order);
        init_cells(seed_simplex);
        std::vector<char> used(static_cast<std::size_t>(n), 0);
        for (int v : seed_simplex) used[static_cast<std::size_t>(v)] = 1;

        mark_.assign(cells_.size(), 0);
        for (int v : order)
            if (!used[static_cast<std::size_t>(v)] && !insert(v)) ++skipped_;
    }

    /// Live finite simplices with hull neighbors mapped to -1.
    void export_to(Triangulation& tri) const {
        std::vector<int> remap(cells_.size(), -1);
        int count = 0;
        for (std::size_t c = 0; c < cells_.size(); ++c)
            if (cells_[c].alive && !is_ghost(cells_[c])) remap[c] = count++;
        tri.simplices.clear();
        tri.neighbors.clear();
        tri.simplices.reserve(static_cast<std::size_t>(count));
        tri.neighbors.reserve(static_cast<std::size_t>(count));
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            if (remap[c] < 0) continue;
            std::array<int, 4> s{-1, -1, -1, -1};
            std::array<int, 4> nb{-1, -1, -1, -1};
            for (int k = 0; k < K; ++k) {
                s[static_cast<std::size_t>(k)] = cells_[c].v[static_cast<std::size_t>(k)];
                nb[static_cast<std::size_t>(k)] = remap[static_cast<std::size_t>(cells_[c].nb[static_cast<std::size_t>(k)])];
            }
            tri.simplices.push_back(s);
            tri.neighbors.push_back(nb);
        }
        tri.skipped_points = skipped_;
    }

private:
    struct Cell {
        std::array<int, K> v{};
        std::array<int, K> nb{};
        Pt<D> center{};
        double r2 = 0.0;
        bool alive = true;
    };

    std::vector<Pt<D>> pts_;
    double det_tol_;
    double dup_tol2_;
    Rng rng_;
    std::vector<Cell> cells_;
    std::vector<int> free_;
    std::vector<unsigned> mark_;
    unsigned epoch_ = 0;
    int last_ = 0;
    std::size_t skipped_ = 0;

    static bool is_ghost(const Cell& c) {
        return std::find(c.v.begin(), c.v.end(), ghost) != c.v.end();
    }
    static int ghost_index(const Cell& c) {
        return static_cast<int>(std::find(c.v.begin(), c.v.end(), ghost) - c.v.begin());
    }

    std::array<Pt<D>, K> corners(const std::array<int, K>& v, int k, const Pt<D>& q) const {
        std::array<Pt<D>, K> p{};
        for (int i = 0; i < K; ++i)
            p[static_cast<std::size_t>(i)] = i == k ? q : pts_[static_cast<std::size_t>(v[static_cast<std::size_t>(i)])];
        return p;
    }

    double orient_replaced(const std::array<int, K>& v, int k, const Pt<D>& q) const {
        return orient<D>(corners(v, k, q));
    }

    void set_sphere(Cell& c) const {
        if (is_ghost(c)) return;
        std::array<Pt<D>, K> p{};
        for (int i = 0; i < K; ++i) p[static_cast<std::size_t>(i)] = pts_[static_cast<std::size_t>(c.v[static_cast<std::size_t>(i)])];
        std::tie(c.center, c.r2) = circumsphere<D>(p);
    }

    // q inside the circumball of the finite facet of a ghost, assuming q lies
    // (numerically) in that facet's affine hull.
    bool inside_hull_facet_ball(const Cell& c, const Pt<D>& q) const {
        std::array<Pt<D>, D> f{};
        int m = 0;
        for (int i = 0; i < K; ++i)
            if (c.v[static_cast<std::size_t>(i)] != ghost) f[static_cast<std::size_t>(m++)] = pts_[static_cast<std::size_t>(c.v[static_cast<std::size_t>(i)])];
        if constexpr (D == 1) {
            return false;
        } else if constexpr (D == 2) {
            return (q[0] - f[0][0]) * (q[0] - f[1][0]) + (q[1] - f[0][1]) * (q[1] - f[1][1]) < 0.0;
        } else {
            const Eigen::Vector3d a(f[0][0], f[0][1], f[0][2]);
            const Eigen::Vector3d u = Eigen::Vector3d(f[1][0], f[1][1], f[1][2]) - a;
            const Eigen::Vector3d w = Eigen::Vector3d(f[2][0], f[2][1], f[2][2]) - a;
            const Eigen::Vector3d n = u.cross(w);
            const double n2 = n.squaredNorm();
            if (n2 == 0.0) return false;
            const Eigen::Vector3d off = (u.squaredNorm() * w.cross(n) + w.squaredNorm() * n.cross(u)) / (2.0 * n2);
            const Eigen::Vector3d qq(q[0], q[1], q[2]);
            return (qq - (a + off)).squaredNorm() < off.squaredNorm();
        }
    }

    bool conflict(const Cell& c, const Pt<D>& q) const {
        if (!is_ghost(c)) return dist2<D>(q, c.center) < c.r2;
        const double o = orient_replaced(c.v, ghost_index(c), q);
        if (o > det_tol_) return true;
        if (o < -det_tol_) return false;
        return inside_hull_facet_ball(c, q);
    }

    std::array<int, K> initial_vertices(std::vector<int>& order) const {
        std::array<int, K> s{};
        s[0] = order.front();
        auto best_by = [&](auto score) {
            int best = -1;
            double best_score = -1.0;
            for (int i : order) {
                const double sc = score(i);
                if (sc > best_score) {
                    best_score = sc;
                    best = i;
                }
            }
            return std::pair{best, best_score};
        };
        const auto& p0 = pts_[static_cast<std::size_t>(s[0])];
        auto [i1, d1] = best_by([&](int i) { return dist2<D>(pts_[static_cast<std::size_t>(i)], p0); });
        if (d1 <= dup_tol2_) throw DegenerateInput("all points coincide");
        s[1] = i1;
        if constexpr (D >= 2) {
            const auto& p1 = pts_[static_cast<std::size_t>(s[1])];
            auto area = [&](int i) {
                const auto& p = pts_[static_cast<std::size_t>(i)];
                Eigen::Matrix<double, D, 1> a, b;
                for (int j = 0; j < D; ++j) {
                    a(j) = p1[static_cast<std::size_t>(j)] - p0[static_cast<std::size_t>(j)];
                    b(j) = p[static_cast<std::size_t>(j)] - p0[static_cast<std::size_t>(j)];
                }
                return a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b);
            };
            auto [i2, a2] = best_by(area);
            if (a2 <= det_tol_ * det_tol_) throw DegenerateInput("all points are collinear");
            s[2] = i2;
        }
        if constexpr (D == 3) {
            auto vol = [&](int i) {
                return std::abs(orient<3>({pts_[static_cast<std::size_t>(s[0])], pts_[static_cast<std::size_t>(s[1])],
                                           pts_[static_cast<std::size_t>(s[2])], pts_[static_cast<std::size_t>(i)]}));
            };
            auto [i3, v3] = best_by(vol);
            if (v3 <= det_tol_) throw DegenerateInput("all points are coplanar");
            s[3] = i3;
        }
        std::array<Pt<D>, K> p{};
        for (int i = 0; i < K; ++i) p[static_cast<std::size_t>(i)] = pts_[static_cast<std::size_t>(s[static_cast<std::size_t>(i)])];
        const double o = orient<D>(p);
        if (std::abs(o) <= det_tol_) throw DegenerateInput("points are affinely dependent");
        if (o < 0) std::swap(s[0], s[1]);
        return s;
    }

    void init_cells(const std::array<int, K>& s) {
        Cell root;
        root.v = s;
        set_sphere(root);
        cells_.push_back(root);
        for (int k = 0; k < K; ++k) {
            Cell g;
            g.v = s;
            g.v[static_cast<std::size_t>(k)] = ghost;
            std::swap(g.v[0], g.v[1]); // ghost lies outside the facet, so flip orientation
            cells_.push_back(g);
        }
        std::vector<int> ids(cells_.size());
        std::iota(ids.begin(), ids.end(), 0);
        if (!link_facets(cells_, ids, {})) throw std::logic_error("failed to link the initial simplex");
        last_ = 0;
    }

    using FacetKey = std::array<int, D>;

    static FacetKey facet_key(const std::array<int, K>& v, int skip) {
        FacetKey f{};
        int m = 0;
        for (int i = 0; i < K; ++i)
            if (i != skip) f[static_cast<std::size_t>(m++)] = v[static_cast<std::size_t>(i)];
        std::sort(f.begin(), f.end());
        return f;
    }

    // Pairs up facets among `cells[ids[...]]` whose neighbor slot is unset;
    // slots listed in `preset` (cell position, facet) are already linked.
    static bool link_facets(std::vector<Cell>& cells, const std::vector<int>& ids,
                            const std::vector<std::pair<int, int>>& preset) {
        struct Entry {
            FacetKey key;
            int cell;
            int facet;
        };
        std::vector<Entry> entries;
        for (std::size_t p = 0; p < ids.size(); ++p) {
            for (int k = 0; k < K; ++k) {
                if (std::find(preset.begin(), preset.end(), std::pair<int, int>{static_cast<int>(p), k}) != preset.end())
                    continue;
                entries.push_back({facet_key(cells[static_cast<std::size_t>(ids[p])].v, k), ids[p], k});
            }
        }
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
        if (entries.size() % 2 != 0) return false;
        for (std::size_t i = 0; i < entries.size(); i += 2) {
            if (entries[i].key != entries[i + 1].key) return false;
            if (i + 2 < entries.size() && entries[i + 2].key == entries[i].key) return false;
            cells[static_cast<std::size_t>(entries[i].cell)].nb[static_cast<std::size_t>(entries[i].facet)] = entries[i + 1].cell;
            cells[static_cast<std::size_t>(entries[i + 1].cell)].nb[static_cast<std::size_t>(entries[i + 1].facet)] = entries[i].cell;
        }
        return true;
    }

    int locate(const Pt<D>& q) {
        int c = last_;
        if (!cells_[static_cast<std::size_t>(c)].alive || is_ghost(cells_[static_cast<std::size_t>(c)])) c = any_finite_cell();
        const std::size_t max_steps = 4 * cells_.size() + 16;
        for (std::size_t step = 0; step < max_steps; ++step) {
            const Cell& cell = cells_[static_cast<std::size_t>(c)];
            if (is_ghost(cell)) return c;
            const int start = static_cast<int>(uniform_index(rng_, K));
            int next = -1;
            for (int t = 0; t < K; ++t) {
                const int k = (start + t) % K;
                if (orient_replaced(cell.v, k, q) < -det_tol_) {
                    next = cell.nb[static_cast<std::size_t>(k)];
                    break;
                }
            }
            if (next < 0) return c;
            c = next;
        }
        // Walk failed to terminate (near-degenerate geometry): scan.
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i].alive && conflict(cells_[i], q)) return static_cast<int>(i);
        return -1;
    }

    int any_finite_cell() const {
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i].alive && !is_ghost(cells_[i])) return static_cast<int>(i);
        throw std::logic_error("triangulation has no finite simplex");
    }

    bool insert(int vi) {
        const Pt<D>& q = pts_[static_cast<std::size_t>(vi)];
        const int seed = locate(q);
        if (seed < 0) return false;
        for (int v : cells_[static_cast<std::size_t>(seed)].v)
            if (v != ghost && dist2<D>(pts_[static_cast<std::size_t>(v)], q) <= dup_tol2_) return false;

        // Grow the cavity of simplices whose circumball contains q.
        if (mark_.size() < cells_.size()) mark_.resize(cells_.size(), 0);
        ++epoch_;
        std::vector<int> cavity{seed};
        mark_[static_cast<std::size_t>(seed)] = epoch_;
        for (std::size_t i = 0; i < cavity.size(); ++i) {
            for (int nb : cells_[static_cast<std::size_t>(cavity[i])].nb) {
                if (mark_[static_cast<std::size_t>(nb)] == epoch_) continue;
                if (conflict(cells_[static_cast<std::size_t>(nb)], q)) {
                    mark_[static_cast<std::size_t>(nb)] = epoch_;
                    cavity.push_back(nb);
                }
            }
        }

        // Keep the cavity star-shaped from q: every new finite simplex must be
        // positively oriented. Offending simplices are dropped from the cavity.
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = 0; i < cavity.size() && !changed; ++i) {
                const Cell& c = cells_[static_cast<std::size_t>(cavity[i])];
                for (int k = 0; k < K; ++k) {
                    if (mark_[static_cast<std::size_t>(c.nb[static_cast<std::size_t>(k)])] == epoch_) continue;
                    std::array<int, K> v = c.v;
                    v[static_cast<std::size_t>(k)] = vi;
                    if (std::find(v.begin(), v.end(), ghost) != v.end()) continue;
                    if (orient_replaced(v, k, q) > det_tol_) continue;
                    if (cavity[i] == seed) return false;
                    mark_[static_cast<std::size_t>(cavity[i])] = 0;
                    cavity.erase(cavity.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                    break;
                }
            }
        }

        // New simplices: one per cavity boundary facet, q replacing the vertex
        // opposite that facet.
        std::vector<Cell> fresh;
        std::vector<std::pair<int, int>> outside; // (outside cell, its facet index)
        for (int ci : cavity) {
            const Cell& c = cells_[static_cast<std::size_t>(ci)];
            for (int k = 0; k < K; ++k) {
                const int nb = c.nb[static_cast<std::size_t>(k)];
                if (mark_[static_cast<std::size_t>(nb)] == epoch_) continue;
                Cell f;
                f.v = c.v;
                f.v[static_cast<std::size_t>(k)] = vi;
                f.nb.fill(-1);
                f.nb[static_cast<std::size_t>(k)] = nb;
                const auto& onb = cells_[static_cast<std::size_t>(nb)].nb;
                const int j = static_cast<int>(std::find(onb.begin(), onb.end(), ci) - onb.begin());
                fresh.push_back(f);
                outside.emplace_back(nb, j);
            }
        }

        // Link the new simplices to one another (facets through q).
        std::vector<int> local(fresh.size());
        std::iota(local.begin(), local.end(), 0);
        std::vector<std::pair<int, int>> preset;
        for (std::size_t p = 0; p < fresh.size(); ++p) {
            const auto& v = fresh[p].v;
            preset.emplace_back(static_cast<int>(p), static_cast<int>(std::find(v.begin(), v.end(), vi) - v.begin()));
        }
        if (!link_facets(fresh, local, preset)) return false;

        // Commit: slots from the cavity first, then the free list.
        std::vector<int> slot(fresh.size());
        std::size_t reuse = 0;
        for (int ci : cavity) {
            cells_[static_cast<std::size_t>(ci)].alive = false;
            free_.push_back(ci);
        }
        for (std::size_t p = 0; p < fresh.size(); ++p) {
            if (reuse < free_.size()) {
                slot[p] = free_[free_.size() - 1 - reuse];
                ++reuse;
            } else {
                slot[p] = static_cast<int>(cells_.size() + (p - reuse));
            }
        }
        free_.resize(free_.size() - reuse);
        const std::size_t needed = static_cast<std::size_t>(*std::max_element(slot.begin(), slot.end())) + 1;
        if (cells_.size() < needed) cells_.resize(needed);
        if (mark_.size() < cells_.size()) mark_.resize(cells_.size(), 0);

        for (std::size_t p = 0; p < fresh.size(); ++p) {
            Cell f = fresh[p];
            const int qk = preset[p].second;
            for (int k = 0; k < K; ++k)
                if (k != qk) f.nb[static_cast<std::size_t>(k)] = slot[static_cast<std::size_t>(f.nb[static_cast<std::size_t>(k)])];
            f.alive = true;
            set_sphere(f);
            cells_[static_cast<std::size_t>(slot[p])] = f;
            mark_[static_cast<std::size_t>(slot[p])] = 0;
            const auto [oc, oj] = outside[p];
            cells_[static_cast<std::size_t>(oc)].nb[static_cast<std::size_t>(oj)] = slot[p];
            if (!is_ghost(f)) last_ = slot[p];
        }
        return true;
    }
};

template <int D>
inline void build_triangulation(Triangulation& tri, double det_tol, double dup_tol) {
    const Eigen::Index n = tri.vertices.rows();
    std::vector<Pt<D>> pts(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < D; ++j)
            pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (tri.vertices(i, j) - tri.center(j)) / tri.scale;
    BowyerWatson<D> bw(std::move(pts), det_tol, dup_tol, 0x5eed);
    bw.build();
    bw.export_to(tri);
}

inline void build_sorted_segments(Triangulation& tri, double dup_tol) {
    const Eigen::Index n = tri.vertices.rows();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return tri.vertices(a, 0) < tri.vertices(b, 0); });
    std::vector<int> kept{order.front()};
    for (std::size_t i = 1; i < order.size(); ++i) {
        if ((tri.vertices(order[i], 0) - tri.vertices(kept.back(), 0)) / tri.scale <= dup_tol) ++tri.skipped_points;
        else kept.push_back(order[i]);
    }
    if (kept.size() < 2) throw DegenerateInput("all points coincide");
    const int m = static_cast<int>(kept.size()) - 1;
    for (int s = 0; s < m; ++s) {
        tri.simplices.push_back({kept[static_cast<std::size_t>(s)], kept[static_cast<std::size_t>(s + 1)], -1, -1});
        // Facet opposite vertex 0 is the right endpoint.
        tri.neighbors.push_back({s + 1 < m ? s + 1 : -1, s > 0 ? s - 1 : -1, -1, -1});
    }
}

} // namespace detail

/// Delaunay triangulation of n points in d <= 3 dimensions. `values` are the
/// function samples attached to the vertices.
inline Triangulation delaunay_triangulate(const Eigen::MatrixXd& points, const Eigen::VectorXd& values) {
    const int d = static_cast<int>(points.cols());
    if (d < 1 || d > 3) throw std::invalid_argument("delaunay_triangulate supports 1 <= d <= 3, got d = " + std::to_string(d));
    if (values.size() != points.rows()) throw std::invalid_argument("values length must equal the number of points");
    if (points.rows() < d + 1) throw DegenerateInput("need at least d+1 points");
    if (!points.allFinite()) throw std::invalid_argument("points must be finite");

    Triangulation tri;
    tri.dim = d;
    tri.vertices = points;
    tri.values = values;
    const Eigen::RowVectorXd lo = points.colwise().minCoeff();
    const Eigen::RowVectorXd hi = points.colwise().maxCoeff();
    tri.center = (0.5 * (lo + hi)).transpose();
    tri.scale = (hi - lo).maxCoeff();
    if (!(tri.scale > 0.0)) throw DegenerateInput("all points coincide");

    // Degeneracy tolerances in normalized units: a simplex whose volume falls
    // below 1e-12 of the mean simplex volume of the bounding box is flat, and
    // points closer than 1e-12 to an existing vertex are duplicates.
    const double box = ((hi - lo) / tri.scale).prod();
    const double det_tol = 1e-12 * box / static_cast<double>(points.rows());
    const double dup_tol = 1e-12;

    switch (d) {
    case 1: detail::build_sorted_segments(tri, dup_tol); break;
    case 2: detail::build_triangulation<2>(tri, det_tol, dup_tol); break;
    default: detail::build_triangulation<3>(tri, det_tol, dup_tol); break;
    }
    return tri;
}

/// Unsigned volume of simplex `s` in the original coordinates.
inline double simplex_volume(const Triangulation& tri, std::size_t s) {
    const int d = tri.dim;
    Eigen::MatrixXd m(d, d);
    const auto& v = tri.simplices[s];
    for (int i = 0; i < d; ++i) m.row(i) = tri.vertices.row(v[static_cast<std::size_t>(i + 1)]) - tri.vertices.row(v[0]);
    double fact = 1.0;
    for (int i = 2; i <= d; ++i) fact *= i;
    return std::abs(m.determinant()) / fact;
}

inline double total_volume(const Triangulation& tri) {
    double s = 0.0;
    for (std::size_t i = 0; i < tri.simplex_count(); ++i) s += simplex_volume(tri, i);
    return s;
}

/// Point location plus barycentric interpolation. Holds the walk's start
/// simplex, so give each thread its own instance.
class SimplexInterpolator {
public:
    struct Location {
        int simplex = -1;
        std::array<double, 4> weights{};
    };

    explicit SimplexInterpolator(const Triangulation& tri, std::uint64_t seed = 1) : tri_(&tri), rng_(seed) {
        if (tri.simplices.empty()) throw std::invalid_argument("empty triangulation");
    }

    /// Throws OutsideHull when x is not covered (barycentric tolerance 1e-12).
    Location locate(std::span<const double> x) {
        if (static_cast<int>(x.size()) != tri_->dim) throw std::invalid_argument("point dimension mismatch");
        switch (tri_->dim) {
        case 1: return walk<1>(x);
        case 2: return walk<2>(x);
        default: return walk<3>(x);
        }
    }

    double predict(std::span<const double> x) {
        const Location loc = locate(x);
        const auto& s = tri_->simplices[static_cast<std::size_t>(loc.simplex)];
        double out = 0.0;
        for (int k = 0; k <= tri_->dim; ++k) out += loc.weights[static_cast<std::size_t>(k)] * tri_->values(s[static_cast<std::size_t>(k)]);
        return out;
    }

    static constexpr double weight_tolerance = 1e-12;

private:
    const Triangulation* tri_;
    int hint_ = 0;
    Rng rng_;

    template <int D>
    detail::Pt<D> normalized(Eigen::Index vertex) const {
        detail::Pt<D> p{};
        for (int j = 0; j < D; ++j)
            p[static_cast<std::size_t>(j)] = (tri_->vertices(vertex, j) - tri_->center(j)) / tri_->scale;
        return p;
    }

    template <int D>
    bool weights_in(int s, const detail::Pt<D>& q, std::array<double, 4>& w) const {
        std::array<detail::Pt<D>, D + 1> p{};
        for (int k = 0; k <= D; ++k) p[static_cast<std::size_t>(k)] = normalized<D>(tri_->simplices[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]);
        const double total = detail::orient<D>(p);
        for (int k = 0; k <= D; ++k) {
            auto r = p;
            r[static_cast<std::size_t>(k)] = q;
            w[static_cast<std::size_t>(k)] = detail::orient<D>(r) / total;
        }
        return *std::min_element(w.begin(), w.begin() + D + 1) >= -weight_tolerance;
    }

    template <int D>
    Location walk(std::span<const double> x) {
        detail::Pt<D> q{};
        for (int j = 0; j < D; ++j) q[static_cast<std::size_t>(j)] = (x[static_cast<std::size_t>(j)] - tri_->center(j)) / tri_->scale;
        int s = hint_ < static_cast<int>(tri_->simplex_count()) ? hint_ : 0;
        std::array<double, 4> w{};
        const std::size_t max_steps = tri_->simplex_count() + 16;
        for (std::size_t step = 0; step < max_steps; ++step) {
            if (weights_in<D>(s, q, w)) {
                hint_ = s;
                return {s, w};
            }
            const int start = static_cast<int>(uniform_index(rng_, D + 1));
            int k = -1;
            for (int t = 0; t <= D; ++t) {
                const int c = (start + t) % (D + 1);
                if (w[static_cast<std::size_t>(c)] < -weight_tolerance) {
                    k = c;
                    break;
                }
            }
            const int next = tri_->neighbors[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
            if (next < 0) throw OutsideHull("point lies outside the convex hull of the triangulation");
            s = next;
        }
        for (std::size_t i = 0; i < tri_->simplex_count(); ++i) {
            if (weights_in<D>(static_cast<int>(i), q, w)) {
                hint_ = static_cast<int>(i);
                return {static_cast<int>(i), w};
            }
        }
        throw OutsideHull("point location failed");
    }
};

/// One-off prediction; prefer a SimplexInterpolator for many queries.
inline double simplex_predict(const Triangulation& tri, std::span<const double> x) {
    return SimplexInterpolator(tri).predict(x);
}

} // namespace precml
