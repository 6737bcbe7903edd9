#pragma once

// The layered counterexample set: a base oscillating graph plus three
// generations of rescaled, 45-degree-rotated copies glued over the marked
// leaf chords. Pieces are never materialized; every query walks a shared
// pair of static trees (segment tree over the base polyline, interval tree
// over the child chords) and pulls the query region back through the
// similarity of each visited piece. Coordinates of deep pieces only ever
// exist in local frames, where relative precision survives.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conical/geometry.hpp"
#include "conical/lipschitz_graph.hpp"
#include "conical/rng.hpp"

namespace conical {

struct EnParams {
    int M = 0;
    int N = 0;
    double alpha = 0.0;
    std::array<double, 5> r{};  // r[k] = 2^(-k N (M+1) - k/2), r[0] = 1
};

/// Identifies a piece: layer 0..3 with a path of child indices; layer 4
/// addresses a replaced strip of the deepest layer (path of length 4).
struct PieceId {
    int layer = 0;
    std::array<std::int32_t, 4> path{};

    int path_length() const { return layer < 4 ? layer : 4; }
    int geometric_depth() const { return layer < 3 ? layer : 3; }

    std::string to_string() const {
        std::string s = std::to_string(layer) + ":(";
        for (int i = 0; i < path_length(); ++i) {
            if (i) s += ',';
            s += std::to_string(path[i]);
        }
        return s + ")";
    }
};

/// Point of the set with provenance: the path of the piece it lies on, the
/// parameter in that piece's frame, and its coordinates in every ancestor
/// frame (local[0] is the global position).
struct EnPoint {
    PieceId id;
    double t = 0.0;
    int depth = 0;
    std::array<Vec2, 4> local{};

    Vec2 global() const { return local[0]; }
};

struct CatalogEntry {
    PieceId id;
    Similarity map;   // base frame -> global
    Segment chord;    // the straight segment this piece replaces
};

struct EnBudget {
    std::size_t max_breakpoints = std::size_t{1} << 22;
    std::size_t max_materialized_segments = std::size_t{1} << 22;
};

namespace detail {

inline Cone relocal_region(const Cone& root, Vec2 anchor, int layer, double inv_scale) {
    return Cone(anchor, root.dir.rotated(-layer * (kPi / 4.0)), root.aperture,
                root.r_max == kInf ? kInf : root.r_max * inv_scale, root.r_min * inv_scale);
}

inline Disc relocal_region(const Disc& root, Vec2 anchor, int /*layer*/, double inv_scale) {
    return Disc{anchor, root.radius * inv_scale};
}

struct BBox {
    double minx = kInf, miny = kInf, maxx = -kInf, maxy = -kInf;

    void merge(const BBox& o) {
        minx = std::min(minx, o.minx);
        miny = std::min(miny, o.miny);
        maxx = std::max(maxx, o.maxx);
        maxy = std::max(maxy, o.maxy);
    }
    void add(Vec2 p, double pad = 0.0) {
        minx = std::min(minx, p.x - pad);
        miny = std::min(miny, p.y - pad);
        maxx = std::max(maxx, p.x + pad);
        maxy = std::max(maxy, p.y + pad);
    }
    Disc disc() const {
        Vec2 c{0.5 * (minx + maxx), 0.5 * (miny + maxy)};
        return {c, 0.5 * std::hypot(maxx - minx, maxy - miny)};
    }
    double dist_lower(Vec2 p) const {
        double dx = std::max({minx - p.x, 0.0, p.x - maxx});
        double dy = std::max({miny - p.y, 0.0, p.y - maxy});
        return std::hypot(dx, dy);
    }
};

}  // namespace detail

class EnSet {
  public:
    static constexpr int kLayers = 3;  // deepest catalog layer

    static EnSet build(GraphFamily gf, EnBudget budget = {}) {
        EnSet e;
        e.budget_ = budget;
        e.graph_ = std::make_shared<GraphFamily>(std::move(gf));
        const GraphFamily& g = *e.graph_;
        const GraphParams& gp = g.params();

        e.params_.M = gp.M;
        e.params_.N = gp.N;
        e.params_.alpha = gp.alpha;
        double r1 = std::ldexp(kSqrtHalf, -gp.N * (gp.M + 1));
        e.params_.r[0] = 1.0;
        for (int k = 1; k <= 4; ++k) e.params_.r[k] = e.params_.r[k - 1] * r1;
        for (int k = 0; k <= 4; ++k) e.inv_r_[k] = 1.0 / e.params_.r[k];

        e.base_ = g.polyline();
        std::size_t nseg = e.base_.segments.size();
        if (nseg + g.leaf_count() > budget.max_breakpoints)
            throw BudgetExceeded("base polyline + chord index exceed breakpoint budget");

        // segment tree over the base polyline
        e.seg_count_ = nseg;
        e.seg_tree_.assign(2 * nseg, detail::BBox{});
        e.seg_len_.assign(2 * nseg, 0.0);
        for (std::size_t i = 0; i < nseg; ++i) {
            const Segment& s = e.base_.segments[i];
            detail::BBox b;
            b.add(s.a);
            b.add(s.b);
            e.seg_tree_[nseg + i] = b;
            e.seg_len_[nseg + i] = s.length();
        }
        for (std::size_t v = nseg - 1; v >= 1; --v) {
            e.seg_tree_[v] = e.seg_tree_[2 * v];
            e.seg_tree_[v].merge(e.seg_tree_[2 * v + 1]);
            e.seg_len_[v] = e.seg_len_[2 * v] + e.seg_len_[2 * v + 1];
        }
        e.base_arclength_ = e.seg_len_[1];

        // chords of the leaf intervals and their similarities
        std::size_t nc = g.leaf_count();
        e.child_count_ = nc;
        e.chord_.resize(nc);
        e.child_sim_.resize(nc);
        e.child_inv_.resize(nc);
        int leaf_level = g.leaf_level();
        for (std::size_t j = 0; j < nc; ++j) {
            DyadicInterval iv{leaf_level, g.leaf_indices()[j]};
            Vec2 a{iv.left(), g(iv.left())};
            Vec2 b{iv.right(), g(iv.right())};
            e.chord_[j] = {a, b};
            Similarity s;
            s.quarter_turns = 1;
            s.scale = r1;
            s.translate = 0.5 * (a + b);
            e.child_sim_[j] = s;
            e.child_inv_[j] = s.inverse();
        }

        // subtree bound: a piece plus all descendants stays within this
        // radius (in its own frame units) of its center
        double r_gamma = std::sqrt(1.0 + 4.0 / (double(gp.M) * gp.M));
        e.bound_r_ = r_gamma / (1.0 - r1) + 1e-9;

        // interval tree over child subtree discs
        e.child_tree_.assign(2 * nc, detail::BBox{});
        for (std::size_t j = 0; j < nc; ++j) {
            detail::BBox b;
            b.add(e.child_sim_[j].translate, r1 * e.bound_r_);
            e.child_tree_[nc + j] = b;
        }
        for (std::size_t v = nc - 1; v >= 1; --v) {
            e.child_tree_[v] = e.child_tree_[2 * v];
            e.child_tree_[v].merge(e.child_tree_[2 * v + 1]);
        }

        // decomposition masses
        double ni = static_cast<double>(nc);
        e.sub_mass_[kLayers] = e.base_arclength_ * e.params_.r[kLayers];
        for (int k = kLayers - 1; k >= 0; --k)
            e.sub_mass_[k] = e.base_arclength_ * e.params_.r[k] + ni * e.sub_mass_[k + 1];
        return e;
    }

    const GraphFamily& graph() const { return *graph_; }
    const EnParams& params() const { return params_; }
    double r(int k) const { return params_.r[static_cast<std::size_t>(k)]; }
    double inv_r(int k) const { return inv_r_[static_cast<std::size_t>(k)]; }
    std::size_t interval_count() const { return child_count_; }
    const Polyline& base_polyline() const { return base_; }
    double base_arclength() const { return base_arclength_; }
    Segment child_chord(std::size_t j) const { return chord_[j]; }
    Similarity child_map(std::size_t j) const { return child_sim_[j]; }

    Similarity piece_map(const std::int32_t* path, int len) const {
        Similarity s;
        for (int i = 0; i < len; ++i) s = s * child_sim_[static_cast<std::size_t>(path[i])];
        return s;
    }

    CatalogEntry catalog_entry(const PieceId& id) const {
        int len = id.geometric_depth();
        if (id.layer > kLayers) throw std::invalid_argument("catalog_entry: layer must be 0..3");
        Similarity map = piece_map(id.path.data(), len);
        Segment chord{map(Vec2{-1.0, 0.0}), map(Vec2{1.0, 0.0})};
        return {id, map, chord};
    }

    /// Piece polyline materialized on demand (a similar copy of the base).
    Polyline piece_polyline(const PieceId& id) const {
        return piece_map(id.path.data(), id.geometric_depth())(base_);
    }

    /// Total decomposition measure of a layer-k piece together with all its
    /// descendants.
    double subtree_mass(int k) const { return sub_mass_[static_cast<std::size_t>(k)]; }
    double total_mass() const { return sub_mass_[0]; }

    /// Arclength of the layer-k curve (each replaced chord of length 2 r_k
    /// turns into a base copy scaled by r_k).
    double layer_arclength(int k) const {
        double a = base_arclength_;
        double pieces = 1.0;
        for (int j = 1; j <= k; ++j) {
            pieces *= static_cast<double>(child_count_);
            a += pieces * (base_arclength_ * params_.r[static_cast<std::size_t>(j)] -
                           2.0 * params_.r[static_cast<std::size_t>(j)]);
        }
        return a;
    }

    /// Combined length of the deepest replaced strips: #I^4 * 2 r_4.
    double strip_total_length() const {
        double n = static_cast<double>(child_count_);
        return n * n * n * n * 2.0 * params_.r[4];
    }

    // ---- region mass queries -------------------------------------------

    /// Measure of the set inside `region` (decomposition sum over all
    /// pieces; overlaps are arclength-null for odd M). Exact up to segment
    /// clipping. `apex` anchors the region center precisely in the frames
    /// along its provenance path.
    template <class Region>
    double region_mass(const Region& region, const EnPoint* apex = nullptr) const {
        double acc = 0.0;
        visit_piece(region, region, 0, apex, acc);
        return acc;
    }

    /// Arclength of one piece inside a ball centered at a point whose
    /// provenance path passes through that piece (prefix_len <= apex.depth).
    double piece_clip_ball(const EnPoint& apex, int prefix_len, double radius) const {
        Disc local{apex.local[static_cast<std::size_t>(prefix_len)],
                   radius * inv_r_[static_cast<std::size_t>(prefix_len)]};
        return params_.r[static_cast<std::size_t>(prefix_len)] * clip_tree(local);
    }

    // ---- curve parametrization and the replacement maps ------------------

    /// Point of the layer-k curve with base parameter u in [-1,1]; the path
    /// deepens one level for every replaced chord the parameter falls into.
    EnPoint curve_point(int k, double u) const {
        if (!(u >= -1.0 && u <= 1.0)) throw std::domain_error("curve_point: u outside [-1,1]");
        EnPoint x;
        x.t = u;
        x.depth = 0;
        x.id = PieceId{0, {}};
        finish_point(x);
        return project_to_layer(x, k);
    }

    /// gamma_{l,i}: the correspondence between layer curves. Truncates the
    /// path for i below the point's depth, extends it while the parameter
    /// keeps landing inside replaced chords for i above.
    EnPoint project_to_layer(const EnPoint& x, int i) const {
        if (i < 0 || i > kLayers) throw std::invalid_argument("project_to_layer: layer 0..3");
        EnPoint y = x;
        if (i < y.depth) {
            double t = y.t;
            for (int q = y.depth - 1; q >= i; --q) {
                const Segment& c = chord_[static_cast<std::size_t>(y.id.path[q])];
                t = c.a.x + (t + 1.0) * 0.5 * (c.b.x - c.a.x);
            }
            y.t = t;
            y.depth = i;
            y.id.layer = i;
        } else {
            while (y.depth < i) {
                auto j = chord_index_containing(y.t);
                if (!j) break;
                y.id.path[y.depth] = static_cast<std::int32_t>(*j);
                const Segment& c = chord_[*j];
                y.t = -1.0 + (y.t - c.a.x) * 2.0 / (c.b.x - c.a.x);
                ++y.depth;
            }
            y.id.layer = y.depth;
        }
        finish_point(y);
        return y;
    }

    /// sigma_k: identity off the replaced chords of the layer-(k-1) curve,
    /// the graph map over each chord otherwise.
    EnPoint gamma_map(int k, const EnPoint& x) const {
        if (k < 1 || k > kLayers) throw std::invalid_argument("gamma_map: k must be 1..3");
        if (x.depth > k - 1)
            throw std::invalid_argument("gamma_map: point does not lie on the layer-" +
                                        std::to_string(k - 1) + " curve");
        return project_to_layer(x, k);
    }

    /// Distance between two tracked points, evaluated in their deepest
    /// common frame so it stays accurate for nearby deep points.
    double distance(const EnPoint& a, const EnPoint& b) const {
        int c = 0;
        while (c < a.depth && c < b.depth && a.id.path[c] == b.id.path[c]) ++c;
        return params_.r[static_cast<std::size_t>(c)] *
               dist(a.local[static_cast<std::size_t>(c)], b.local[static_cast<std::size_t>(c)]);
    }

    // ---- sampling ---------------------------------------------------------

    /// Uniform-by-arclength sample of the deepest replaced strips. All
    /// #I^4 strips share length 2 r_4, so a uniform path plus a uniform
    /// position along the chord is arclength-uniform.
    std::vector<EnPoint> strip_sample(std::size_t count, std::uint64_t seed) const {
        Rng rng(seed);
        std::vector<EnPoint> out;
        out.reserve(count);
        for (std::size_t s = 0; s < count; ++s) {
            EnPoint x;
            x.id.layer = 4;
            for (int i = 0; i < 4; ++i)
                x.id.path[i] = static_cast<std::int32_t>(rng.below(child_count_));
            x.depth = 3;
            const Segment& c = chord_[static_cast<std::size_t>(x.id.path[3])];
            double v = rng.uniform01();
            x.t = -1.0 + 2.0 * v;
            x.local[3] = c.at(v);
            for (int q = 2; q >= 0; --q)
                x.local[q] = child_sim_[static_cast<std::size_t>(x.id.path[q])](x.local[q + 1]);
            out.push_back(x);
        }
        return out;
    }

    /// Arclength-uniform sample of the whole decomposition.
    EnPoint arclength_sample(Rng& rng) const {
        double u = rng.uniform01() * total_mass();
        int layer = 0;
        double pieces = 1.0;
        while (layer < kLayers) {
            double own = pieces * base_arclength_ * params_.r[static_cast<std::size_t>(layer)];
            if (u < own) break;
            u -= own;
            pieces *= static_cast<double>(child_count_);
            ++layer;
        }
        EnPoint x;
        x.id.layer = layer;
        x.depth = layer;
        for (int i = 0; i < layer; ++i)
            x.id.path[i] = static_cast<std::int32_t>(rng.below(child_count_));
        x.t = arclength_to_param(rng.uniform01() * base_arclength_);
        finish_point(x);
        return x;
    }

    /// Nearest set point within the snapping tolerance (a fixed fraction of
    /// the local segment length), searching pieces of layer <= max_layer.
    std::optional<EnPoint> locate(Vec2 q, int max_layer, double snap_factor = 1e-3) const {
        LocateBest best;
        best.dist = kInf;
        locate_piece(q, 0, max_layer, {}, best);
        if (!(best.dist < kInf)) return std::nullopt;
        double local_seg = std::ldexp(1.0, -graph_->grid_level()) *
                           params_.r[static_cast<std::size_t>(best.depth)];
        if (best.dist > snap_factor * local_seg * 2.0) return std::nullopt;
        EnPoint x;
        x.id.layer = best.depth;
        x.depth = best.depth;
        x.id.path = best.path;
        x.t = best.t;
        finish_point(x);
        return x;
    }

    // ---- witness selection (big Lipschitz piece inside a ball) -----------

    struct WitnessResult {
        PieceId piece;
        double ratio;  // H^1(B(x,r) /\ piece) / r
    };

    /// Picks the catalog piece guaranteed to fill a fixed fraction of
    /// B(x,r): the point's own piece when r is below its scale, otherwise
    /// the ancestor piece at the scale of r (reached through the layer
    /// correspondence), and the root graph for r >= 1.
    WitnessResult bplg_witness(const EnPoint& x, double radius) const {
        if (!(radius > 0.0)) throw std::invalid_argument("bplg_witness: radius must be positive");
        int L;
        if (radius < params_.r[static_cast<std::size_t>(x.depth)]) {
            L = x.depth;
        } else if (radius >= 1.0) {
            L = 0;
        } else {
            int k = 0;
            while (k + 1 <= 4 && radius < params_.r[static_cast<std::size_t>(k + 1)]) ++k;
            // now r_{k+1} <= radius < r_k
            L = std::min(k, x.depth);
        }
        PieceId id;
        id.layer = L;
        for (int i = 0; i < L; ++i) id.path[i] = x.id.path[i];
        double len = piece_clip_ball(x, L, radius);
        return {id, len / radius};
    }

    // ---- materialization (export only) ------------------------------------

    std::size_t materialized_segment_count(int k) const {
        double segs = static_cast<double>(seg_count_);
        double pieces = 1.0;
        for (int j = 1; j <= k; ++j) {
            pieces *= static_cast<double>(child_count_);
            segs += pieces * (static_cast<double>(seg_count_) - 1.0);
        }
        return static_cast<std::size_t>(segs);
    }

    struct MaterializedLayer {
        Polyline polyline;
        std::vector<PieceId> provenance;
    };

    /// Materializes the layer-k curve in order. Intended for export and
    /// small-parameter checks; guarded by the segment budget.
    MaterializedLayer materialize_layer(int k) const {
        std::size_t need = materialized_segment_count(k);
        if (need > budget_.max_materialized_segments)
            throw BudgetExceeded("layer " + std::to_string(k) + " needs " + std::to_string(need) +
                                 " segments, budget is " +
                                 std::to_string(budget_.max_materialized_segments));
        MaterializedLayer out;
        out.polyline.contiguous = true;
        out.polyline.segments.reserve(need);
        out.provenance.reserve(need);
        PieceId id{0, {}};
        Similarity sim;
        emit_layer(k, id, sim, out);
        return out;
    }

  private:
    EnSet() = default;

    void finish_point(EnPoint& x) const {
        x.local[static_cast<std::size_t>(x.depth)] = Vec2{x.t, (*graph_)(x.t)};
        for (int q = x.depth - 1; q >= 0; --q)
            x.local[q] = child_sim_[static_cast<std::size_t>(x.id.path[q])](x.local[q + 1]);
    }

    std::optional<std::size_t> chord_index_containing(double t) const {
        int level = graph_->leaf_level();
        double s = std::ldexp(t, level);
        double fl = std::floor(s);
        if (s == fl) return std::nullopt;  // exactly on the grid: chords are open
        auto idx = static_cast<std::int64_t>(fl);
        const auto& leaves = graph_->leaf_indices();
        auto it = std::lower_bound(leaves.begin(), leaves.end(), idx);
        if (it == leaves.end() || *it != idx) return std::nullopt;
        return static_cast<std::size_t>(it - leaves.begin());
    }

    double arclength_to_param(double s) const {
        // binary search over the segment tree's length sums
        std::size_t v = 1;
        while (v < seg_count_) {
            if (s <= seg_len_[2 * v]) {
                v = 2 * v;
            } else {
                s -= seg_len_[2 * v];
                v = 2 * v + 1;
            }
        }
        std::size_t i = v - seg_count_;
        const Segment& seg = base_.segments[i];
        double f = std::min(1.0, std::max(0.0, s / seg.length()));
        return seg.a.x + f * (seg.b.x - seg.a.x);
    }

    template <class Region>
    double clip_tree(const Region& reg) const {
        return clip_node(reg, 1);
    }

    template <class Region>
    double clip_node(const Region& reg, std::size_t v) const {
        switch (classify_disc(reg, seg_tree_[v].disc())) {
            case DiscClass::outside: return 0.0;
            case DiscClass::inside: return seg_len_[v];
            case DiscClass::straddle: break;
        }
        if (v >= seg_count_) return clip_length(base_.segments[v - seg_count_], reg);
        return clip_node(reg, 2 * v) + clip_node(reg, 2 * v + 1);
    }

    template <class Region>
    void visit_piece(const Region& root_region, const Region& local_region, int layer,
                     const EnPoint* apex, double& acc) const {
        acc += params_.r[static_cast<std::size_t>(layer)] * clip_tree(local_region);
        if (layer == kLayers) return;
        visit_child_node(root_region, local_region, layer, apex, 1, child_count_, acc);
    }

    template <class Region>
    void visit_child_node(const Region& root_region, const Region& local_region, int layer,
                          const EnPoint* apex, std::size_t v, std::size_t count,
                          double& acc) const {
        switch (classify_disc(local_region, child_tree_[v].disc())) {
            case DiscClass::outside: return;
            case DiscClass::inside:
                acc += static_cast<double>(count) * sub_mass_[static_cast<std::size_t>(layer + 1)];
                return;
            case DiscClass::straddle: break;
        }
        if (v < child_count_) {
            visit_child_node(root_region, local_region, layer, apex, 2 * v, count / 2, acc);
            visit_child_node(root_region, local_region, layer, apex, 2 * v + 1, count / 2, acc);
            return;
        }
        auto j = v - child_count_;
        bool on_path = apex && apex->depth > layer &&
                       apex->id.path[layer] == static_cast<std::int32_t>(j);
        if (on_path) {
            Region child_region =
                detail::relocal_region(root_region, apex->local[static_cast<std::size_t>(layer + 1)],
                                       layer + 1, inv_r_[static_cast<std::size_t>(layer + 1)]);
            visit_piece(root_region, child_region, layer + 1, apex, acc);
        } else {
            Region child_region = transformed(child_inv_[j], local_region);
            visit_piece(root_region, child_region, layer + 1, nullptr, acc);
        }
    }

    // ---- locate ----------------------------------------------------------

    struct LocateBest {
        double dist = kInf;
        int depth = 0;
        std::array<std::int32_t, 4> path{};
        double t = 0.0;
    };

    void locate_piece(Vec2 q_local, int layer, int max_layer, std::array<std::int32_t, 4> path,
                      LocateBest& best) const {
        double scale = params_.r[static_cast<std::size_t>(layer)];
        locate_seg_node(q_local, 1, scale, layer, path, best);
        if (layer >= max_layer || layer == kLayers) return;
        double r1 = params_.r[1];
        for (std::size_t j = 0; j < child_count_; ++j) {
            double low = (dist(q_local, child_sim_[j].translate) - r1 * bound_r_) * scale;
            if (low >= best.dist) continue;
            path[static_cast<std::size_t>(layer)] = static_cast<std::int32_t>(j);
            locate_piece(child_inv_[j](q_local), layer + 1, max_layer, path, best);
        }
    }

    void locate_seg_node(Vec2 q, std::size_t v, double scale, int layer,
                         const std::array<std::int32_t, 4>& path, LocateBest& best) const {
        if (seg_tree_[v].dist_lower(q) * scale >= best.dist) return;
        if (v < seg_count_) {
            locate_seg_node(q, 2 * v, scale, layer, path, best);
            locate_seg_node(q, 2 * v + 1, scale, layer, path, best);
            return;
        }
        const Segment& s = base_.segments[v - seg_count_];
        Vec2 d = s.b - s.a;
        double f = dot(q - s.a, d) / dot(d, d);
        f = std::min(1.0, std::max(0.0, f));
        Vec2 p = s.a + f * d;
        double dd = dist(q, p) * scale;
        if (dd < best.dist) {
            best.dist = dd;
            best.depth = layer;
            best.path = path;
            best.t = s.a.x + f * d.x;
        }
    }

    // ---- materialization ---------------------------------------------------

    void emit_layer(int remaining, PieceId& id, const Similarity& sim,
                    MaterializedLayer& out) const {
        const GraphFamily& g = *graph_;
        std::int64_t half = g.grid_half();
        int level = g.grid_level();
        int nsub = g.params().N;  // leaf children per replaced grid cell
        for (std::int64_t m = -half; m < half; ++m) {
            bool replaced = false;
            if (remaining > 0) {
                // the grid cell is replaced iff its leftmost leaf-level child
                // belongs to the leaf family
                std::int64_t leaf0 = m << nsub;
                const auto& leaves = g.leaf_indices();
                auto it = std::lower_bound(leaves.begin(), leaves.end(), leaf0);
                if (it != leaves.end() && *it == leaf0) {
                    std::size_t j0 = static_cast<std::size_t>(it - leaves.begin());
                    for (std::int64_t c = 0; c < (std::int64_t{1} << nsub); ++c) {
                        std::size_t j = j0 + static_cast<std::size_t>(c);
                        id.path[id.layer] = static_cast<std::int32_t>(j);
                        ++id.layer;
                        emit_layer(remaining - 1, id, sim * child_sim_[j], out);
                        --id.layer;
                    }
                    replaced = true;
                }
            }
            if (!replaced) {
                out.polyline.segments.push_back(sim(base_.segments[static_cast<std::size_t>(m + half)]));
                out.provenance.push_back(id);
            }
        }
    }

    std::shared_ptr<const GraphFamily> graph_;
    EnParams params_;
    EnBudget budget_;
    std::array<double, 5> inv_r_{};
    Polyline base_;
    double base_arclength_ = 0.0;
    double bound_r_ = 0.0;

    std::size_t seg_count_ = 0;
    std::vector<detail::BBox> seg_tree_;
    std::vector<double> seg_len_;

    std::size_t child_count_ = 0;
    std::vector<Segment> chord_;
    std::vector<Similarity> child_sim_;
    std::vector<Similarity> child_inv_;
    std::vector<detail::BBox> child_tree_;

    std::array<double, 4> sub_mass_{};
};

}  // namespace conical
