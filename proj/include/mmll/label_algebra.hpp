#pragma once

// Edge-labeled r-flowers and r-neighborhoods over Delta-ary trees, stored as
// flat label vectors in one declared canonical order:
//
//   Flower  w: [ w_0, flat(w_{1A}), flat(w_{1B}), ..., flat(w_{rA}), flat(w_{rB}) ]
//   Nbhd    z: [ flat(z_{11}), ..., flat(z_{1D}), flat(z_{21}), ..., flat(z_{rD}) ]
//
// where flat() of an S_s element lists its (Delta-1) S_{s-1} children
// recursively, left to right by index. Labels are doubles; in discrete mode
// they are exact integers in [0, L), so all comparisons are exact.
//
// All values are immutable after construction and every operation is pure.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmll/errors.hpp"
#include "mmll/rng.hpp"

namespace mmll {

// ---------------------------------------------------------------- model

struct LabelModel {
    enum class Kind : uint8_t { discrete, continuous };
    Kind kind = Kind::discrete;
    uint32_t alphabet = 2;  // L, discrete only; L >= 2

    static LabelModel discrete(uint32_t L);
    static LabelModel continuous() { return LabelModel{Kind::continuous, 0}; }
    bool is_discrete() const { return kind == Kind::discrete; }
    bool operator==(const LabelModel&) const = default;

    bool label_valid(double x) const;
    double sample(Rng& rng) const;
};

// ---------------------------------------------------------------- shape

enum class Side : uint8_t { A = 0, B = 1 };
inline Side other_side(Side v) { return v == Side::A ? Side::B : Side::A; }

struct Shape {
    int delta = 2;
    int radius = 0;

    Shape() = default;
    Shape(int delta_, int radius_);

    uint64_t s_len(int s) const;                 // (delta-1)^s
    uint64_t flower_len() const { return flower_len(radius); }
    uint64_t flower_len(int r) const;            // 1 + 2*sum_{s<=r} (delta-1)^s
    uint64_t nbhd_len() const { return nbhd_len(radius); }
    uint64_t nbhd_len(int r) const;              // delta*sum_{s<=r} (delta-1)^{s-1}

    // Offset of block w_{sv} (length s_len(s)) in the flat flower vector.
    uint64_t flower_offset(int s, Side v) const;
    // Offset of block z_{si} (length s_len(s-1)), direction i in [1, delta].
    uint64_t nbhd_offset(int s, int i) const;

    Shape with_radius(int r) const { return Shape(delta, r); }
    bool operator==(const Shape&) const = default;
};

// ---------------------------------------------------------------- values

struct Flower {
    Shape shape;
    LabelModel model;
    std::vector<double> labels;

    bool operator==(const Flower&) const = default;
    void validate() const;
};

struct Neighborhood {
    Shape shape;
    LabelModel model;
    std::vector<double> labels;

    bool operator==(const Neighborhood&) const = default;
    void validate() const;
};

// ---------------------------------------------------------------- permutations

// perm[i-1] = sigma(i), values in [1, delta]; sigma(0) := 0 implicitly.
using Perm = std::vector<int>;

Perm identity_perm(int delta);
Perm special_perm(int delta, int i);  // sigma_i: swaps 1 and i
Perm compose(const Perm& sigma, const Perm& tau);  // (sigma . tau)(i) = sigma(tau(i))
Perm invert(const Perm& sigma);
bool is_identity(const Perm& sigma);
void check_perm(const Perm& sigma, int delta);

// ---------------------------------------------------------------- operations

// (shuffle(sigma, z))_{s,sigma(i)} = z_{s,i}
Neighborhood shuffle(const Perm& sigma, const Neighborhood& z);

// v-endpoint of a flower; radius 0 yields the empty neighborhood.
Neighborhood end(Side v, const Flower& w);

// res_i: radius-r neighborhood -> radius-(r-1) flower; res_i = res_1 . sigma_i.
Flower res(int i, const Neighborhood& z);

Flower reverse(const Flower& w);

// proj = end_A . res_1 (drops the outermost layer); radius must be >= 1.
Neighborhood project(const Neighborhood& z);

// Unique y with res_i(y) = parts[i-1] for all i, given end_A(parts[i-1]) =
// shuffle(sigma_i, x). Violations raise constraint_error naming the direction.
Neighborhood glue(const Neighborhood& x, const std::vector<Flower>& parts);

// Unique flower y with end_A(y) = za and end_B(y) = zb; requires
// res_1(zb) = reverse(res_1(za)).
Flower join_flower(const Neighborhood& za, const Neighborhood& zb);

// Center sub-flower of radius r2 <= r (drops the deepest rows).
Flower truncate(const Flower& w, int r2);

// Vertex count of the tree a flower labels (2 endpoints + all branch vertices).
uint64_t flower_vertex_count(const Shape& shape);

// Canonical presentation: per vertex, child subtrees sorted by label sequence,
// then the lexicographically smaller of the two orientations. Two flowers are
// presentations of the same labeled tree iff their canonical forms are equal.
Flower canonical_form(const Flower& w);

// ---------------------------------------------------------------- incidence

struct IncidenceWitness {
    Side v = Side::A;
    Side vp = Side::A;
    Perm sigma;  // end_v(w) = shuffle(sigma, end_vp(wp)), sigma(1) != 1
};

// Decides incidence per the definition (exists v, v', sigma with sigma(1)!=1).
// Columns of the two endpoint neighborhoods must agree as multisets under a
// matching that does not send direction 1 to direction 1.
std::optional<IncidenceWitness> incident(const Flower& w, const Flower& wp);

// ---------------------------------------------------------------- sampling

Flower sample_uniform_flower(const Shape& shape, const LabelModel& model, Rng& rng);
Neighborhood sample_uniform_neighborhood(const Shape& shape, const LabelModel& model, Rng& rng);

// Radius-r neighborhood conditioned on res_i(.) = x (x has radius r-1); the
// (delta-1) free S_{r-1} blocks in row r are drawn uniformly.
Neighborhood sample_cond_res(int i, const Flower& x, Rng& rng);

// Radius-r flower conditioned on end_v(.) = x; the opposite side's deepest
// S_r block is drawn uniformly.
Flower sample_cond_end(Side v, const Neighborhood& x, Rng& rng);

// ---------------------------------------------------------------- enumeration

uint64_t state_budget();
void set_state_budget(uint64_t budget);

// Lexicographic mixed-radix enumeration of a discrete label vector with some
// positions pinned. decode/encode are mutually inverse bijections on [0, size).
// Iteration order: the first free position is the most significant digit.
class LabelSpace {
  public:
    LabelSpace(Shape shape, LabelModel model, std::vector<double> pinned,
               std::vector<uint32_t> free_positions, bool flower_kind);

    uint64_t size() const { return size_; }
    const Shape& shape() const { return shape_; }

    void decode_into(uint64_t index, std::vector<double>& out) const;
    uint64_t encode(const std::vector<double>& labels) const;

    Flower decode_flower(uint64_t index) const;
    Neighborhood decode_neighborhood(uint64_t index) const;

  private:
    Shape shape_;
    LabelModel model_;
    std::vector<double> pinned_;           // NaN-free template with frees zeroed
    std::vector<uint32_t> free_positions_;
    bool flower_kind_;
    uint64_t size_ = 1;
};

LabelSpace enumerate_flowers(const Shape& shape, const LabelModel& model);
LabelSpace enumerate_neighborhoods(const Shape& shape, const LabelModel& model);
// All z with res_i(z) = x  (|free| = (delta-1)^r labels).
LabelSpace enumerate_cond_res(int i, const Flower& x);
// All w with end_v(w) = x  (|free| = (delta-1)^r labels).
LabelSpace enumerate_cond_end(Side v, const Neighborhood& x);

// Canonical index of a fully discrete value (bijective with enumerate_*).
uint64_t flower_index(const Flower& w);
uint64_t neighborhood_index(const Neighborhood& z);

// ---------------------------------------------------------------- serialization

std::string to_json(const Flower& w);
std::string to_json(const Neighborhood& z);
Flower flower_from_json(const std::string& text);
Neighborhood neighborhood_from_json(const std::string& text);

void write_binary(std::ostream& os, const Flower& w);
void write_binary(std::ostream& os, const Neighborhood& z);
Flower read_binary_flower(std::istream& is);
Neighborhood read_binary_neighborhood(std::istream& is);

}  // namespace mmll
