#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pdd/rational.hpp"

namespace pdd {

// An integer partition: positive parts in non-increasing order. The empty
// partition is the unique partition of 0.
class Partition {
public:
    Partition() = default;
    // Throws std::invalid_argument unless parts are positive and non-increasing.
    explicit Partition(std::vector<int> parts);
    Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

    // Sorts into descending order and drops zeros; rejects negative entries.
    static Partition from_unsorted(std::vector<int> parts);

    const std::vector<int>& parts() const noexcept { return parts_; }
    int size() const noexcept { return size_; }  // |eta|
    int length() const noexcept { return static_cast<int>(parts_.size()); }  // l(eta)
    bool empty() const noexcept { return parts_.empty(); }

    // i-th part (0-based); missing parts read as 0.
    int operator[](std::size_t i) const noexcept { return i < parts_.size() ? parts_[i] : 0; }

    auto begin() const noexcept { return parts_.begin(); }
    auto end() const noexcept { return parts_.end(); }

    // a_k(eta)
    int multiplicity(int k) const noexcept;
    // Distinct part values, descending.
    std::vector<int> distinct_parts() const;

    // Decrements one part equal to `value` (removing it if it becomes 0).
    Partition remove_one(int value) const;
    // Increments one part equal to `value`; value == 0 appends a new part 1.
    Partition add_one(int value) const;

    // Canonical order: by size, then reverse-lexicographic, so that
    // (4) < (3,1) < (2,2) < (2,1,1) < (1,1,1,1).
    friend std::strong_ordering operator<=>(const Partition& a, const Partition& b) noexcept;
    friend bool operator==(const Partition& a, const Partition& b) noexcept = default;

private:
    std::vector<int> parts_;
    int size_ = 0;
};

struct PartitionHash {
    std::size_t operator()(const Partition& p) const noexcept;
};

std::string to_string(const Partition& p);  // "(2,1)"; "()" for the empty partition
std::string to_json_array(const Partition& p);  // "[2,1]"

inline constexpr int kDefaultEnumerationCap = 80;

// All partitions of n in canonical (reverse-lexicographic) order.
// Throws ResourceLimit when n > cap.
std::vector<Partition> enumerate_partitions(int n, int cap = kDefaultEnumerationCap);

// Partition-counting function p(n) via Euler's pentagonal recurrence.
BigInt partition_count(int n);

// k -> a_k(eta), over k with a_k > 0.
std::map<int, int> multiplicities(const Partition& eta);

// omega_i <= eta_i for all i.
bool is_subpartition(const Partition& omega, const Partition& eta);

// Multinomial coefficient n!/(eta_1! ... eta_d!) = dim(eta).
BigInt dim_partition(const Partition& eta);

// prod_k a_k(eta)!
BigInt multiplicity_factorial(const Partition& eta);

// Edge weight of the branching diagram: a_{eta_i}(eta) when eta is omega with
// part i incremented, 0 otherwise.
int chi(const Partition& omega, const Partition& eta);

// Partitions covered by eta (one box removed), each with chi(omega, eta).
std::vector<std::pair<Partition, int>> covered_by(const Partition& eta);
// Partitions covering eta (one box added), each with chi(eta, lambda).
std::vector<std::pair<Partition, int>> covering(const Partition& eta);

// Total path weight between omega and eta in the branching diagram; 0 when
// omega is not contained in eta. Results are kept in a shared LRU cache.
BigInt dim_between(const Partition& omega, const Partition& eta);
void set_dim_cache_capacity(std::size_t capacity);

// H(omega | eta) from branching-diagram path weights.
// Throws DomainError when |omega| > |eta|.
Rational hypergeom(const Partition& omega, const Partition& eta);
// Same probability from the falling-factorial sum over placements of omega's
// parts onto distinct parts of eta.
Rational hypergeom_falling_factorial(const Partition& omega, const Partition& eta);

// One uniform ball deletion: omega -> a_{eta_i}(eta) eta_i / n.
// Throws DomainError for the empty partition.
std::map<Partition, Rational> down_step_distribution(const Partition& eta);

}  // namespace pdd
