#include "pdd/partition.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <unordered_map>

#include "pdd/errors.hpp"
#include "pdd/lru_cache.hpp"

namespace pdd {

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (parts_[i] < 1) throw std::invalid_argument("partition parts must be positive");
        if (i > 0 && parts_[i] > parts_[i - 1])
            throw std::invalid_argument("partition parts must be non-increasing");
        size_ += parts_[i];
    }
}

Partition Partition::from_unsorted(std::vector<int> parts) {
    if (std::any_of(parts.begin(), parts.end(), [](int v) { return v < 0; }))
        throw std::invalid_argument("partition parts must be non-negative");
    std::erase(parts, 0);
    std::sort(parts.begin(), parts.end(), std::greater<>());
    return Partition(std::move(parts));
}

int Partition::multiplicity(int k) const noexcept {
    return static_cast<int>(std::count(parts_.begin(), parts_.end(), k));
}

std::vector<int> Partition::distinct_parts() const {
    std::vector<int> out;
    for (int v : parts_)
        if (out.empty() || out.back() != v) out.push_back(v);
    return out;
}

Partition Partition::remove_one(int value) const {
    // The last occurrence keeps the order intact after decrementing.
    auto it = std::find(parts_.rbegin(), parts_.rend(), value);
    if (it == parts_.rend()) throw std::invalid_argument("remove_one: part value not present");
    Partition out = *this;
    auto idx = static_cast<std::size_t>(std::distance(it, parts_.rend()) - 1);
    if (--out.parts_[idx] == 0) out.parts_.erase(out.parts_.begin() + static_cast<long>(idx));
    --out.size_;
    return out;
}

Partition Partition::add_one(int value) const {
    Partition out = *this;
    ++out.size_;
    if (value == 0) {
        out.parts_.push_back(1);
        return out;
    }
    // The first occurrence keeps the order intact after incrementing.
    auto it = std::find(out.parts_.begin(), out.parts_.end(), value);
    if (it == out.parts_.end()) throw std::invalid_argument("add_one: part value not present");
    ++*it;
    return out;
}

std::strong_ordering operator<=>(const Partition& a, const Partition& b) noexcept {
    if (auto c = a.size_ <=> b.size_; c != 0) return c;
    // Larger lexicographic partitions come first.
    return std::lexicographical_compare_three_way(b.parts_.begin(), b.parts_.end(),
                                                  a.parts_.begin(), a.parts_.end());
}

std::size_t PartitionHash::operator()(const Partition& p) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int v : p.parts()) {
        h ^= static_cast<std::size_t>(v);
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string join(const Partition& p, char open, char close) {
    std::string s(1, open);
    for (int i = 0; i < p.length(); ++i) {
        if (i) s += ',';
        s += std::to_string(p[static_cast<std::size_t>(i)]);
    }
    s += close;
    return s;
}

void enumerate_into(int remaining, int max_part, std::vector<int>& prefix,
                    std::vector<Partition>& out) {
    if (remaining == 0) {
        out.emplace_back(prefix);
        return;
    }
    for (int first = std::min(remaining, max_part); first >= 1; --first) {
        prefix.push_back(first);
        enumerate_into(remaining - first, first, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::string to_string(const Partition& p) { return join(p, '(', ')'); }
std::string to_json_array(const Partition& p) { return join(p, '[', ']'); }

std::vector<Partition> enumerate_partitions(int n, int cap) {
    if (n < 0) throw DomainError("enumerate_partitions: n must be non-negative");
    if (n > cap)
        throw ResourceLimit("enumerate_partitions: n = " + std::to_string(n) +
                            " exceeds the cap " + std::to_string(cap));
    std::vector<Partition> out;
    std::vector<int> prefix;
    enumerate_into(n, n, prefix, out);
    return out;
}

BigInt partition_count(int n) {
    if (n < 0) return 0;
    std::vector<BigInt> p(static_cast<std::size_t>(n) + 1, 0);
    p[0] = 1;
    for (int m = 1; m <= n; ++m) {
        BigInt acc = 0;
        for (int k = 1;; ++k) {
            int g1 = k * (3 * k - 1) / 2;
            int g2 = k * (3 * k + 1) / 2;
            if (g1 > m) break;
            const BigInt& a = p[static_cast<std::size_t>(m - g1)];
            BigInt term = a;
            if (g2 <= m) term += p[static_cast<std::size_t>(m - g2)];
            if (k % 2 == 1) acc += term; else acc -= term;
        }
        p[static_cast<std::size_t>(m)] = acc;
    }
    return p[static_cast<std::size_t>(n)];
}

std::map<int, int> multiplicities(const Partition& eta) {
    std::map<int, int> a;
    for (int v : eta) ++a[v];
    return a;
}

bool is_subpartition(const Partition& omega, const Partition& eta) {
    if (omega.length() > eta.length()) return false;
    for (std::size_t i = 0; i < static_cast<std::size_t>(omega.length()); ++i)
        if (omega[i] > eta[i]) return false;
    return true;
}

namespace {

BigInt factorial(int k) {
    BigInt f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

BigInt dim_partition(const Partition& eta) {
    BigInt d = factorial(eta.size());
    for (int v : eta) d /= factorial(v);
    return d;
}

BigInt multiplicity_factorial(const Partition& eta) {
    BigInt f = 1;
    for (auto [k, a] : multiplicities(eta)) f *= factorial(a);
    return f;
}

int chi(const Partition& omega, const Partition& eta) {
    if (eta.size() != omega.size() + 1) return 0;
    for (int v : eta.distinct_parts())
        if (eta.remove_one(v) == omega) return eta.multiplicity(v);
    return 0;
}

std::vector<std::pair<Partition, int>> covered_by(const Partition& eta) {
    std::vector<std::pair<Partition, int>> out;
    for (int v : eta.distinct_parts()) out.emplace_back(eta.remove_one(v), eta.multiplicity(v));
    return out;
}

std::vector<std::pair<Partition, int>> covering(const Partition& eta) {
    std::vector<std::pair<Partition, int>> out;
    for (int v : eta.distinct_parts()) {
        Partition lambda = eta.add_one(v);
        out.emplace_back(lambda, lambda.multiplicity(v + 1));
    }
    Partition lambda = eta.add_one(0);
    out.emplace_back(lambda, lambda.multiplicity(1));
    return out;
}

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<Partition, Partition>& k) const noexcept {
        PartitionHash h;
        return h(k.first) * 0x9e3779b97f4a7c15ULL ^ h(k.second);
    }
};

LruCache<std::pair<Partition, Partition>, BigInt, PairHash>& dim_cache() {
    static LruCache<std::pair<Partition, Partition>, BigInt, PairHash> cache(1 << 16);
    return cache;
}

BigInt dim_between_rec(const Partition& omega, const Partition& lambda,
                       std::unordered_map<Partition, BigInt, PartitionHash>& memo) {
    if (lambda == omega) return 1;
    if (lambda.size() <= omega.size() || !is_subpartition(omega, lambda)) return 0;
    if (auto it = memo.find(lambda); it != memo.end()) return it->second;
    BigInt total = 0;
    for (const auto& [mu, weight] : covered_by(lambda))
        total += dim_between_rec(omega, mu, memo) * weight;
    memo.emplace(lambda, total);
    return total;
}

}  // namespace

void set_dim_cache_capacity(std::size_t capacity) { dim_cache().set_capacity(capacity); }

BigInt dim_between(const Partition& omega, const Partition& eta) {
    if (!is_subpartition(omega, eta)) return 0;
    auto key = std::make_pair(omega, eta);
    if (auto hit = dim_cache().get(key)) return *hit;
    std::unordered_map<Partition, BigInt, PartitionHash> memo;
    BigInt value = dim_between_rec(omega, eta, memo);
    dim_cache().put(key, value);
    return value;
}

Rational hypergeom(const Partition& omega, const Partition& eta) {
    if (omega.size() > eta.size())
        throw DomainError("hypergeom: |omega| must not exceed |eta|");
    if (!is_subpartition(omega, eta)) return Rational(0);
    return Rational(dim_partition(omega) * dim_between(omega, eta), dim_partition(eta));
}

namespace {

// Sum over injective placements of omega's part values onto eta's parts (in
// index order) of prod (eta_i)_[v]. `remaining` holds the unplaced count of
// each distinct omega value.
BigInt placement_sum(const std::vector<int>& eta_parts, std::size_t pos,
                     const std::vector<int>& values, std::vector<int>& remaining,
                     std::map<std::pair<std::size_t, std::vector<int>>, BigInt>& memo) {
    bool done = std::all_of(remaining.begin(), remaining.end(), [](int r) { return r == 0; });
    if (done) return 1;
    if (pos == eta_parts.size()) return 0;
    auto key = std::make_pair(pos, remaining);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    BigInt total = placement_sum(eta_parts, pos + 1, values, remaining, memo);
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (remaining[j] == 0 || values[j] > eta_parts[pos]) continue;
        BigInt falling = 1;
        for (int i = 0; i < values[j]; ++i) falling *= eta_parts[pos] - i;
        --remaining[j];
        total += falling * placement_sum(eta_parts, pos + 1, values, remaining, memo);
        ++remaining[j];
    }
    memo.emplace(std::move(key), total);
    return total;
}

}  // namespace

Rational hypergeom_falling_factorial(const Partition& omega, const Partition& eta) {
    if (omega.size() > eta.size())
        throw DomainError("hypergeom: |omega| must not exceed |eta|");
    std::vector<int> values = omega.distinct_parts();
    std::vector<int> remaining;
    for (int v : values) remaining.push_back(omega.multiplicity(v));
    std::map<std::pair<std::size_t, std::vector<int>>, BigInt> memo;
    BigInt sum = placement_sum(eta.parts(), 0, values, remaining, memo);

    BigInt n_falling_m = 1;
    for (int i = 0; i < omega.size(); ++i) n_falling_m *= eta.size() - i;
    return Rational(dim_partition(omega) * sum, n_falling_m);
}

std::map<Partition, Rational> down_step_distribution(const Partition& eta) {
    if (eta.empty()) throw DomainError("down_step_distribution: empty partition has no deletion");
    std::map<Partition, Rational> out;
    for (int v : eta.distinct_parts())
        out.emplace(eta.remove_one(v), Rational(BigInt(eta.multiplicity(v) * v), BigInt(eta.size())));
    return out;
}

}  // namespace pdd
