// Copyright 2026 The SPAR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spar/core/error.hpp"
#include "spar/core/hash.hpp"

namespace spar {

/// HNSW tuning knobs: graph degree and the two beam widths.
struct AnnParams {
    std::size_t m_graph = 16;
    std::size_t ef_construction = 200;
    std::size_t ef_search = 64;
    std::uint64_t seed = 0x414e4e53454544ULL;

    void validate() const {
        if (m_graph < 2) throw Error(ErrorCode::invalid_argument, "m_graph must be at least 2");
        if (ef_construction < 1 || ef_search < 1)
            throw Error(ErrorCode::invalid_argument, "beam widths must be positive");
    }

    nlohmann::json to_json() const {
        return {{"m_graph", m_graph}, {"ef_construction", ef_construction}, {"ef_search", ef_search}};
    }
    static AnnParams from_json(const nlohmann::json& j) {
        AnnParams p;
        p.m_graph = j.value("m_graph", p.m_graph);
        p.ef_construction = j.value("ef_construction", p.ef_construction);
        p.ef_search = j.value("ef_search", p.ef_search);
        p.validate();
        return p;
    }
};

struct SearchHit {
    std::uint64_t id = 0;
    float distance = 0;
    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// k-NN answer, ascending by distance, plus the number of distance
/// evaluations spent producing it.
struct SearchResult {
    std::vector<SearchHit> hits;
    std::uint64_t distance_evals = 0;
};

namespace detail {

inline float dot_f(const float* a, const float* b, std::size_t n) noexcept {
    std::array<float, 8> acc{};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
    float s = 0;
    for (; i < n; ++i) s += a[i] * b[i];
    for (float x : acc) s += x;
    return s;
}

inline std::vector<float> normalized_copy(std::span<const float> v) {
    std::vector<float> out(v.begin(), v.end());
    double n = 0;
    for (float x : out) n += double(x) * x;
    n = std::sqrt(n);
    if (n > 0)
        for (auto& x : out) x = static_cast<float>(x / n);
    return out;
}

} // namespace detail

/// Hierarchical navigable small-world graph over L2-normalized vectors with
/// cosine distance (1 - dot). Levels come from a seeded hash of the insertion
/// ordinal, so two builds over the same sequence are identical.
///
/// search() is const and safe to call concurrently; insert() and
/// mark_deleted() must be serialized by the owner.
class HnswIndex {
public:
    static constexpr std::array<char, 8> kMagic{'S', 'P', 'A', 'R', 'A', 'N', 'N', '1'};

    explicit HnswIndex(std::size_t dim, AnnParams params = {})
        : dim_(dim), params_(params), level_mult_(1.0 / std::log(double(params.m_graph))) {
        if (dim_ == 0) throw Error(ErrorCode::invalid_argument, "index dim must be positive");
        params_.validate();
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    const AnnParams& params() const noexcept { return params_; }
    bool contains(std::uint64_t id) const { return lookup_.count(id) > 0; }
    std::uint64_t build_distance_evals() const noexcept { return build_evals_; }
    int max_level() const noexcept { return max_level_; }

    std::span<const float> vector(std::uint64_t id) const {
        auto it = lookup_.find(id);
        if (it == lookup_.end()) throw Error(ErrorCode::invalid_argument, "no item " + std::to_string(id));
        return {data_.data() + std::size_t(it->second) * dim_, dim_};
    }

    const std::vector<std::uint64_t>& ids() const noexcept { return ids_; }

    /// Returns the distance evaluations this insertion cost.
    std::uint64_t insert(std::uint64_t id, std::span<const float> v) {
        if (v.size() != dim_)
            throw Error(ErrorCode::dim_mismatch, "vector dim " + std::to_string(v.size()) +
                                                     " != index dim " + std::to_string(dim_));
        if (lookup_.count(id)) throw Error(ErrorCode::duplicate_id, "item " + std::to_string(id) + " already indexed");

        const auto node = static_cast<std::uint32_t>(ids_.size());
        auto unit = detail::normalized_copy(v);
        data_.insert(data_.end(), unit.begin(), unit.end());
        ids_.push_back(id);
        lookup_.emplace(id, node);
        deleted_.push_back(0);
        const int level = random_level(node);
        levels_.push_back(level);
        links_.emplace_back(std::size_t(level) + 1);

        std::uint64_t evals = 0;
        if (node == 0) {
            entry_ = 0;
            max_level_ = level;
            return 0;
        }

        const float* q = at(node);
        std::uint32_t cur = entry_;
        float cur_dist = distance(q, cur, evals);
        for (int lc = max_level_; lc > level; --lc) cur = greedy(q, cur, cur_dist, lc, evals);

        for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
            auto found = search_layer(q, cur, params_.ef_construction, lc, false, evals);
            auto neighbors = select_neighbors(found, params_.m_graph, evals);
            links_[node][lc] = neighbors;
            for (auto n : neighbors) connect(n, node, lc, evals);
            cur = found.front().second;
        }
        if (level > max_level_) {
            max_level_ = level;
            entry_ = node;
        }
        build_evals_ += evals;
        return evals;
    }

    /// Hides an item from results; it still routes searches.
    void mark_deleted(std::uint64_t id) {
        auto it = lookup_.find(id);
        if (it == lookup_.end()) throw Error(ErrorCode::invalid_argument, "no item " + std::to_string(id));
        if (!deleted_[it->second]) {
            deleted_[it->second] = 1;
            ++deleted_count_;
        }
    }
    std::size_t live_size() const noexcept { return ids_.size() - deleted_count_; }
    bool is_deleted(std::uint64_t id) const {
        auto it = lookup_.find(id);
        return it != lookup_.end() && deleted_[it->second];
    }

    SearchResult search(std::span<const float> query, std::size_t k,
                        std::optional<std::size_t> ef_search = std::nullopt) const {
        SearchResult r;
        if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
        if (query.size() != dim_)
            throw Error(ErrorCode::dim_mismatch, "query dim " + std::to_string(query.size()) +
                                                     " != index dim " + std::to_string(dim_));
        if (ids_.empty()) return r;
        std::size_t ef = std::max(ef_search.value_or(params_.ef_search), k);
        auto unit = detail::normalized_copy(query);
        const float* q = unit.data();

        std::uint32_t cur = entry_;
        float cur_dist = distance(q, cur, r.distance_evals);
        for (int lc = max_level_; lc > 0; --lc) cur = greedy(q, cur, cur_dist, lc, r.distance_evals);
        auto found = search_layer(q, cur, ef, 0, deleted_count_ > 0, r.distance_evals);
        for (const auto& [d, n] : found) {
            if (r.hits.size() == k) break;
            r.hits.push_back({ids_[n], d});
        }
        return r;
    }

    std::uint64_t vector_bytes() const noexcept { return std::uint64_t(ids_.size()) * dim_ * sizeof(float); }

    /// Graph bytes: adjacency entries plus per-node id and level.
    std::uint64_t overhead_bytes() const noexcept {
        std::uint64_t b = 0;
        for (const auto& per_level : links_) {
            for (const auto& l : per_level) b += l.size() * sizeof(std::uint32_t);
            b += sizeof(std::uint64_t) + sizeof(std::int32_t);
        }
        return b;
    }

    /// Nodes reachable from the entry point over level-0 edges.
    std::size_t reachable_count() const {
        if (ids_.empty()) return 0;
        std::vector<char> seen(ids_.size(), 0);
        std::vector<std::uint32_t> stack{entry_};
        seen[entry_] = 1;
        std::size_t count = 0;
        while (!stack.empty()) {
            auto n = stack.back();
            stack.pop_back();
            ++count;
            for (auto m : links_[n][0])
                if (!seen[m]) {
                    seen[m] = 1;
                    stack.push_back(m);
                }
        }
        return count;
    }

    /// Binary snapshot (little-endian): magic "SPARANN1", dim, count, params,
    /// entry point, per-node {id, deleted, level, adjacency per level}, then
    /// all vectors row-major.
    void serialize(std::ostream& out) const {
        out.write(kMagic.data(), kMagic.size());
        put<std::uint64_t>(out, dim_);
        put<std::uint64_t>(out, ids_.size());
        put<std::uint64_t>(out, params_.m_graph);
        put<std::uint64_t>(out, params_.ef_construction);
        put<std::uint64_t>(out, params_.ef_search);
        put<std::uint64_t>(out, params_.seed);
        put<std::int32_t>(out, max_level_);
        put<std::uint32_t>(out, entry_);
        for (std::size_t n = 0; n < ids_.size(); ++n) {
            put<std::uint64_t>(out, ids_[n]);
            put<std::uint8_t>(out, deleted_[n]);
            put<std::int32_t>(out, levels_[n]);
            for (const auto& l : links_[n]) {
                put<std::uint32_t>(out, static_cast<std::uint32_t>(l.size()));
                out.write(reinterpret_cast<const char*>(l.data()), std::streamsize(l.size() * sizeof(std::uint32_t)));
            }
        }
        out.write(reinterpret_cast<const char*>(data_.data()), std::streamsize(data_.size() * sizeof(float)));
    }

    static HnswIndex deserialize(std::istream& in) {
        std::array<char, 8> magic{};
        in.read(magic.data(), magic.size());
        if (!in || magic != kMagic) throw Error(ErrorCode::corrupt_index, "not an ANN snapshot");
        auto dim = get<std::uint64_t>(in);
        auto count = get<std::uint64_t>(in);
        AnnParams p;
        p.m_graph = get<std::uint64_t>(in);
        p.ef_construction = get<std::uint64_t>(in);
        p.ef_search = get<std::uint64_t>(in);
        p.seed = get<std::uint64_t>(in);
        HnswIndex idx(dim, p);
        idx.max_level_ = get<std::int32_t>(in);
        idx.entry_ = get<std::uint32_t>(in);
        for (std::uint64_t n = 0; n < count; ++n) {
            auto id = get<std::uint64_t>(in);
            idx.ids_.push_back(id);
            idx.lookup_.emplace(id, static_cast<std::uint32_t>(n));
            idx.deleted_.push_back(get<std::uint8_t>(in));
            idx.deleted_count_ += idx.deleted_.back();
            auto level = get<std::int32_t>(in);
            idx.levels_.push_back(level);
            idx.links_.emplace_back(std::size_t(level) + 1);
            for (auto& l : idx.links_.back()) {
                l.resize(get<std::uint32_t>(in));
                in.read(reinterpret_cast<char*>(l.data()), std::streamsize(l.size() * sizeof(std::uint32_t)));
            }
        }
        idx.data_.resize(count * dim);
        in.read(reinterpret_cast<char*>(idx.data_.data()), std::streamsize(idx.data_.size() * sizeof(float)));
        if (!in) throw Error(ErrorCode::corrupt_index, "truncated ANN snapshot");
        return idx;
    }

private:
    using Candidate = std::pair<float, std::uint32_t>;

    template <class T> static void put(std::ostream& out, T v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    template <class T> static T get(std::istream& in) {
        T v{};
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in) throw Error(ErrorCode::corrupt_index, "truncated ANN snapshot");
        return v;
    }

    const float* at(std::uint32_t n) const noexcept { return data_.data() + std::size_t(n) * dim_; }

    float distance(const float* q, std::uint32_t n, std::uint64_t& evals) const noexcept {
        ++evals;
        return 1.0f - detail::dot_f(q, at(n), dim_);
    }

    int random_level(std::uint32_t ordinal) const {
        auto bits = splitmix64(params_.seed ^ (std::uint64_t(ordinal) * 0x9e3779b97f4a7c15ULL));
        double u = double(bits >> 11) * 0x1.0p-53;
        if (u <= 0) u = 0x1.0p-53;
        return static_cast<int>(-std::log(u) * level_mult_);
    }

    std::size_t max_degree(int level) const noexcept {
        return level == 0 ? params_.m_graph * 2 : params_.m_graph;
    }

    std::uint32_t greedy(const float* q, std::uint32_t cur, float& cur_dist, int level,
                         std::uint64_t& evals) const {
        bool moved = true;
        while (moved) {
            moved = false;
            for (auto n : links_[cur][level]) {
                float d = distance(q, n, evals);
                if (d < cur_dist) {
                    cur_dist = d;
                    cur = n;
                    moved = true;
                }
            }
        }
        return cur;
    }

    /// Beam search on one level; returns up to ef nodes ascending by distance.
    std::vector<Candidate> search_layer(const float* q, std::uint32_t entry, std::size_t ef, int level,
                                        bool skip_deleted, std::uint64_t& evals) const {
        std::vector<char> visited(ids_.size(), 0);
        std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
        std::priority_queue<Candidate> best;
        float d0 = distance(q, entry, evals);
        visited[entry] = 1;
        frontier.emplace(d0, entry);
        if (!(skip_deleted && deleted_[entry])) best.emplace(d0, entry);
        float bound = best.empty() ? std::numeric_limits<float>::max() : d0;

        while (!frontier.empty()) {
            auto [d, n] = frontier.top();
            if (d > bound && best.size() >= ef) break;
            frontier.pop();
            for (auto m : links_[n][level]) {
                if (visited[m]) continue;
                visited[m] = 1;
                float dm = distance(q, m, evals);
                if (best.size() < ef || dm < bound) {
                    frontier.emplace(dm, m);
                    if (!(skip_deleted && deleted_[m])) {
                        best.emplace(dm, m);
                        if (best.size() > ef) best.pop();
                    }
                    if (!best.empty()) bound = best.top().first;
                }
            }
        }
        std::vector<Candidate> out(best.size());
        for (auto i = out.size(); i-- > 0;) {
            out[i] = best.top();
            best.pop();
        }
        return out;
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the
    /// base point than to every neighbor already kept.
    std::vector<std::uint32_t> select_neighbors(const std::vector<Candidate>& sorted, std::size_t m,
                                                std::uint64_t& evals) const {
        std::vector<std::uint32_t> kept;
        if (sorted.size() <= m) {
            for (const auto& c : sorted) kept.push_back(c.second);
            return kept;
        }
        for (const auto& [d, n] : sorted) {
            if (kept.size() >= m) break;
            bool good = true;
            for (auto k : kept)
                if (distance(at(n), k, evals) < d) {
                    good = false;
                    break;
                }
            if (good) kept.push_back(n);
        }
        return kept;
    }

    void connect(std::uint32_t from, std::uint32_t to, int level, std::uint64_t& evals) {
        auto& adj = links_[from][level];
        adj.push_back(to);
        if (adj.size() <= max_degree(level)) return;
        std::vector<Candidate> cands;
        cands.reserve(adj.size());
        for (auto n : adj) cands.emplace_back(distance(at(from), n, evals), n);
        std::sort(cands.begin(), cands.end());
        adj = select_neighbors(cands, max_degree(level), evals);
    }

    std::size_t dim_;
    AnnParams params_;
    double level_mult_;
    std::vector<float> data_;
    std::vector<std::uint64_t> ids_;
    std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
    std::vector<int> levels_;
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::vector<std::uint8_t> deleted_;
    std::size_t deleted_count_ = 0;
    std::uint32_t entry_ = 0;
    int max_level_ = -1;
    std::uint64_t build_evals_ = 0;
};

} // namespace spar
