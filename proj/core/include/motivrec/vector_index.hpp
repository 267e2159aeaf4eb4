#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "motivrec/types.hpp"

namespace motivrec {

enum class Namespace { items, motives_by_user, motives_global };

std::string to_string(Namespace ns);
Namespace namespace_from_string(const std::string& name);

/// A namespace plus, for `motives_by_user`, the owning user.
struct Scope {
    Namespace ns = Namespace::items;
    std::string user;

    static Scope items() { return {Namespace::items, {}}; }
    static Scope user_motives(std::string user) { return {Namespace::motives_by_user, std::move(user)}; }
    static Scope all_motives() { return {Namespace::motives_global, {}}; }
};

struct ScoredKey {
    std::string key;
    double score = 0.0;

    bool operator==(const ScoredKey&) const = default;
};

/// Exact cosine search over unit vectors. Motives are stored once and exposed
/// both per user and globally, so the global namespace is always the union of
/// the per-user ones.
///
/// Built by a single writer, then shared read-only across threads.
class VectorIndex {
public:
    explicit VectorIndex(std::size_t dimension = 0);

    std::size_t dimension() const noexcept { return dimension_; }

    void add_item(const std::string& key, Vector vector);
    void add_motive(const std::string& user, const std::string& key, Vector vector);

    std::size_t size(const Scope& scope) const;
    bool contains(const Scope& scope, const std::string& key) const;
    /// Vector stored under `key` in the scope, or nullptr.
    const Vector* find(const Scope& scope, const std::string& key) const;
    std::vector<std::string> keys(const Scope& scope) const;
    std::vector<std::string> users() const;
    /// Owner of a motive key, or empty.
    std::string motive_owner(const std::string& key) const;

    /// The k best keys by cosine, descending, ties by ascending key.
    std::vector<ScoredKey> top_k(const Scope& scope, const Vector& query, std::size_t k,
                                 const std::set<std::string>& exclude = {}) const;

    /// Greedy maximal marginal relevance. Seeds count as already selected for
    /// the redundancy term but are never returned.
    std::vector<std::string> mmr_select(const Scope& scope, const Vector& query,
                                        const std::set<std::string>& seeds, std::size_t k, double lambda,
                                        const std::set<std::string>& exclude = {}) const;

    /// Drops the motive namespaces, keeping items.
    void clear_motives();

    std::string serialize() const;
    static VectorIndex deserialize(const std::string& bytes);
    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

    bool operator==(const VectorIndex&) const = default;

private:
    struct MotiveEntry {
        std::string user;
        Vector vector;

        bool operator==(const MotiveEntry&) const = default;
    };

    void check_vector(const Vector& v) const;
    template <typename Fn>
    void for_each(const Scope& scope, Fn&& fn) const;

    std::size_t dimension_;
    std::map<std::string, Vector> items_;
    std::map<std::string, MotiveEntry> motives_;
    std::map<std::string, std::set<std::string>> motives_by_user_;
};

/// Normalized mean of the given vectors; falls back to the first vector when
/// the mean cancels out. Empty input yields an empty vector.
Vector mean_direction(const std::vector<const Vector*>& vectors);

}  // namespace motivrec
