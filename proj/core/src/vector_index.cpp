#include "motivrec/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>

#include "motivrec/error.hpp"
#include "motivrec/serialize.hpp"

namespace motivrec {
namespace {

constexpr char kMagic[4] = {'M', 'V', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kItemRecord = 0;
constexpr std::uint8_t kMotiveRecord = 1;

bool ranks_before(const ScoredKey& a, const ScoredKey& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.key < b.key;
}

class Writer {
public:
    void bytes(const void* data, std::size_t n) { out_.append(static_cast<const char*>(data), n); }
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& in) : in_(in) {}

    void need(std::size_t n) const {
        if (pos_ + n > in_.size()) throw InputError("truncated index file");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(in_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    const std::string& in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string to_string(Namespace ns) {
    switch (ns) {
        case Namespace::items: return "items";
        case Namespace::motives_by_user: return "motives_by_user";
        case Namespace::motives_global: return "motives_global";
    }
    return "?";
}

Namespace namespace_from_string(const std::string& name) {
    if (name == "items") return Namespace::items;
    if (name == "motives_by_user") return Namespace::motives_by_user;
    if (name == "motives_global") return Namespace::motives_global;
    throw InputError("unknown namespace: " + name);
}

VectorIndex::VectorIndex(std::size_t dimension) : dimension_(dimension) {}

void VectorIndex::check_vector(const Vector& v) const {
    if (v.size() != dimension_) {
        throw DimensionError("vector of dimension " + std::to_string(v.size()) + " in index of dimension " +
                             std::to_string(dimension_));
    }
    if (!is_unit(v)) throw InputError("index vectors must be unit-norm");
}

void VectorIndex::add_item(const std::string& key, Vector vector) {
    check_vector(vector);
    if (!items_.emplace(key, std::move(vector)).second) throw InputError("duplicate item key " + key);
}

void VectorIndex::add_motive(const std::string& user, const std::string& key, Vector vector) {
    check_vector(vector);
    if (!motives_.emplace(key, MotiveEntry{user, std::move(vector)}).second) {
        throw InputError("duplicate motive key " + key);
    }
    motives_by_user_[user].insert(key);
}

template <typename Fn>
void VectorIndex::for_each(const Scope& scope, Fn&& fn) const {
    switch (scope.ns) {
        case Namespace::items:
            for (const auto& [key, vec] : items_) fn(key, vec);
            break;
        case Namespace::motives_global:
            for (const auto& [key, entry] : motives_) fn(key, entry.vector);
            break;
        case Namespace::motives_by_user:
            if (auto it = motives_by_user_.find(scope.user); it != motives_by_user_.end()) {
                for (const auto& key : it->second) fn(key, motives_.at(key).vector);
            }
            break;
    }
}

std::size_t VectorIndex::size(const Scope& scope) const {
    switch (scope.ns) {
        case Namespace::items: return items_.size();
        case Namespace::motives_global: return motives_.size();
        case Namespace::motives_by_user: {
            auto it = motives_by_user_.find(scope.user);
            return it == motives_by_user_.end() ? 0 : it->second.size();
        }
    }
    return 0;
}

const Vector* VectorIndex::find(const Scope& scope, const std::string& key) const {
    switch (scope.ns) {
        case Namespace::items: {
            auto it = items_.find(key);
            return it == items_.end() ? nullptr : &it->second;
        }
        case Namespace::motives_global:
        case Namespace::motives_by_user: {
            auto it = motives_.find(key);
            if (it == motives_.end()) return nullptr;
            if (scope.ns == Namespace::motives_by_user && it->second.user != scope.user) return nullptr;
            return &it->second.vector;
        }
    }
    return nullptr;
}

bool VectorIndex::contains(const Scope& scope, const std::string& key) const {
    return find(scope, key) != nullptr;
}

std::vector<std::string> VectorIndex::keys(const Scope& scope) const {
    std::vector<std::string> out;
    for_each(scope, [&](const std::string& key, const Vector&) { out.push_back(key); });
    return out;
}

std::vector<std::string> VectorIndex::users() const {
    std::vector<std::string> out;
    for (const auto& [user, keys] : motives_by_user_) out.push_back(user);
    return out;
}

std::string VectorIndex::motive_owner(const std::string& key) const {
    auto it = motives_.find(key);
    return it == motives_.end() ? std::string() : it->second.user;
}

std::vector<ScoredKey> VectorIndex::top_k(const Scope& scope, const Vector& query, std::size_t k,
                                          const std::set<std::string>& exclude) const {
    if (query.size() != dimension_) {
        throw DimensionError("query of dimension " + std::to_string(query.size()) + " in index of dimension " +
                             std::to_string(dimension_));
    }
    if (k == 0) throw InputError("top_k requires k >= 1");
    std::vector<ScoredKey> scored;
    scored.reserve(size(scope));
    for_each(scope, [&](const std::string& key, const Vector& vec) {
        if (!exclude.contains(key)) scored.push_back({key, dot(vec, query)});
    });
    const std::size_t keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                      ranks_before);
    scored.resize(keep);
    return scored;
}

std::vector<std::string> VectorIndex::mmr_select(const Scope& scope, const Vector& query,
                                                 const std::set<std::string>& seeds, std::size_t k,
                                                 double lambda, const std::set<std::string>& exclude) const {
    if (query.size() != dimension_) throw DimensionError("query dimension does not match index");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("mmr lambda must be in [0, 1]");

    std::vector<const Vector*> chosen;
    for (const auto& seed : seeds) {
        const Vector* v = find(scope, seed);
        if (!v) throw InputError("mmr seed " + seed + " is not in " + to_string(scope.ns));
        chosen.push_back(v);
    }

    struct Candidate {
        const std::string* key;
        const Vector* vec;
        double relevance;
        double redundancy;
    };
    std::vector<Candidate> pool;
    for_each(scope, [&](const std::string& key, const Vector& vec) {
        if (seeds.contains(key) || exclude.contains(key)) return;
        double redundancy = -std::numeric_limits<double>::infinity();
        for (const Vector* c : chosen) redundancy = std::max(redundancy, dot(vec, *c));
        pool.push_back({&key, &vec, dot(vec, query), redundancy});
    });

    std::vector<std::string> selected;
    while (selected.size() < k && !pool.empty()) {
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto& c = pool[i];
            const double penalty = chosen.empty() ? 0.0 : c.redundancy;
            const double score = lambda * c.relevance - (1.0 - lambda) * penalty;
            if (i == 0 || score > best_score || (score == best_score && *c.key < *pool[best].key)) {
                best = i;
                best_score = score;
            }
        }
        const Vector* picked = pool[best].vec;
        selected.push_back(*pool[best].key);
        chosen.push_back(picked);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
        for (auto& c : pool) c.redundancy = std::max(c.redundancy, dot(*c.vec, *picked));
    }
    return selected;
}

void VectorIndex::clear_motives() {
    motives_.clear();
    motives_by_user_.clear();
}

std::string VectorIndex::serialize() const {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(dimension_));
    w.u64(items_.size() + motives_.size());
    for (const auto& [key, vec] : items_) {
        w.u8(kItemRecord);
        w.str(key);
        w.str("");
        for (double x : vec) w.f64(x);
    }
    for (const auto& [key, entry] : motives_) {
        w.u8(kMotiveRecord);
        w.str(key);
        w.str(entry.user);
        for (double x : entry.vector) w.f64(x);
    }
    return w.take();
}

VectorIndex VectorIndex::deserialize(const std::string& bytes) {
    Reader r(bytes);
    r.need(sizeof kMagic);
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw InputError("not an index file (bad magic)");
    for (std::size_t i = 0; i < sizeof kMagic; ++i) r.u8();
    if (const auto version = r.u32(); version != kVersion) {
        throw InputError("unsupported index version " + std::to_string(version));
    }
    VectorIndex index(r.u32());
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint8_t kind = r.u8();
        std::string key = r.str();
        std::string user = r.str();
        Vector vec(index.dimension_);
        for (double& x : vec) x = r.f64();
        if (kind == kItemRecord) index.add_item(key, std::move(vec));
        else if (kind == kMotiveRecord) index.add_motive(user, key, std::move(vec));
        else throw InputError("unknown index record kind " + std::to_string(kind));
    }
    if (!r.done()) throw InputError("trailing bytes in index file");
    return index;
}

void VectorIndex::save(const std::string& path) const { write_file_atomic(path, serialize()); }

VectorIndex VectorIndex::load(const std::string& path) { return deserialize(read_file(path)); }

Vector mean_direction(const std::vector<const Vector*>& vectors) {
    if (vectors.empty()) return {};
    Vector sum(vectors.front()->size(), 0.0);
    for (const Vector* v : vectors) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    }
    if (l2_norm(sum) < 1e-12) return *vectors.front();
    return normalized(std::move(sum));
}

}  // namespace motivrec
