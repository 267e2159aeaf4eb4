#include "motivrec/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "motivrec/error.hpp"
#include "motivrec/serialize.hpp"

namespace motivrec {
namespace {

const std::vector<std::string> kAdjectives = {"Silent", "Crimson", "Golden", "Broken", "Hidden", "Electric",
                                              "Frozen", "Wild",   "Last",   "Midnight", "Lost",  "Burning"};
const std::vector<std::string> kNouns = {"Harbor", "Empire", "Garden", "Signal", "Frontier", "Mirror",
                                         "Orchard", "Canyon", "Voyage", "Carnival", "Lantern"};
const std::vector<std::string> kOccupations = {"engineer", "teacher", "student", "artist", "doctor", "writer"};
const std::vector<std::string> kAges = {"18-24", "25-34", "35-44", "45-49", "50-55", "56+"};

std::string pick(const std::vector<std::string>& from, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
    return from[d(rng)];
}

}  // namespace

const std::vector<std::string>& genre_vocabulary() {
    static const std::vector<std::string> genres = {"Action",  "Comedy",   "Drama",   "Horror",
                                                    "Romance", "Thriller", "Animation", "Documentary",
                                                    "Western", "Musical",  "Mystery", "Sci-Fi"};
    return genres;
}

SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
    if (spec.users <= 0 || spec.items <= 0) throw ConfigError("synthetic corpus needs users and items");
    if (spec.min_events <= 0 || spec.max_events < spec.min_events) throw ConfigError("bad synthetic event range");
    if (spec.max_events > spec.items) throw ConfigError("max_events exceeds the catalog");
    if (spec.taste_share < 0.0 || spec.taste_share > 1.0) throw ConfigError("taste_share must be in [0,1]");

    std::mt19937_64 rng(spec.seed);
    const auto& genres = genre_vocabulary();
    const std::size_t g = genres.size();
    SyntheticCorpus out;

    std::vector<std::vector<std::string>> by_genre(g);
    for (int i = 1; i <= spec.items; ++i) {
        const auto id = std::to_string(i);
        const std::size_t primary = static_cast<std::size_t>(i - 1) % g;
        std::set<std::size_t> own{primary};
        if (std::bernoulli_distribution(0.5)(rng)) own.insert(std::uniform_int_distribution<std::size_t>(0, g - 1)(rng));
        std::string genre_field;
        for (auto k : own) {
            genre_field += (genre_field.empty() ? "" : "|") + genres[k];
            by_genre[k].push_back(id);
        }
        const auto n = static_cast<std::size_t>(i - 1);
        std::string title = kAdjectives[n % kAdjectives.size()] + " " + kNouns[(n / kAdjectives.size()) % kNouns.size()];
        title += " (" + std::to_string(1970 + static_cast<int>(n % 50)) + ")";
        out.items[id] = Metadata{{"title", title}, {"genres", genre_field}};
    }

    std::vector<std::string> all_items;
    for (const auto& [id, meta] : out.items) all_items.push_back(id);

    std::int64_t clock = 978300000;
    for (int u = 1; u <= spec.users; ++u) {
        const auto user = std::to_string(u);
        std::vector<std::size_t> order(g);
        for (std::size_t k = 0; k < g; ++k) order[k] = k;
        std::shuffle(order.begin(), order.end(), rng);
        const std::vector<std::size_t> favourites{order[0], order[1]};
        out.favourite_genres[user] = {genres[favourites[0]], genres[favourites[1]]};
        out.users[user] = Metadata{{"gender", std::bernoulli_distribution(0.5)(rng) ? "F" : "M"},
                                   {"age", pick(kAges, rng)},
                                   {"occupation", pick(kOccupations, rng)}};

        std::set<std::string> liked;
        for (auto k : favourites) liked.insert(by_genre[k].begin(), by_genre[k].end());
        const int count = std::uniform_int_distribution<int>(spec.min_events, spec.max_events)(rng);
        std::set<std::string> seen;
        std::int64_t ts = clock + std::uniform_int_distribution<std::int64_t>(0, 500)(rng);
        for (int e = 0; e < count; ++e) {
            const bool taste = !liked.empty() && std::bernoulli_distribution(spec.taste_share)(rng);
            std::vector<std::string> pool;
            for (const auto& id : taste ? std::vector<std::string>(liked.begin(), liked.end()) : all_items) {
                if (!seen.contains(id)) pool.push_back(id);
            }
            if (pool.empty()) {
                for (const auto& id : all_items) {
                    if (!seen.contains(id)) pool.push_back(id);
                }
            }
            const auto item = pick(pool, rng);
            seen.insert(item);
            const bool tie = spec.tie_every > 0 && e > 0 && e % spec.tie_every == 0;
            if (!tie) ts += std::uniform_int_distribution<std::int64_t>(30, 4000)(rng);
            const double rating = liked.contains(item) ? std::uniform_int_distribution<int>(3, 5)(rng)
                                                       : std::uniform_int_distribution<int>(1, 4)(rng);
            out.events.push_back({user, item, rating, ts, SplitTag::unassigned});
        }
        clock += 1800;
    }
    return out;
}

void write_movielens(const SyntheticCorpus& corpus, const std::string& dir) {
    std::ostringstream ratings;
    for (const auto& e : corpus.events) {
        ratings << e.user_id << "::" << e.item_id << "::" << static_cast<int>(e.rating.value_or(0.0)) << "::"
                << e.timestamp << "\n";
    }
    std::ostringstream movies;
    std::vector<std::pair<long, std::string>> ids;
    for (const auto& [id, meta] : corpus.items) ids.emplace_back(std::stol(id), id);
    std::sort(ids.begin(), ids.end());
    for (const auto& [n, id] : ids) {
        const auto& meta = corpus.items.at(id);
        movies << id << "::" << meta.at("title") << "::" << meta.at("genres") << "\n";
    }
    write_file_atomic(dir + "/ratings.dat", ratings.str());
    write_file_atomic(dir + "/movies.dat", movies.str());
}

}  // namespace motivrec
