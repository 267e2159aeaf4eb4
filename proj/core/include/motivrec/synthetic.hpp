#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "motivrec/types.hpp"

namespace motivrec {

/// Shape of a generated movie-style corpus. Each user leans towards two
/// genres, so histories carry a learnable signal.
struct SyntheticSpec {
    int users = 40;
    int items = 60;
    int min_events = 12;
    int max_events = 24;
    double taste_share = 0.8;   // chance an event comes from a favourite genre
    int tie_every = 7;          // every n-th event reuses the previous timestamp; 0 disables
    std::uint64_t seed = 7;
};

struct SyntheticCorpus {
    std::vector<InteractionEvent> events;
    std::map<std::string, Metadata> items;  // title, genres
    std::map<std::string, Metadata> users;  // gender, age, occupation
    std::map<std::string, std::vector<std::string>> favourite_genres;
};

const std::vector<std::string>& genre_vocabulary();

/// Deterministic for a given spec. Ids are decimal strings starting at 1.
SyntheticCorpus make_synthetic(const SyntheticSpec& spec);

/// Writes `ratings.dat` and `movies.dat` in the `::`-delimited MovieLens layout.
void write_movielens(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace motivrec
