#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "motivrec/config.hpp"
#include "motivrec/corpus.hpp"
#include "motivrec/gateway.hpp"
#include "motivrec/types.hpp"
#include "motivrec/vector_index.hpp"

namespace motivrec {

struct Bundle {
    std::vector<std::string> items;
    TimeSpan span;

    bool operator==(const Bundle&) const = default;
};

/// Sliding event-count windows over the user's train-split history. Windows
/// start at 0, stride, 2*stride, ... while the start is inside the history,
/// so the tail always lands in a (possibly short) final window. With
/// `whole_history` an extra bundle covering everything is placed first.
std::vector<Bundle> build_bundles(const UserRecord& user, int window, int stride, bool whole_history = false);

/// Infers one motive for a bundle. With `annotation_on` false the motive is
/// the plain list of item titles and no model call is made. Returns nullopt
/// when generation fails; the caller skips the bundle.
std::optional<std::string> annotate_bundle(const Bundle& bundle, const Metadata& user_metadata,
                                           const std::map<std::string, ItemRecord>& items, Gateway& gateway,
                                           bool annotation_on = true);

struct AnnotationResult {
    std::vector<MotiveAnnotation> motives;  // ordered by user, then bundle index
    std::size_t users_annotated = 0;
    std::size_t users_skipped = 0;
    std::size_t bundles_failed = 0;
    std::vector<std::string> notices;
};

/// Annotates every user, embeds the motives and adds them to the motive
/// namespaces of `index`. Users without train history are skipped.
AnnotationResult build_motive_index(const DatasetBundle& data, Gateway& gateway, VectorIndex& index,
                                    const PipelineConfig& cfg, int jobs = 1);

/// Motives grouped per user, each list in bundle order.
using MotiveStore = std::map<std::string, std::vector<MotiveAnnotation>>;
MotiveStore group_by_user(const std::vector<MotiveAnnotation>& motives);

void save_annotations(const std::vector<MotiveAnnotation>& motives, const std::string& path);
std::vector<MotiveAnnotation> load_annotations(const std::string& path);

/// Rebuilds the motive namespaces of `index` from stored annotations.
void index_motives(const std::vector<MotiveAnnotation>& motives, VectorIndex& index);

}  // namespace motivrec
