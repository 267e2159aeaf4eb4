#include "motivrec/types.hpp"

#include <cmath>
#include <tuple>

#include "motivrec/error.hpp"

namespace motivrec {

std::string to_string(SplitTag tag) {
    switch (tag) {
        case SplitTag::train: return "train";
        case SplitTag::valid: return "valid";
        case SplitTag::test: return "test";
        case SplitTag::unassigned: break;
    }
    return "unassigned";
}

SplitTag split_tag_from_string(const std::string& text) {
    if (text == "train") return SplitTag::train;
    if (text == "valid") return SplitTag::valid;
    if (text == "test") return SplitTag::test;
    if (text == "unassigned") return SplitTag::unassigned;
    throw InputError("unknown split tag: " + text);
}

bool history_before(const InteractionEvent& a, const InteractionEvent& b) {
    return std::tie(a.timestamp, a.item_id) < std::tie(b.timestamp, b.item_id);
}

bool global_before(const InteractionEvent& a, const InteractionEvent& b) {
    return std::tie(a.timestamp, a.user_id, a.item_id) < std::tie(b.timestamp, b.user_id, b.item_id);
}

std::string motive_key(const std::string& user_id, int bundle_index) {
    return user_id + "#" + std::to_string(bundle_index);
}

std::string MotiveAnnotation::key() const { return motive_key(user_id, bundle_index); }

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw DimensionError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double l2_norm(const Vector& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

Vector normalized(Vector v) {
    const double n = l2_norm(v);
    if (n == 0.0) return v;
    for (double& x : v) x /= n;
    return v;
}

bool is_unit(const Vector& v, double tol) { return std::abs(l2_norm(v) - 1.0) <= tol; }

}  // namespace motivrec
