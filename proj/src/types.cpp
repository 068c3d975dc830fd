#include "mrdf/types.hpp"

#include "mrdf/errors.hpp"

namespace mrdf {

const char* category_name(Category c) {
    switch (c) {
    case Category::FAFV: return "FAFV";
    case Category::FARV: return "FARV";
    case Category::RAFV: return "RAFV";
    case Category::RARV: return "RARV";
    }
    return "?";
}

Category category_from_name(const std::string& name) {
    if (name == "FAFV") return Category::FAFV;
    if (name == "FARV") return Category::FARV;
    if (name == "RAFV") return Category::RAFV;
    if (name == "RARV") return Category::RARV;
    throw DataError("unknown category tag '" + name + "'");
}

int category_index(Category c) {
    switch (c) {
    case Category::FAFV: return 0;
    case Category::FARV: return 1;
    case Category::RAFV: return 2;
    case Category::RARV: return 3;
    }
    return -1;
}

const char* pairing_policy_name(PairingPolicy p) {
    return p == PairingPolicy::AnyFakeNegative ? "any_fake_negative" : "single_fake_negative";
}

PairingPolicy pairing_policy_from_name(const std::string& name) {
    if (name == "any_fake_negative") return PairingPolicy::AnyFakeNegative;
    if (name == "single_fake_negative") return PairingPolicy::SingleFakeNegative;
    throw DataError("unknown pairing policy '" + name + "'");
}

LabelSet labels_from_category(Category c) {
    LabelSet l;
    l.fake_audio = (c == Category::FAFV || c == Category::FARV) ? 1 : 0;
    l.fake_visual = (c == Category::FAFV || c == Category::RAFV) ? 1 : 0;
    l.fake = (l.fake_audio || l.fake_visual) ? 1 : 0;
    l.paired = (!l.fake_audio && !l.fake_visual) ? 1 : 0;
    return l;
}

bool in_pairing_loss(Category c, PairingPolicy policy) {
    if (policy == PairingPolicy::AnyFakeNegative) return true;
    return c != Category::FAFV;
}

} // namespace mrdf
