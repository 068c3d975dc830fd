#include <doctest.h>

#include "mrdf/errors.hpp"
#include "mrdf/types.hpp"

using namespace mrdf;

TEST_CASE("label algebra matches the category truth table") {
    CHECK(labels_from_category(Category::RARV) == LabelSet{0, 0, 0, 1});
    CHECK(labels_from_category(Category::FAFV) == LabelSet{1, 1, 1, 0});
    CHECK(labels_from_category(Category::RAFV) == LabelSet{1, 0, 1, 0});
    CHECK(labels_from_category(Category::FARV) == LabelSet{1, 1, 0, 0});
}

TEST_CASE("label invariants hold for every category") {
    for (Category c : kAllCategories) {
        const LabelSet l = labels_from_category(c);
        CHECK(l.fake == ((l.fake_audio || l.fake_visual) ? 1 : 0));
        CHECK(l.paired == ((!l.fake_audio && !l.fake_visual) ? 1 : 0));
    }
}

TEST_CASE("labels_from_category is injective over the four categories") {
    for (Category a : kAllCategories)
        for (Category b : kAllCategories)
            if (a != b) CHECK(labels_from_category(a) != labels_from_category(b));
}

TEST_CASE("category names round-trip; unknown tags rejected") {
    for (Category c : kAllCategories) CHECK(category_from_name(category_name(c)) == c);
    CHECK_THROWS_AS(category_from_name("XXXX"), DataError);
}

TEST_CASE("pairing policy controls inclusion of both-fake clips only") {
    for (Category c : kAllCategories) {
        CHECK(in_pairing_loss(c, PairingPolicy::AnyFakeNegative));
        CHECK(in_pairing_loss(c, PairingPolicy::SingleFakeNegative) == (c != Category::FAFV));
    }
}

TEST_CASE("loss breakdown total recomputes from parts") {
    LossBreakdown b;
    b.ce = 0.5;
    b.cmr = 0.8;
    b.wmr_audio = 0.2;
    b.wmr_visual = 0.3;
    b.weight_ce = b.weight_cmr = b.weight_wmr = 1.0;
    CHECK(b.recompute_total() == doctest::Approx(1.8).epsilon(1e-12));
}
