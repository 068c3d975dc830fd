#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mrdf/errors.hpp"
#include "mrdf/manifest.hpp"

using namespace mrdf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mrdf_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p);
    os << content;
}

const char* kHeader = "id\tidentity\tcategory\taudio_ref\tvisual_ref\tt_a\tt_v\n";

} // namespace

TEST_CASE("manifest round-trips one row per category") {
    TempDir dir;
    const fs::path p = dir.path / "m.tsv";
    write_file(p, std::string(kHeader) +
                      "c0\tp0\tFAFV\ta0.bin\tv0.bin\t8\t8\n"
                      "c1\tp0\tFARV\ta1.bin\tv1.bin\t8\t8\n"
                      "c2\tp1\tRAFV\ta2.bin\tv2.bin\t8\t8\n"
                      "c3\tp1\tRARV\ta3.bin\tv3.bin\t8\t8\n");
    Manifest m = load_manifest(p.string());
    REQUIRE(m.size() == 4);
    CHECK(m.samples[0].labels == LabelSet{1, 1, 1, 0});
    CHECK(m.samples[1].labels == LabelSet{1, 1, 0, 0});
    CHECK(m.samples[2].labels == LabelSet{1, 0, 1, 0});
    CHECK(m.samples[3].labels == LabelSet{0, 0, 0, 1});

    const fs::path q = dir.path / "copy.tsv";
    save_manifest(m, q.string());
    Manifest m2 = load_manifest(q.string());
    REQUIRE(m2.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(m2.samples[i].id == m.samples[i].id);
        CHECK(m2.samples[i].category == m.samples[i].category);
    }
}

TEST_CASE("unknown category names the offending row") {
    TempDir dir;
    const fs::path p = dir.path / "m.tsv";
    write_file(p, std::string(kHeader) + "c0\tp0\tXXXX\ta\tv\t8\t8\n");
    CHECK_THROWS_WITH_AS(load_manifest(p.string()),
                         doctest::Contains("row 2"), DataError);
}

TEST_CASE("duplicate ids are rejected") {
    TempDir dir;
    const fs::path p = dir.path / "m.tsv";
    write_file(p, std::string(kHeader) + "c0\tp0\tRARV\ta\tv\t8\t8\nc0\tp1\tFAFV\ta\tv\t8\t8\n");
    CHECK_THROWS_WITH_AS(load_manifest(p.string()), doctest::Contains("duplicate id"), DataError);
}

TEST_CASE("bad header and bad frame counts are rejected") {
    TempDir dir;
    const fs::path p = dir.path / "m.tsv";
    write_file(p, "id,identity\n");
    CHECK_THROWS_AS(load_manifest(p.string()), DataError);
    write_file(p, std::string(kHeader) + "c0\tp0\tRARV\ta\tv\t0\t8\n");
    CHECK_THROWS_AS(load_manifest(p.string()), DataError);
}

namespace {

Manifest synthetic_manifest(const std::vector<std::size_t>& counts_per_category) {
    Manifest m;
    int n = 0;
    for (std::size_t ci = 0; ci < 4; ++ci) {
        for (std::size_t i = 0; i < counts_per_category[ci]; ++i) {
            Sample s;
            s.id = "c" + std::to_string(n);
            s.identity = "p" + std::to_string(n % 7);
            s.category = kAllCategories[ci];
            s.labels = labels_from_category(s.category);
            s.frames_audio = s.frames_visual = 4;
            m.samples.push_back(s);
            ++n;
        }
    }
    return m;
}

} // namespace

TEST_CASE("balanced_subset draws a uniform category histogram") {
    Manifest m = synthetic_manifest({500, 900, 900, 600});
    Manifest b = balanced_subset(m, 500, 42);
    REQUIRE(b.size() == 2000);
    for (auto& [cat, count] : b.category_counts()) CHECK(count == 500);

    // deterministic under seed
    Manifest b2 = balanced_subset(m, 500, 42);
    REQUIRE(b2.size() == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.samples[i].id == b2.samples[i].id);

    // different seed picks a different subset (overwhelmingly likely)
    Manifest b3 = balanced_subset(m, 500, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < b.size(); ++i) any_diff |= b.samples[i].id != b3.samples[i].id;
    CHECK(any_diff);
}

TEST_CASE("balanced_subset degenerate and rejection cases") {
    Manifest m = synthetic_manifest({500, 900, 900, 600});
    CHECK(balanced_subset(m, 0, 1).empty());
    CHECK_THROWS_WITH_AS(balanced_subset(m, 501, 1), doctest::Contains("FAFV"), DataError);
}
