#include <doctest.h>

#include <dmapx/dataset.hpp>
#include <dmapx/errors.hpp>
#include <dmapx/rng.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

void put_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string iris_path() {
    const char* env = std::getenv("DMAPX_IRIS");
    return env ? std::string(env) : std::string("data/iris.csv");
}

}  // namespace

TEST_CASE("load_points reads an unlabeled csv") {
    auto path = scratch_file("dmapx_points_basic.csv");
    put_file(path, "x0,x1\n0.5,-1.25\n2.0,3.0\n");
    auto lp = dmapx::dataset::load_points(path.string(), false);
    REQUIRE(lp.cloud.size() == 2);
    REQUIRE(lp.cloud.dim() == 2);
    CHECK(lp.cloud.points(0, 0) == 0.5);
    CHECK(lp.cloud.points(0, 1) == -1.25);
    CHECK(lp.cloud.points(1, 0) == 2.0);
    CHECK(!lp.has_labels());
}

TEST_CASE("a single data row is accepted") {
    auto path = scratch_file("dmapx_points_single.csv");
    put_file(path, "x0,x1\n0.0,0.0\n");
    auto lp = dmapx::dataset::load_points(path.string(), false);
    CHECK(lp.cloud.size() == 1);
    CHECK(lp.cloud.dim() == 2);
}

TEST_CASE("labels map to integers in order of first appearance") {
    auto path = scratch_file("dmapx_points_labels.csv");
    put_file(path, "x0,label\n1.0,b\n2.0,a\n3.0,b\n4.0,c\n");
    auto lp = dmapx::dataset::load_points(path.string(), true);
    REQUIRE(lp.cloud.dim() == 1);
    REQUIRE(lp.labels.size() == 4);
    CHECK(lp.labels[0] == 0);  // b
    CHECK(lp.labels[1] == 1);  // a
    CHECK(lp.labels[2] == 0);  // b
    CHECK(lp.labels[3] == 2);  // c
}

TEST_CASE("the bundled iris table loads as 150 points in 3 balanced classes") {
    auto lp = dmapx::dataset::load_points(iris_path(), true);
    REQUIRE(lp.cloud.size() == 150);
    REQUIRE(lp.cloud.dim() == 4);
    REQUIRE(lp.labels.size() == 150);
    int counts[3] = {0, 0, 0};
    for (int lab : lp.labels) {
        REQUIRE(lab >= 0);
        REQUIRE(lab <= 2);
        counts[lab]++;
    }
    CHECK(counts[0] == 50);
    CHECK(counts[1] == 50);
    CHECK(counts[2] == 50);
}

TEST_CASE("bad coordinate reports the offending row") {
    auto path = scratch_file("dmapx_points_bad.csv");
    put_file(path, "x0,x1\n1.0,2.0\n1.0,abc\n");
    CHECK_THROWS_WITH_AS(dmapx::dataset::load_points(path.string(), false),
                         doctest::Contains("row 2"), dmapx::IoError);
}

TEST_CASE("ragged rows are rejected with the row number") {
    auto path = scratch_file("dmapx_points_ragged.csv");
    put_file(path, "x0,x1\n1.0,2.0\n3.0\n");
    CHECK_THROWS_WITH_AS(dmapx::dataset::load_points(path.string(), false),
                         doctest::Contains("row 2"), dmapx::IoError);
}

TEST_CASE("missing file raises an io error") {
    CHECK_THROWS_AS(dmapx::dataset::load_points("/nonexistent/never.csv", false),
                    dmapx::IoError);
}

TEST_CASE("write then load round-trips coordinates bit-exactly") {
    dmapx::rng::CounterRng gen(31);
    dmapx::dataset::PointCloud cloud;
    cloud.points.resize(37, 3);
    for (int i = 0; i < 37; ++i)
        for (int j = 0; j < 3; ++j) cloud.points(i, j) = gen.normal() * 1e3;
    std::vector<int> labels(37);
    for (int i = 0; i < 37; ++i) labels[i] = i % 4;

    auto path = scratch_file("dmapx_roundtrip.csv");
    dmapx::dataset::write_points(path.string(), cloud, &labels);
    auto lp = dmapx::dataset::load_points(path.string(), true);
    REQUIRE(lp.cloud.size() == 37);
    REQUIRE(lp.cloud.dim() == 3);
    for (int i = 0; i < 37; ++i) {
        for (int j = 0; j < 3; ++j)
            CHECK(lp.cloud.points(i, j) == cloud.points(i, j));
        CHECK(lp.labels[i] == labels[i]);
    }
    CHECK(!fs::exists(path.string() + ".tmp"));
}

TEST_CASE("non-finite coordinates are rejected") {
    dmapx::dataset::PointCloud cloud;
    cloud.points.resize(2, 2);
    cloud.points << 1.0, 2.0, std::nan(""), 0.0;
    CHECK_THROWS_AS(dmapx::dataset::validated(cloud.points), dmapx::ContractError);
}

TEST_CASE("subsample keeps everything when n >= size") {
    dmapx::dataset::PointCloud cloud;
    cloud.points.resize(4, 1);
    cloud.points << 1, 2, 3, 4;
    auto sub = dmapx::dataset::subsample(cloud, 10, 0);
    REQUIRE(sub.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(sub.points(i, 0) == cloud.points(i, 0));
}

TEST_CASE("subsample preserves original ordering among the kept rows") {
    dmapx::dataset::PointCloud cloud;
    cloud.points.resize(200, 1);
    for (int i = 0; i < 200; ++i) cloud.points(i, 0) = i;
    auto sub = dmapx::dataset::subsample(cloud, 50, 5);
    REQUIRE(sub.size() == 50);
    for (int i = 1; i < 50; ++i) CHECK(sub.points(i, 0) > sub.points(i - 1, 0));
}

TEST_CASE("subsample is reproducible and seed-sensitive") {
    dmapx::dataset::PointCloud cloud;
    cloud.points.resize(100, 2);
    for (int i = 0; i < 100; ++i) {
        cloud.points(i, 0) = i;
        cloud.points(i, 1) = -i;
    }
    auto a = dmapx::dataset::subsample(cloud, 50, 1);
    auto b = dmapx::dataset::subsample(cloud, 50, 1);
    CHECK(a.points == b.points);
    auto c = dmapx::dataset::subsample(cloud, 50, 2);
    std::set<double> ids_a, ids_c;
    for (int i = 0; i < 50; ++i) {
        ids_a.insert(a.points(i, 0));
        ids_c.insert(c.points(i, 0));
    }
    CHECK(ids_a != ids_c);
}
