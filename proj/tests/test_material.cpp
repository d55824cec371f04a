#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "svbrdf/material/crop.hpp"
#include "svbrdf/material/image.hpp"
#include "svbrdf/material/maps.hpp"
#include "svbrdf/material/toy.hpp"
#include "svbrdf/rng.hpp"

#include <cstring>
#include <filesystem>

using namespace svbrdf;
using namespace svbrdf::material;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("svbrdfgen_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("png round trip within quantization") {
    MaterialMaps m = generate_toy_material(42, ToyKind::blobs, 32);
    auto dir = temp_dir("roundtrip");
    save_material(m, dir.string());
    MaterialMaps r = load_material(dir.string());
    for (int i = 0; i < kNumMaps; ++i) {
        const Image& a = m.map(i);
        const Image& b = r.map(i);
        REQUIRE(a.same_shape(b));
        double worst = 0.0;
        for (size_t j = 0; j < a.v.size(); ++j) worst = std::max(worst, std::fabs(a.v[j] - b.v[j]));
        if (i == 1) {
            // normals are renormalized on load on top of quantization
            CHECK(worst < 2.0 / 255.0);
        } else {
            CHECK(worst <= 1.0 / 255.0 + 1e-9);
        }
    }
}

TEST_CASE("flat normal pixel decodes to +z") {
    Image n(1, 1, 3);
    n.at(0, 0, 0) = 128.0 / 255.0;
    n.at(0, 0, 1) = 128.0 / 255.0;
    n.at(0, 0, 2) = 255.0 / 255.0;
    auto d = decode_normal(n, 0, 0);
    CHECK(std::fabs(d[0]) < 0.01);
    CHECK(std::fabs(d[1]) < 0.01);
    CHECK(d[2] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("missing map reported by name") {
    MaterialMaps m = generate_toy_material(1, ToyKind::checker, 16);
    auto dir = temp_dir("missing");
    save_material(m, dir.string());
    fs::remove(dir / "specular.png");
    try {
        load_material(dir.string());
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()) == "missing map: specular");
    }
}

TEST_CASE("size and squareness problems are distinct errors") {
    MaterialMaps m = generate_toy_material(2, ToyKind::cells, 16);
    auto dir = temp_dir("badsize");
    save_material(m, dir.string());
    // overwrite roughness with a different size
    write_png((dir / "roughness.png").string(), Image(32, 32, 1, 0.5));
    CHECK_THROWS_WITH(load_material(dir.string()), "map size mismatch: roughness");

    write_png((dir / "roughness.png").string(), Image(16, 8, 1, 0.5));
    CHECK_THROWS_WITH(load_material(dir.string()), "map is not square: roughness");

    auto dir2 = temp_dir("badpow2");
    save_material(m, dir2.string());
    write_png((dir2 / "diffuse.png").string(), Image(24, 24, 3, 0.5));
    CHECK_THROWS_WITH(load_material(dir2.string()), "map size is not a power of two: diffuse");
}

TEST_CASE("write rounding: 0.5 -> byte 128, zeros -> black") {
    auto dir = temp_dir("round");
    Image half(4, 4, 3, 0.5);
    write_png((dir / "half.png").string(), half);
    Image back = read_png((dir / "half.png").string());
    CHECK(back.at(0, 0, 0) == doctest::Approx(128.0 / 255.0));

    Image zero(4, 4, 3, 0.0);
    write_png((dir / "zero.png").string(), zero);
    Image zback = read_png((dir / "zero.png").string());
    for (double v : zback.v) CHECK(v == 0.0);
}

TEST_CASE("toy materials are deterministic and validated") {
    for (ToyKind kind : {ToyKind::checker, ToyKind::stripes, ToyKind::blobs, ToyKind::cells}) {
        MaterialMaps a = generate_toy_material(7, kind, 32);
        MaterialMaps b = generate_toy_material(7, kind, 32);
        for (int i = 0; i < kNumMaps; ++i) {
            CHECK(std::memcmp(a.map(i).v.data(), b.map(i).v.data(),
                              a.map(i).v.size() * sizeof(double)) == 0);
        }
        CHECK_NOTHROW(a.validate());
        MaterialMaps c = generate_toy_material(8, kind, 32);
        CHECK(rmse(a.diffuse, c.diffuse) > 0.0);
    }
    CHECK_THROWS_AS(toy_kind_from_string("granite"), std::invalid_argument);
}

TEST_CASE("checker diffuse has exactly two distinct colors") {
    MaterialMaps m = generate_toy_material(3, ToyKind::checker, 32);
    std::vector<std::array<double, 3>> colors;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            std::array<double, 3> c{m.diffuse.at(y, x, 0), m.diffuse.at(y, x, 1), m.diffuse.at(y, x, 2)};
            bool found = false;
            for (const auto& k : colors) found = found || k == c;
            if (!found) colors.push_back(c);
        }
    }
    CHECK(colors.size() == 2);
}

TEST_CASE("constant height gives flat normals") {
    std::vector<double> flat(32 * 32, 0.37);
    Image n = normals_from_height(flat, 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            auto d = decode_normal(n, y, x);
            CHECK(std::fabs(d[0]) < 1e-9);
            CHECK(std::fabs(d[1]) < 1e-9);
            CHECK(d[2] == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("crop pyramid counts and reassembly") {
    MaterialMaps m = generate_toy_material(5, ToyKind::stripes, 64);
    CropPyramid pyr = crop_pyramid(m, 2);
    REQUIRE(pyr.levels.size() == 3);
    CHECK(pyr.levels[0].crops.size() == 1);
    CHECK(pyr.levels[1].crops.size() == 4);
    CHECK(pyr.levels[2].crops.size() == 16);
    CHECK(pyr.total_crops() == 21);
    for (const auto& lvl : pyr.levels) {
        for (const auto& c : lvl.crops) CHECK(c.resolution() == 64);
    }

    CropPyramid flat = crop_pyramid(m, 0);
    CHECK(flat.total_crops() == 1);
    CHECK(rmse(flat.levels[0].crops[0].diffuse, m.diffuse) == 0.0);

    // raw level-1 tiles aggregate back to the source exactly
    auto tiles = tile_crops(m, 1);
    REQUIRE(tiles.size() == 4);
    Image re(64, 64, 3);
    for (int t = 0; t < 4; ++t) {
        const int oy = (t / 2) * 32, ox = (t % 2) * 32;
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x)
                for (int c = 0; c < 3; ++c) re.at(oy + y, ox + x, c) = tiles[t].diffuse.at(y, x, c);
    }
    CHECK(std::memcmp(re.v.data(), m.diffuse.v.data(), re.v.size() * sizeof(double)) == 0);

    CHECK_THROWS_AS(crop_pyramid(m, 3), std::invalid_argument); // 8 px crops too small
}

TEST_CASE("rmse basics and metric properties") {
    MaterialMaps m = generate_toy_material(9, ToyKind::blobs, 16);
    CHECK(rmse(m.diffuse, m.diffuse) == 0.0);

    Image a = m.diffuse;
    Image b = a;
    for (double& v : b.v) v += 0.1;
    CHECK(rmse(a, b) == doctest::Approx(0.1));

    Image z(8, 8, 3, 0.0), o(8, 8, 3, 1.0);
    CHECK(rmse(z, o) == doctest::Approx(1.0));

    CHECK_THROWS_AS(rmse(z, Image(4, 4, 3)), std::invalid_argument);

    Rng rng(13);
    for (int t = 0; t < 20; ++t) {
        Image x(6, 6, 3), y(6, 6, 3), w(6, 6, 3);
        for (auto* img : {&x, &y, &w})
            for (double& v : img->v) v = rng.uniform();
        CHECK(rmse(x, y) == doctest::Approx(rmse(y, x)));
        CHECK(rmse(x, w) <= rmse(x, y) + rmse(y, w) + 1e-12);
        CHECK(rmse(x, x) == 0.0);
    }
}
