#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "hsfuse/degradation.hpp"
#include "hsfuse/io.hpp"

using namespace hsfuse;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("hsfuse_io_test_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

HyperCube random_cube(std::size_t b, std::size_t h, std::size_t w, std::uint64_t seed) {
    HyperCube cube(b, h, w);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (double& v : cube.data) v = dist(rng);
    return cube;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("HSC cubes round-trip bitwise at float32 precision") {
    const fs::path dir = temp_dir();
    const HyperCube cube = random_cube(3, 5, 7, 1);
    const std::string path = (dir / "cube.hsc").string();
    io::write_hsc(path, cube);

    const HyperCube loaded = io::read_hsc(path);
    CHECK(loaded.bands == 3);
    CHECK(loaded.height == 5);
    CHECK(loaded.width == 7);
    for (std::size_t i = 0; i < cube.size(); ++i)
        CHECK(loaded.data[i] == static_cast<double>(static_cast<float>(cube.data[i])));

    // writing the loaded cube again reproduces the identical file
    const std::string path2 = (dir / "cube2.hsc").string();
    io::write_hsc(path2, loaded);
    CHECK(read_bytes(path) == read_bytes(path2));
}

TEST_CASE("HSC loader rejects bad magic and truncation with distinct messages") {
    const fs::path dir = temp_dir();
    const std::string good = (dir / "good.hsc").string();
    io::write_hsc(good, random_cube(2, 4, 4, 2));

    const std::string bad_magic = (dir / "bad_magic.hsc").string();
    {
        std::string bytes = read_bytes(good);
        bytes[0] = 'X';
        std::ofstream os(bad_magic, std::ios::binary);
        os << bytes;
    }
    CHECK_THROWS_WITH_AS((void)io::read_hsc(bad_magic),
                         doctest::Contains("bad magic"), std::runtime_error);

    const std::string truncated = (dir / "truncated.hsc").string();
    {
        std::string bytes = read_bytes(good);
        bytes.resize(bytes.size() - 10);
        std::ofstream os(truncated, std::ios::binary);
        os << bytes;
    }
    CHECK_THROWS_WITH_AS((void)io::read_hsc(truncated),
                         doctest::Contains("truncated HSC payload"), std::runtime_error);

    const std::string oversized = (dir / "oversized.hsc").string();
    {
        std::string bytes = read_bytes(good) + "zzzz";
        std::ofstream os(oversized, std::ios::binary);
        os << bytes;
    }
    CHECK_THROWS_AS((void)io::read_hsc(oversized), std::runtime_error);
}

TEST_CASE("KRN kernels round-trip exactly") {
    const fs::path dir = temp_dir();
    const BlurKernel kernel = sim::make_gaussian_kernel(7, 1.9);
    const std::string path = (dir / "kernel.krn").string();
    io::write_krn(path, kernel);
    const BlurKernel loaded = io::read_krn(path);
    CHECK(loaded.size == 7);
    CHECK(loaded.weights == kernel.weights);  // %.17g preserves doubles

    const std::string bad = (dir / "even.krn").string();
    {
        std::ofstream os(bad);
        os << "4\n1 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n";
    }
    CHECK_THROWS_AS((void)io::read_krn(bad), std::runtime_error);
}

TEST_CASE("SRF CSV loader renormalizes small deviations and rejects large ones") {
    const fs::path dir = temp_dir();
    const SrfMatrix srf = sim::make_box_srf(8, 3);
    const std::string path = (dir / "srf.csv").string();
    io::write_srf_csv(path, srf);
    const SrfMatrix loaded = io::read_srf_csv(path);
    CHECK(loaded.rows == 3);
    CHECK(loaded.cols == 8);
    CHECK(loaded.weights == srf.weights);

    const std::string slightly_off = (dir / "off.csv").string();
    {
        std::ofstream os(slightly_off);
        os << "0.50005,0.50005,0,0\n0,0,0.5,0.5\n";  // off by 1e-4: renormalized
    }
    const SrfMatrix fixed = io::read_srf_csv(slightly_off);
    CHECK(fixed.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) sum += fixed.at(0, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    const std::string way_off = (dir / "way_off.csv").string();
    {
        std::ofstream os(way_off);
        os << "0.7,0.7,0,0\n0,0,0.5,0.5\n";  // off by 0.4: error
    }
    CHECK_THROWS_AS((void)io::read_srf_csv(way_off), std::runtime_error);

    const std::string negative = (dir / "negative.csv").string();
    {
        std::ofstream os(negative);
        os << "1.2,-0.2,0,0\n0,0,0.5,0.5\n";
    }
    CHECK_THROWS_AS((void)io::read_srf_csv(negative), std::runtime_error);
}

TEST_CASE("manifests round-trip") {
    const fs::path dir = temp_dir();
    const std::string input = (dir / "in.hsc").string();
    io::write_hsc(input, random_cube(1, 2, 2, 3));

    io::RunManifest m;
    m.command = "simulate";
    m.argv = {"simulate", "--input", input, "--seed", "7"};
    m.seed = 7;
    m.input_hashes[input] = io::hash_file(input);
    m.outputs = {"a.hsc", "b.hsc"};
    const std::string path = (dir / "manifest.json").string();
    io::write_manifest(path, m);

    const io::RunManifest loaded = io::read_manifest(path);
    CHECK(loaded.tool == io::kToolName);
    CHECK(loaded.version == io::kToolVersion);
    CHECK(loaded.command == "simulate");
    CHECK(loaded.argv == m.argv);
    CHECK(loaded.seed == 7);
    CHECK(loaded.input_hashes == m.input_hashes);
    CHECK(loaded.outputs == m.outputs);

    // the digest is content-addressed
    const std::string copy = (dir / "copy.hsc").string();
    fs::copy_file(input, copy);
    CHECK(io::hash_file(copy) == m.input_hashes[input]);
}

TEST_CASE("loss CSV emitters write one row per iteration") {
    const fs::path dir = temp_dir();
    const std::string path = (dir / "loss.csv").string();
    io::write_loss_csv(path, {3.0, 2.0, 1.5}, {0.1, 0.1, 0.05});
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "iteration,learning_rate,loss");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}
