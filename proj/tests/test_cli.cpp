#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "hsfuse/degradation.hpp"
#include "hsfuse/io.hpp"

using namespace hsfuse;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("hsfuse_cli_test_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HSFUSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

HyperCube smooth_cube(std::size_t b, std::size_t h, std::size_t w, std::uint64_t seed) {
    HyperCube cube(b, h, w);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (double& v : cube.data) v = dist(rng);
    return sim::apply_psf(cube, sim::make_gaussian_kernel(5, 1.5));
}

std::string bytes_of(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("simulate writes shaped observations plus ground truth and manifest") {
    const fs::path dir = work_dir();
    const std::string input = (dir / "ref.hsc").string();
    io::write_hsc(input, smooth_cube(8, 64, 64, 1));

    const std::string out = (dir / "sim").string();
    REQUIRE(run_cli("simulate --input " + input + " --out-dir " + out + " --seed 5") == 0);

    const HyperCube lr = io::read_hsc(out + "/lr_hsi.hsc");
    CHECK(lr.bands == 8);
    CHECK(lr.height == 8);
    CHECK(lr.width == 8);
    const HyperCube msi = io::read_hsc(out + "/hr_msi.hsc");
    CHECK(msi.bands == 4);
    CHECK(msi.height == 64);
    CHECK(msi.width == 64);
    CHECK(fs::exists(out + "/kernel.krn"));
    CHECK(fs::exists(out + "/srf.csv"));
    CHECK(fs::exists(out + "/manifest.json"));

    // dims not divisible by the ratio exit with code 2
    const std::string odd_input = (dir / "odd.hsc").string();
    io::write_hsc(odd_input, smooth_cube(2, 60, 60, 2));
    CHECK(run_cli("simulate --input " + odd_input + " --out-dir " + out) == 2);
}

TEST_CASE("noiseless simulate ignores the seed") {
    const fs::path dir = work_dir();
    const std::string input = (dir / "ref.hsc").string();
    io::write_hsc(input, smooth_cube(4, 32, 32, 3));

    const std::string a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(run_cli("simulate --input " + input + " --ratio 4 --kernel-size 5 --sigma 1.2 " +
                    "--snr-hsi inf --snr-msi inf --out-dir " + a + " --seed 1") == 0);
    REQUIRE(run_cli("simulate --input " + input + " --ratio 4 --kernel-size 5 --sigma 1.2 " +
                    "--snr-hsi inf --snr-msi inf --out-dir " + b + " --seed 2") == 0);
    CHECK(bytes_of(a + "/lr_hsi.hsc") == bytes_of(b + "/lr_hsi.hsc"));
    CHECK(bytes_of(a + "/hr_msi.hsc") == bytes_of(b + "/hr_msi.hsc"));
}

TEST_CASE("estimate emits feasible files and replays bitwise") {
    const fs::path dir = work_dir();
    const std::string input = (dir / "ref.hsc").string();
    io::write_hsc(input, smooth_cube(8, 32, 32, 4));
    const std::string sim_out = (dir / "sim").string();
    REQUIRE(run_cli("simulate --input " + input +
                    " --ratio 4 --kernel-size 5 --sigma 1.3 --snr-hsi inf --snr-msi inf "
                    "--srf-boxes 3 --out-dir " +
                    sim_out) == 0);

    const std::string est_out = (dir / "est").string();
    REQUIRE(run_cli("estimate --lr-hsi " + sim_out + "/lr_hsi.hsc --msi " + sim_out +
                    "/hr_msi.hsc --ratio 4 --kernel-size 5 --iters 40 --out-dir " + est_out) ==
            0);

    const SrfMatrix srf = io::read_srf_csv(est_out + "/srf.csv");
    for (std::size_t m = 0; m < srf.rows; ++m) {
        double sum = 0.0;
        for (std::size_t k = 0; k < srf.cols; ++k) sum += srf.at(m, k);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    const BlurKernel kernel = io::read_krn(est_out + "/kernel.krn");
    CHECK(kernel.size == 5);
    CHECK(fs::exists(est_out + "/kernel_normalized.krn"));
    CHECK(fs::exists(est_out + "/loss.csv"));

    // replaying the manifest reproduces the outputs bitwise
    const std::string before = bytes_of(est_out + "/kernel.krn");
    const std::string before_srf = bytes_of(est_out + "/srf.csv");
    REQUIRE(run_cli("replay " + est_out + "/manifest.json") == 0);
    CHECK(bytes_of(est_out + "/kernel.krn") == before);
    CHECK(bytes_of(est_out + "/srf.csv") == before_srf);

    // dimension inconsistency exits with 2
    CHECK(run_cli("estimate --lr-hsi " + sim_out + "/lr_hsi.hsc --msi " + sim_out +
                  "/hr_msi.hsc --ratio 8 --out-dir " + est_out) == 2);
}

TEST_CASE("fuse trains, clamps, and needs a degradation spec") {
    const fs::path dir = work_dir();
    const std::string input = (dir / "ref.hsc").string();
    io::write_hsc(input, smooth_cube(6, 32, 32, 5));
    const std::string sim_out = (dir / "sim").string();
    REQUIRE(run_cli("simulate --input " + input +
                    " --ratio 4 --kernel-size 5 --sigma 1.3 --snr-hsi inf --snr-msi inf "
                    "--srf-boxes 3 --out-dir " +
                    sim_out) == 0);

    const std::string fuse_out = (dir / "fuse").string();
    REQUIRE(run_cli("fuse --lr-hsi " + sim_out + "/lr_hsi.hsc --msi " + sim_out +
                    "/hr_msi.hsc --kernel " + sim_out + "/kernel.krn --srf " + sim_out +
                    "/srf.csv --rank 4 --stages 2 --iters 8 --batch 2 --patch 16 --stride 8 "
                    "--out-dir " +
                    fuse_out) == 0);

    const HyperCube fused = io::read_hsc(fuse_out + "/fused.hsc");
    CHECK(fused.bands == 6);
    CHECK(fused.height == 32);
    CHECK(fused.width == 32);
    for (double v : fused.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(fs::exists(fuse_out + "/loss.csv"));
    CHECK(fs::exists(fuse_out + "/manifest.json"));

    // no kernel/SRF and no --blind: usage error
    CHECK(run_cli("fuse --lr-hsi " + sim_out + "/lr_hsi.hsc --msi " + sim_out +
                  "/hr_msi.hsc --out-dir " + fuse_out) == 2);
}

TEST_CASE("evaluate prints the best column for identical cubes and writes reports") {
    const fs::path dir = work_dir();
    const std::string a = (dir / "a.hsc").string();
    io::write_hsc(a, smooth_cube(3, 16, 16, 6));

    const std::string json = (dir / "report.json").string();
    const std::string band_csv = (dir / "band.csv").string();
    const std::string sam_csv = (dir / "sam.csv").string();
    REQUIRE(run_cli("evaluate --ref " + a + " --test " + a + " --ratio 4 --json " + json +
                    " --per-band-csv " + band_csv + " --per-pixel-sam-csv " + sam_csv) == 0);

    std::ifstream is(json);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"rmse\": 0.0") != std::string::npos);
    CHECK(text.find("\"uiqi\": 1.0") != std::string::npos);

    // CSV row counts: bands and pixels
    auto count_rows = [](const std::string& path) {
        std::ifstream f(path);
        std::string line;
        int rows = -1;  // skip header
        while (std::getline(f, line))
            if (!line.empty()) ++rows;
        return rows;
    };
    CHECK(count_rows(band_csv) == 3);
    CHECK(count_rows(sam_csv) == 16 * 16);

    const std::string b = (dir / "b.hsc").string();
    io::write_hsc(b, smooth_cube(3, 8, 8, 7));
    CHECK(run_cli("evaluate --ref " + a + " --test " + b + " --ratio 4") == 2);
}

TEST_CASE("gradcheck passes normally and fails under the corrupt hook") {
    CHECK(run_cli("gradcheck --seed 0") == 0);
    CHECK(run_cli("gradcheck --seed 0 --corrupt") == 1);
}

TEST_CASE("unknown flags exit with the usage code") {
    CHECK(run_cli("simulate --no-such-flag") == 2);
    CHECK(run_cli("") == 2);
}
