// Command-line front end: simulate observations, estimate the degradation,
// fuse, evaluate, self-check gradients, or replay a recorded run.
//
// Exit codes: 0 success, 1 check failure, 2 usage or dimension error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsfuse/autodiff.hpp"
#include "hsfuse/blind.hpp"
#include "hsfuse/degradation.hpp"
#include "hsfuse/interpolation.hpp"
#include "hsfuse/io.hpp"
#include "hsfuse/metrics.hpp"
#include "hsfuse/net.hpp"
#include "hsfuse/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace hsfuse;

namespace {

double parse_snr(const std::string& text) {
    if (text == "inf" || text == "INF" || text == "Inf") return sim::kNoNoise;
    return std::stod(text);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

struct CommonOut {
    std::string out_dir = ".";
};

int run_simulate(const std::string& input, const CommonOut& out, std::size_t ratio,
                 std::size_t kernel_size, double sigma, const std::string& snr_hsi,
                 const std::string& snr_msi, const std::string& srf_file, std::size_t srf_boxes,
                 long long offset, std::uint64_t seed, const std::vector<std::string>& argv) {
    const HyperCube ref = io::read_hsc(input);

    sim::SimConfig cfg;
    cfg.ratio = ratio;
    cfg.kernel_size = kernel_size;
    cfg.sigma = sigma;
    cfg.snr_hsi_db = parse_snr(snr_hsi);
    cfg.snr_msi_db = parse_snr(snr_msi);
    if (offset >= 0) cfg.offset = static_cast<std::size_t>(offset);
    cfg.seed = seed;

    const SrfMatrix srf =
        srf_file.empty() ? sim::make_box_srf(ref.bands, srf_boxes) : io::read_srf_csv(srf_file);
    const auto [lr_hsi, hr_msi] = sim::simulate_wald(ref, cfg, srf);

    fs::create_directories(out.out_dir);
    const std::string lr_path = join_path(out.out_dir, "lr_hsi.hsc");
    const std::string msi_path = join_path(out.out_dir, "hr_msi.hsc");
    const std::string krn_path = join_path(out.out_dir, "kernel.krn");
    const std::string srf_path = join_path(out.out_dir, "srf.csv");
    io::write_hsc(lr_path, lr_hsi);
    io::write_hsc(msi_path, hr_msi);
    io::write_krn(krn_path, sim::make_gaussian_kernel(cfg.kernel_size, cfg.sigma));
    io::write_srf_csv(srf_path, srf);

    io::RunManifest manifest;
    manifest.command = "simulate";
    manifest.argv = argv;
    manifest.seed = seed;
    manifest.input_hashes[input] = io::hash_file(input);
    if (!srf_file.empty()) manifest.input_hashes[srf_file] = io::hash_file(srf_file);
    manifest.outputs = {lr_path, msi_path, krn_path, srf_path};
    io::write_manifest(join_path(out.out_dir, "manifest.json"), manifest);

    std::cout << "wrote " << lr_path << " (" << lr_hsi.bands << "x" << lr_hsi.height << "x"
              << lr_hsi.width << ") and " << msi_path << " (" << hr_msi.bands << "x"
              << hr_msi.height << "x" << hr_msi.width << ")\n";
    return 0;
}

int run_estimate(const std::string& lr_path, const std::string& msi_path, const CommonOut& out,
                 std::size_t ratio, std::size_t kernel_size, std::size_t iters, double rate,
                 long long offset, std::uint64_t seed, const std::vector<std::string>& argv) {
    const HyperCube hsi = io::read_hsc(lr_path);
    const HyperCube msi = io::read_hsc(msi_path);

    blind::BlindConfig cfg;
    cfg.kernel_size = kernel_size;
    cfg.ratio = ratio;
    cfg.iterations = iters;
    cfg.learning_rate = rate;
    if (offset >= 0) cfg.offset = static_cast<std::size_t>(offset);
    cfg.seed = seed;

    const blind::BlindResult result = blind::estimate_degradation(msi, hsi, cfg);

    fs::create_directories(out.out_dir);
    const std::string krn_path = join_path(out.out_dir, "kernel.krn");
    const std::string krn_norm_path = join_path(out.out_dir, "kernel_normalized.krn");
    const std::string srf_path = join_path(out.out_dir, "srf.csv");
    const std::string loss_path = join_path(out.out_dir, "loss.csv");
    io::write_krn(krn_path, result.kernel);
    io::write_krn(krn_norm_path, result.kernel.normalized());
    io::write_srf_csv(srf_path, result.srf);
    io::write_loss_csv(loss_path, result.loss_history);

    io::RunManifest manifest;
    manifest.command = "estimate";
    manifest.argv = argv;
    manifest.seed = seed;
    manifest.input_hashes[lr_path] = io::hash_file(lr_path);
    manifest.input_hashes[msi_path] = io::hash_file(msi_path);
    manifest.outputs = {krn_path, krn_norm_path, srf_path, loss_path};
    io::write_manifest(join_path(out.out_dir, "manifest.json"), manifest);

    std::cout << "estimated kernel (" << result.kernel.size << "x" << result.kernel.size
              << ") and SRF (" << result.srf.rows << "x" << result.srf.cols << "); final loss "
              << result.loss_history.back() << "\n";
    return 0;
}

int run_fuse(const std::string& lr_path, const std::string& msi_path, const CommonOut& out,
             const std::string& krn_path_in, const std::string& srf_path_in, bool blind_mode,
             std::size_t blind_iters, double blind_rate, std::size_t blind_kernel_size,
             const net::FusionConfig& net_cfg, std::uint64_t seed,
             const std::vector<std::string>& argv) {
    const HyperCube hsi = io::read_hsc(lr_path);
    const HyperCube msi = io::read_hsc(msi_path);
    if (hsi.height == 0 || msi.height % hsi.height != 0 ||
        msi.width % (hsi.width == 0 ? 1 : hsi.width) != 0)
        throw std::invalid_argument("fuse: MSI dims are not an integer multiple of the LR-HSI");
    const std::size_t ratio = msi.height / hsi.height;
    if (msi.width != ratio * hsi.width)
        throw std::invalid_argument("fuse: resolution ratio differs between axes");

    fs::create_directories(out.out_dir);
    BlurKernel kernel;
    SrfMatrix srf;
    std::vector<std::string> extra_outputs;
    if (blind_mode) {
        blind::BlindConfig bcfg;
        bcfg.kernel_size = blind_kernel_size;
        bcfg.ratio = ratio;
        bcfg.iterations = blind_iters;
        bcfg.learning_rate = blind_rate;
        bcfg.offset = net_cfg.offset;
        bcfg.seed = seed;
        const blind::BlindResult est = blind::estimate_degradation(msi, hsi, bcfg);
        kernel = est.kernel;
        srf = est.srf;
        const std::string ek = join_path(out.out_dir, "est_kernel.krn");
        const std::string es = join_path(out.out_dir, "est_srf.csv");
        const std::string el = join_path(out.out_dir, "est_loss.csv");
        io::write_krn(ek, kernel);
        io::write_srf_csv(es, srf);
        io::write_loss_csv(el, est.loss_history);
        extra_outputs = {ek, es, el};
    } else {
        kernel = io::read_krn(krn_path_in);
        srf = io::read_srf_csv(srf_path_in);
    }

    net::FusionConfig cfg = net_cfg;
    cfg.seed = seed;
    const net::TrainResult result = net::train(hsi, msi, kernel, srf, cfg);

    const std::string fused_path = join_path(out.out_dir, "fused.hsc");
    const std::string loss_path = join_path(out.out_dir, "loss.csv");
    io::write_hsc(fused_path, result.fused);
    io::write_loss_csv(loss_path, result.loss_history, result.rate_history);

    io::RunManifest manifest;
    manifest.command = "fuse";
    manifest.argv = argv;
    manifest.seed = seed;
    manifest.input_hashes[lr_path] = io::hash_file(lr_path);
    manifest.input_hashes[msi_path] = io::hash_file(msi_path);
    if (!blind_mode) {
        manifest.input_hashes[krn_path_in] = io::hash_file(krn_path_in);
        manifest.input_hashes[srf_path_in] = io::hash_file(srf_path_in);
    }
    manifest.outputs = {fused_path, loss_path};
    for (const auto& p : extra_outputs) manifest.outputs.push_back(p);
    io::write_manifest(join_path(out.out_dir, "manifest.json"), manifest);

    std::cout << "wrote " << fused_path << " (" << result.fused.bands << "x"
              << result.fused.height << "x" << result.fused.width << "); "
              << result.params.parameter_count() << " trainable parameters, final loss "
              << result.loss_history.back() << "\n";
    return 0;
}

int run_evaluate(const std::string& ref_path, const std::string& test_path, std::size_t ratio,
                 const std::string& json_path, const std::string& per_band_csv,
                 const std::string& per_pixel_csv) {
    const HyperCube ref = io::read_hsc(ref_path);
    const HyperCube test = io::read_hsc(test_path);
    const metrics::MetricsReport report = metrics::evaluate(ref, test, ratio);

    auto row = [](const char* name, double v) {
        std::printf("%-8s %.6g\n", name, v);
    };
    row("RMSE", report.rmse);
    row("PSNR", report.psnr_db);
    row("SAM", report.sam_deg);
    row("ERGAS", report.ergas);
    row("UIQI", report.uiqi);

    io::write_metrics_json(json_path, report);
    if (!per_band_csv.empty()) io::write_per_band_psnr_csv(per_band_csv, report.per_band_psnr);
    if (!per_pixel_csv.empty()) io::write_sorted_sam_csv(per_pixel_csv, report.sorted_per_pixel_sam);
    return 0;
}

int run_gradcheck(std::uint64_t seed, bool corrupt) {
    if (corrupt) ad::testhooks::leaky_grad_scale = 1.05;
    const auto cases = run_gradcheck_suite(seed);
    ad::testhooks::leaky_grad_scale = 1.0;
    for (const auto& c : cases)
        std::printf("%-20s max_rel_err=%.3e checked=%zu skipped=%zu %s\n", c.name.c_str(),
                    c.max_rel_err, c.checked, c.skipped, c.pass ? "PASS" : "FAIL");
    return all_pass(cases) ? 0 : 1;
}

int dispatch(std::vector<std::string> args);

int run_replay(const std::string& manifest_path) {
    const io::RunManifest manifest = io::read_manifest(manifest_path);
    std::cout << "replaying " << manifest.command << " from " << manifest_path << "\n";
    return dispatch(manifest.argv);
}

int dispatch(std::vector<std::string> args) {
    CLI::App app{"Hyperspectral/multispectral image fusion toolkit"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Generate LR-HSI and HR-MSI observations from a reference cube");
    std::string sim_input;
    CommonOut sim_out;
    std::size_t sim_ratio = 8, sim_ksize = 15, sim_boxes = 4;
    double sim_sigma = 3.4;
    std::string sim_snr_hsi = "30", sim_snr_msi = "40", sim_srf;
    long long sim_offset = -1;
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("--input", sim_input, "Reference HSC cube")->required();
    sim_cmd->add_option("--out-dir", sim_out.out_dir, "Output directory");
    sim_cmd->add_option("--ratio", sim_ratio, "Spatial downsampling factor");
    sim_cmd->add_option("--kernel-size", sim_ksize, "Gaussian blur size (odd)");
    sim_cmd->add_option("--sigma", sim_sigma, "Gaussian blur standard deviation");
    sim_cmd->add_option("--snr-hsi", sim_snr_hsi, "LR-HSI noise level in dB, or inf");
    sim_cmd->add_option("--snr-msi", sim_snr_msi, "HR-MSI noise level in dB, or inf");
    sim_cmd->add_option("--srf", sim_srf, "SRF CSV file (overrides --srf-boxes)");
    sim_cmd->add_option("--srf-boxes", sim_boxes, "Band-averaging SRF output bands");
    sim_cmd->add_option("--offset", sim_offset, "Decimation phase (default ratio/2)");
    sim_cmd->add_option("--seed", sim_seed, "Noise seed");

    // --- estimate ---
    auto* est_cmd = app.add_subcommand(
        "estimate", "Blind-estimate the blur kernel and SRF from the two observations");
    std::string est_lr, est_msi;
    CommonOut est_out;
    std::size_t est_ratio = 0, est_ksize = 15, est_iters = 5000;
    double est_rate = 5e-5;
    long long est_offset = -1;
    std::uint64_t est_seed = 0;
    est_cmd->add_option("--lr-hsi", est_lr, "LR-HSI HSC cube")->required();
    est_cmd->add_option("--msi", est_msi, "HR-MSI HSC cube")->required();
    est_cmd->add_option("--ratio", est_ratio, "Spatial resolution ratio")->required();
    est_cmd->add_option("--out-dir", est_out.out_dir, "Output directory");
    est_cmd->add_option("--kernel-size", est_ksize, "Kernel size to estimate (odd)");
    est_cmd->add_option("--iters", est_iters, "Optimizer iterations");
    est_cmd->add_option("--rate", est_rate, "Learning rate");
    est_cmd->add_option("--offset", est_offset, "Decimation phase (default ratio/2)");
    est_cmd->add_option("--seed", est_seed, "Seed");

    // --- fuse ---
    auto* fuse_cmd =
        app.add_subcommand("fuse", "Train the fusion autoencoder and emit the fused cube");
    std::string fuse_lr, fuse_msi, fuse_krn, fuse_srf;
    CommonOut fuse_out;
    bool fuse_blind = false;
    std::size_t fuse_blind_iters = 5000, fuse_blind_ksize = 15;
    double fuse_blind_rate = 5e-5;
    net::FusionConfig fuse_cfg;
    long long fuse_offset = -1;
    std::uint64_t fuse_seed = 0;
    fuse_cmd->add_option("--lr-hsi", fuse_lr, "LR-HSI HSC cube")->required();
    fuse_cmd->add_option("--msi", fuse_msi, "HR-MSI HSC cube")->required();
    fuse_cmd->add_option("--out-dir", fuse_out.out_dir, "Output directory");
    fuse_cmd->add_option("--kernel", fuse_krn, "Blur kernel KRN file");
    fuse_cmd->add_option("--srf", fuse_srf, "SRF CSV file");
    fuse_cmd->add_flag("--blind", fuse_blind, "Estimate kernel and SRF first");
    fuse_cmd->add_option("--blind-iters", fuse_blind_iters, "Blind estimation iterations");
    fuse_cmd->add_option("--blind-rate", fuse_blind_rate, "Blind estimation learning rate");
    fuse_cmd->add_option("--blind-kernel-size", fuse_blind_ksize, "Blind kernel size (odd)");
    fuse_cmd->add_option("--rank", fuse_cfg.rank, "Latent rank J");
    fuse_cmd->add_option("--stages", fuse_cfg.stages, "Encoder stages K");
    fuse_cmd->add_option("--slope", fuse_cfg.leaky_slope, "Leaky ReLU slope");
    fuse_cmd->add_option("--iters", fuse_cfg.iterations, "Training iterations");
    fuse_cmd->add_option("--batch", fuse_cfg.batch, "Patches per iteration");
    fuse_cmd->add_option("--patch", fuse_cfg.patch, "Patch side in HR pixels");
    fuse_cmd->add_option("--stride", fuse_cfg.stride, "Patch stride in HR pixels");
    fuse_cmd->add_option("--rate", fuse_cfg.learning_rate, "Initial learning rate");
    fuse_cmd->add_option("--decay-delay", fuse_cfg.decay_delay, "Iterations before decay");
    fuse_cmd->add_option("--decay-span", fuse_cfg.decay_span, "Iterations from decay start to 0");
    fuse_cmd->add_option("--offset", fuse_offset, "Decimation phase (default ratio/2)");
    fuse_cmd->add_option("--seed", fuse_seed, "Seed");

    // --- evaluate ---
    auto* eval_cmd = app.add_subcommand("evaluate", "Quality metrics of a fused cube");
    std::string eval_ref, eval_test, eval_json = "report.json", eval_band_csv, eval_pixel_csv;
    std::size_t eval_ratio = 0;
    eval_cmd->add_option("--ref", eval_ref, "Reference HSC cube")->required();
    eval_cmd->add_option("--test", eval_test, "Cube under test")->required();
    eval_cmd->add_option("--ratio", eval_ratio, "Resolution ratio (for ERGAS)")->required();
    eval_cmd->add_option("--json", eval_json, "JSON report path");
    eval_cmd->add_option("--per-band-csv", eval_band_csv, "Per-band PSNR CSV path");
    eval_cmd->add_option("--per-pixel-sam-csv", eval_pixel_csv, "Sorted per-pixel SAM CSV path");

    // --- gradcheck ---
    auto* grad_cmd =
        app.add_subcommand("gradcheck", "Finite-difference verification of the gradients");
    std::uint64_t grad_seed = 0;
    bool grad_corrupt = false;
    grad_cmd->add_option("--seed", grad_seed, "Seed");
    grad_cmd->add_flag("--corrupt", grad_corrupt, "Deliberately corrupt a backward rule")
        ->group("");  // test hook, hidden from help

    // --- replay ---
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded manifest");
    std::string replay_manifest;
    replay_cmd->add_option("manifest", replay_manifest, "manifest.json path")->required();

    std::vector<const char*> argv;
    argv.push_back("hsfuse");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (sim_cmd->parsed())
        return run_simulate(sim_input, sim_out, sim_ratio, sim_ksize, sim_sigma, sim_snr_hsi,
                            sim_snr_msi, sim_srf, sim_boxes, sim_offset, sim_seed, args);
    if (est_cmd->parsed())
        return run_estimate(est_lr, est_msi, est_out, est_ratio, est_ksize, est_iters, est_rate,
                            est_offset, est_seed, args);
    if (fuse_cmd->parsed()) {
        if (!fuse_blind && (fuse_krn.empty() || fuse_srf.empty()))
            throw std::invalid_argument("fuse: provide --kernel and --srf, or pass --blind");
        if (fuse_offset >= 0) fuse_cfg.offset = static_cast<std::size_t>(fuse_offset);
        return run_fuse(fuse_lr, fuse_msi, fuse_out, fuse_krn, fuse_srf, fuse_blind,
                        fuse_blind_iters, fuse_blind_rate, fuse_blind_ksize, fuse_cfg, fuse_seed,
                        args);
    }
    if (eval_cmd->parsed())
        return run_evaluate(eval_ref, eval_test, eval_ratio, eval_json, eval_band_csv,
                            eval_pixel_csv);
    if (grad_cmd->parsed()) return run_gradcheck(grad_seed, grad_corrupt);
    if (replay_cmd->parsed()) return run_replay(replay_manifest);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return dispatch(std::move(args));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
