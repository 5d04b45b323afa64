#include "hsfuse/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hsfuse::io {

namespace {

void write_u32le(std::ostream& os, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                                    static_cast<unsigned char>((v >> 8) & 0xff),
                                    static_cast<unsigned char>((v >> 16) & 0xff),
                                    static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(bytes), 4);
}

bool read_u32le(std::istream& is, std::uint32_t& v) {
    unsigned char bytes[4];
    if (!is.read(reinterpret_cast<char*>(bytes), 4)) return false;
    v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
        (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
    return true;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream is(path, mode);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return is;
}

}  // namespace

HyperCube read_hsc(const std::string& path) {
    std::ifstream is = open_in(path, std::ios::binary);
    char magic[4];
    if (!is.read(magic, 4) || std::string(magic, 4) != "HSC1")
        throw std::runtime_error(path + ": not an HSC file (bad magic)");
    std::uint32_t bands, height, width;
    if (!read_u32le(is, bands) || !read_u32le(is, height) || !read_u32le(is, width))
        throw std::runtime_error(path + ": truncated HSC header");
    if (bands == 0 || height == 0 || width == 0)
        throw std::runtime_error(path + ": HSC header has zero dimension");

    HyperCube cube(bands, height, width);
    std::vector<unsigned char> payload(cube.size() * 4);
    if (!is.read(reinterpret_cast<char*>(payload.data()),
                 static_cast<std::streamsize>(payload.size())))
        throw std::runtime_error(path + ": truncated HSC payload");
    if (is.peek() != std::char_traits<char>::eof())
        throw std::runtime_error(path + ": HSC payload longer than header promises");
    for (std::size_t i = 0; i < cube.size(); ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(payload[4 * i]) |
                                   (static_cast<std::uint32_t>(payload[4 * i + 1]) << 8) |
                                   (static_cast<std::uint32_t>(payload[4 * i + 2]) << 16) |
                                   (static_cast<std::uint32_t>(payload[4 * i + 3]) << 24);
        const float f = std::bit_cast<float>(bits);
        if (!std::isfinite(f)) throw std::runtime_error(path + ": HSC payload has non-finite value");
        cube.data[i] = static_cast<double>(f);
    }
    return cube;
}

void write_hsc(const std::string& path, const HyperCube& cube) {
    std::ofstream os = open_out(path, std::ios::binary);
    os.write("HSC1", 4);
    write_u32le(os, static_cast<std::uint32_t>(cube.bands));
    write_u32le(os, static_cast<std::uint32_t>(cube.height));
    write_u32le(os, static_cast<std::uint32_t>(cube.width));
    std::vector<unsigned char> payload(cube.size() * 4);
    for (std::size_t i = 0; i < cube.size(); ++i) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(cube.data[i]));
        payload[4 * i] = static_cast<unsigned char>(bits & 0xff);
        payload[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xff);
        payload[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xff);
        payload[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xff);
    }
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

BlurKernel read_krn(const std::string& path) {
    std::ifstream is = open_in(path);
    long long k = 0;
    if (!(is >> k) || k <= 0 || k % 2 == 0)
        throw std::runtime_error(path + ": KRN header must be a positive odd size");
    BlurKernel kernel(static_cast<std::size_t>(k));
    for (double& w : kernel.weights) {
        if (!(is >> w)) throw std::runtime_error(path + ": truncated KRN weights");
        if (!(w >= 0.0 && w <= 1.0))
            throw std::runtime_error(path + ": KRN weight outside [0,1]");
    }
    return kernel;
}

void write_krn(const std::string& path, const BlurKernel& kernel) {
    std::ofstream os = open_out(path);
    os << kernel.size << "\n";
    for (std::size_t i = 0; i < kernel.size; ++i) {
        for (std::size_t j = 0; j < kernel.size; ++j) {
            if (j) os << " ";
            os << format_double(kernel.at(i, j));
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

SrfMatrix read_srf_csv(const std::string& path) {
    std::ifstream is = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v = std::stod(cell, &pos);
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ": ragged SRF rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": empty SRF file");

    SrfMatrix srf(rows.size(), rows.front().size());
    for (std::size_t m = 0; m < srf.rows; ++m) {
        double sum = 0.0;
        for (std::size_t k = 0; k < srf.cols; ++k) {
            const double v = rows[m][k];
            if (v < 0.0) throw std::runtime_error(path + ": negative SRF weight");
            sum += v;
        }
        const double dev = std::fabs(sum - 1.0);
        if (dev > 1e-3)
            throw std::runtime_error(path + ": SRF row " + std::to_string(m) +
                                     " sum deviates from 1 by more than 1e-3");
        if (dev > 1e-6)
            std::cerr << "warning: " << path << ": renormalizing SRF row " << m
                      << " (sum " << format_double(sum) << ")\n";
        for (std::size_t k = 0; k < srf.cols; ++k) srf.at(m, k) = rows[m][k] / sum;
    }
    return srf;
}

void write_srf_csv(const std::string& path, const SrfMatrix& srf) {
    std::ofstream os = open_out(path);
    for (std::size_t m = 0; m < srf.rows; ++m) {
        for (std::size_t k = 0; k < srf.cols; ++k) {
            if (k) os << ",";
            os << format_double(srf.at(m, k));
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_loss_csv(const std::string& path, const std::vector<double>& losses,
                    const std::vector<double>& rates) {
    std::ofstream os = open_out(path);
    os << "iteration,learning_rate,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        os << (i + 1) << "," << format_double(rates[i]) << "," << format_double(losses[i]) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_loss_csv(const std::string& path, const std::vector<double>& losses) {
    std::ofstream os = open_out(path);
    os << "iteration,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        os << (i + 1) << "," << format_double(losses[i]) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_metrics_json(const std::string& path, const metrics::MetricsReport& report) {
    nlohmann::json j;
    j["rmse"] = report.rmse;
    j["psnr_db"] = report.psnr_db;
    j["sam_deg"] = report.sam_deg;
    j["ergas"] = report.ergas;
    j["uiqi"] = report.uiqi;
    j["per_band_psnr"] = report.per_band_psnr;
    j["sorted_per_pixel_sam"] = report.sorted_per_pixel_sam;
    std::ofstream os = open_out(path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_per_band_psnr_csv(const std::string& path, const std::vector<double>& per_band_db) {
    std::ofstream os = open_out(path);
    os << "band,psnr_db\n";
    for (std::size_t i = 0; i < per_band_db.size(); ++i)
        os << i << "," << format_double(per_band_db[i]) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_sorted_sam_csv(const std::string& path, const std::vector<double>& sorted_deg) {
    std::ofstream os = open_out(path);
    os << "rank,sam_deg\n";
    for (std::size_t i = 0; i < sorted_deg.size(); ++i)
        os << i << "," << format_double(sorted_deg[i]) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::string hash_file(const std::string& path) {
    std::ifstream is = open_in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!is) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::json j;
    j["tool"] = manifest.tool;
    j["version"] = manifest.version;
    j["command"] = manifest.command;
    j["argv"] = manifest.argv;
    j["seed"] = manifest.seed;
    j["inputs"] = manifest.input_hashes;
    j["outputs"] = manifest.outputs;
    std::ofstream os = open_out(path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream is = open_in(path);
    nlohmann::json j;
    is >> j;
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.input_hashes = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
}

}  // namespace hsfuse::io
