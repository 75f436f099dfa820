#include "irtrack/frame.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "irtrack/jsonio.hpp"
#include "json.hpp"

namespace irtrack {

using nlohmann::json;

namespace {

std::string manifest_line(const SensorFrame& f) {
    const auto& k = f.intrinsics;
    std::string s = "{\"ahf\":1,\"width\":" + std::to_string(f.width) +
                    ",\"height\":" + std::to_string(f.height) + ",\"timestamp\":" + fmt9(f.timestamp) +
                    ",\"endianness\":\"little\",\"intrinsics\":{\"fx\":" + fmt9(k.fx) + ",\"fy\":" + fmt9(k.fy) +
                    ",\"sx\":" + fmt9(k.sx) + ",\"sy\":" + fmt9(k.sy) + ",\"cx\":" + fmt9(k.cx) +
                    ",\"cy\":" + fmt9(k.cy) + ",\"width\":" + std::to_string(k.width) +
                    ",\"height\":" + std::to_string(k.height) + "}}";
    return s;
}

void write_u16_le(std::ofstream& out, const uint16_t* data, size_t n) {
    // file format is little-endian; so are all platforms we build for
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 2));
}

}  // namespace

void write_ahf(const std::filesystem::path& path, const SensorFrame& frame) {
    if (frame.width <= 0 || frame.height <= 0 ||
        frame.reflectivity.size() != static_cast<size_t>(frame.width) * frame.height ||
        frame.depth.size() != frame.reflectivity.size())
        throw io_error("write_ahf: inconsistent frame dimensions");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("write_ahf: cannot open " + path.string());
    const std::string manifest = manifest_line(frame) + "\n";
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    write_u16_le(out, frame.reflectivity.data(), frame.reflectivity.size());

    std::vector<uint16_t> depth_mm(frame.depth.size());
    for (size_t i = 0; i < frame.depth.size(); ++i) {
        const double d = std::clamp(static_cast<double>(frame.depth[i]), 0.0, 65535.0);
        depth_mm[i] = static_cast<uint16_t>(std::llround(d));
    }
    write_u16_le(out, depth_mm.data(), depth_mm.size());
    if (!out) throw io_error("write_ahf: short write to " + path.string());
}

SensorFrame read_ahf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read_ahf: cannot open " + path.string());
    std::string manifest;
    if (!std::getline(in, manifest)) throw io_error("read_ahf: missing manifest line in " + path.string());

    json m;
    try {
        m = json::parse(manifest);
    } catch (const json::exception& e) {
        throw io_error("read_ahf: bad manifest in " + path.string() + ": " + e.what());
    }

    SensorFrame f;
    try {
        f.width = m.at("width").get<int>();
        f.height = m.at("height").get<int>();
        f.timestamp = m.at("timestamp").get<double>();
        const auto& k = m.at("intrinsics");
        f.intrinsics.fx = k.at("fx").get<double>();
        f.intrinsics.fy = k.at("fy").get<double>();
        f.intrinsics.sx = k.at("sx").get<double>();
        f.intrinsics.sy = k.at("sy").get<double>();
        f.intrinsics.cx = k.at("cx").get<double>();
        f.intrinsics.cy = k.at("cy").get<double>();
        f.intrinsics.width = k.at("width").get<int>();
        f.intrinsics.height = k.at("height").get<int>();
    } catch (const json::exception& e) {
        throw io_error("read_ahf: manifest field missing in " + path.string() + ": " + e.what());
    }
    if (m.value("endianness", "little") != "little")
        throw io_error("read_ahf: unsupported endianness in " + path.string());
    if (f.width <= 0 || f.height <= 0) throw io_error("read_ahf: bad dimensions in " + path.string());
    try {
        f.intrinsics.validate();
    } catch (const std::invalid_argument& e) {
        throw io_error("read_ahf: bad intrinsics in " + path.string() + ": " + e.what());
    }

    const size_t n = static_cast<size_t>(f.width) * f.height;
    std::vector<uint16_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
    if (!in) throw io_error("read_ahf: truncated reflectivity in " + path.string());
    f.reflectivity = raw;

    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
    if (!in) throw io_error("read_ahf: truncated depth in " + path.string());
    f.depth.resize(n);
    for (size_t i = 0; i < n; ++i) f.depth[i] = raw[i];
    return f;
}

std::vector<std::filesystem::path> list_ahf(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) throw io_error("list_ahf: not a directory: " + dir.string());
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ahf") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace irtrack
