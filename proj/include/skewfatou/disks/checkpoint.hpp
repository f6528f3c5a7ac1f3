#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/big_complex.hpp"

namespace skewfatou {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex_scalar(const BigComplex& z) { return z.real().to_hex() + " " + z.imag().to_hex(); }

inline BigComplex parse_hex_scalar(const std::string& text, Precision bits) {
    std::istringstream in(text);
    std::string re, im;
    if (!(in >> re >> im)) throw Error(ErrorKind::Parse, "malformed hex scalar pair");
    return {BigFloat::parse(re, bits, 16), BigFloat::parse(im, bits, 16)};
}

/// Orbit state saved at a passage step: z - x0 and the vertical derivative.
struct Checkpoint {
    std::uint64_t key = 0;
    Precision precision = 0;
    std::uint64_t step = 0;
    BigComplex offset;
    BigComplex derivative;
};

/// Append-only store of checkpoint records, one file per key.
///
/// Record layout (little-endian): 8-byte magic "SKFCKPT1", u32 version,
/// u64 key, u32 precision, u64 step, u32 payload length, then the payload:
/// two lines of hex scalar pairs (offset, derivative).
class CheckpointStore {
public:
    static constexpr std::uint32_t kVersion = 1;

    explicit CheckpointStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create checkpoint directory " + dir_.string());
    }

    const std::filesystem::path& directory() const noexcept { return dir_; }

    void append(const Checkpoint& c) {
        const std::string payload = hex_scalar(c.offset) + "\n" + hex_scalar(c.derivative) + "\n";
        const std::lock_guard<std::mutex> lock(mutex_);
        std::ofstream out(path_for(c.key), std::ios::binary | std::ios::app);
        if (!out) throw Error(ErrorKind::Io, "cannot open checkpoint file for append");
        out.write(kMagic, 8);
        put(out, kVersion);
        put(out, c.key);
        put(out, static_cast<std::uint32_t>(c.precision));
        put(out, c.step);
        put(out, static_cast<std::uint32_t>(payload.size()));
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out) throw Error(ErrorKind::Io, "checkpoint write failed");
    }

    /// All records for `key`, in file order.
    std::vector<Checkpoint> load(std::uint64_t key) const {
        const std::lock_guard<std::mutex> lock(mutex_);
        std::vector<Checkpoint> out;
        std::ifstream in(path_for(key), std::ios::binary);
        if (!in) return out;
        char magic[8];
        while (in.read(magic, 8)) {
            if (std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorKind::Parse, "bad checkpoint magic");
            const auto version = get<std::uint32_t>(in);
            if (version != kVersion) throw Error(ErrorKind::Parse, "unsupported checkpoint version");
            Checkpoint c;
            c.key = get<std::uint64_t>(in);
            c.precision = static_cast<Precision>(get<std::uint32_t>(in));
            c.step = get<std::uint64_t>(in);
            std::string payload(get<std::uint32_t>(in), '\0');
            in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
            if (!in) throw Error(ErrorKind::Parse, "truncated checkpoint record");
            const auto nl = payload.find('\n');
            c.offset = parse_hex_scalar(payload.substr(0, nl), c.precision);
            c.derivative = parse_hex_scalar(payload.substr(nl + 1), c.precision);
            out.push_back(std::move(c));
        }
        return out;
    }

    /// Latest record at or before `max_step` saved with at least `min_bits`.
    std::optional<Checkpoint> latest(std::uint64_t key, Precision min_bits, std::uint64_t max_step) const {
        std::optional<Checkpoint> best;
        for (auto& c : load(key)) {
            if (c.precision < min_bits || c.step > max_step) continue;
            if (!best || c.step >= best->step) best = std::move(c);
        }
        return best;
    }

private:
    static constexpr char kMagic[8] = {'S', 'K', 'F', 'C', 'K', 'P', 'T', '1'};

    std::filesystem::path path_for(std::uint64_t key) const {
        std::ostringstream name;
        name << std::hex << key << ".ckpt";
        return dir_ / name.str();
    }

    template <class T>
    static void put(std::ostream& out, T v) {
        unsigned char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        out.write(reinterpret_cast<const char*>(buf), sizeof(T));
    }

    template <class T>
    static T get(std::istream& in) {
        unsigned char buf[sizeof(T)];
        in.read(reinterpret_cast<char*>(buf), sizeof(T));
        if (!in) throw Error(ErrorKind::Parse, "truncated checkpoint header");
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
        return v;
    }

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

}  // namespace skewfatou
