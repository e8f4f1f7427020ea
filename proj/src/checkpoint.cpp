#include "tsdiff/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "tsdiff/errors.hpp"

namespace tsdiff {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw DataError(path + ": truncated checkpoint");
    }
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const nlohmann::json& meta, DenoiserModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint \"" + path + "\"");

    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);

    const std::string meta_str = meta.dump();
    write_pod(out, static_cast<std::uint64_t>(meta_str.size()));
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

    const auto params = model.params();
    write_pod(out, static_cast<std::uint64_t>(params.size()));
    for (const auto& p : params) {
        write_pod(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_pod(out, static_cast<std::uint64_t>(p.value->size()));
        out.write(reinterpret_cast<const char*>(p.value->data()),
                  static_cast<std::streamsize>(sizeof(double)) * p.value->size());
    }
    if (!out) throw DataError("write failed for checkpoint \"" + path + "\"");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint \"" + path + "\"");

    char magic[4];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError(path + ": not a checkpoint file (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ckpt;
    const auto meta_len = read_pod<std::uint64_t>(in, path);
    std::string meta_str(meta_len, '\0');
    if (!in.read(meta_str.data(), static_cast<std::streamsize>(meta_len))) {
        throw DataError(path + ": truncated checkpoint meta");
    }
    ckpt.meta = nlohmann::json::parse(meta_str, nullptr, false);
    if (ckpt.meta.is_discarded()) throw DataError(path + ": corrupt checkpoint meta JSON");

    const auto count = read_pod<std::uint64_t>(in, path);
    ckpt.arrays.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = read_pod<std::uint32_t>(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw DataError(path + ": truncated array name");
        const auto elems = read_pod<std::uint64_t>(in, path);
        std::vector<double> data(elems);
        if (!in.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(sizeof(double) * elems))) {
            throw DataError(path + ": truncated array \"" + name + "\"");
        }
        ckpt.arrays.emplace_back(std::move(name), std::move(data));
    }
    return ckpt;
}

void apply_parameters(DenoiserModel& model, const Checkpoint& ckpt) {
    auto params = model.params();
    if (params.size() != ckpt.arrays.size()) {
        throw DataError("checkpoint: expected " + std::to_string(params.size()) + " arrays, found " +
                        std::to_string(ckpt.arrays.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& [name, data] = ckpt.arrays[i];
        if (name != params[i].name) {
            throw DataError("checkpoint: array " + std::to_string(i) + " named \"" + name +
                            "\", model expects \"" + params[i].name + "\"");
        }
        if (static_cast<std::uint64_t>(params[i].value->size()) != data.size()) {
            throw DataError("checkpoint: array \"" + name + "\" has " + std::to_string(data.size()) +
                            " elements, model expects " + std::to_string(params[i].value->size()));
        }
        std::memcpy(params[i].value->data(), data.data(), sizeof(double) * data.size());
    }
}

}  // namespace tsdiff
