#include "cae/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace cae {

namespace {

void write_u16(std::ostream& os, uint16_t v) { os.write(reinterpret_cast<const char*>(&v), 2); }
void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_str(std::ostream& os, const std::string& s) {
    write_u32(os, uint32_t(s.size()));
    os.write(s.data(), std::streamsize(s.size()));
}
void write_f32(std::ostream& os, const float* p, size_t n) {
    os.write(reinterpret_cast<const char*>(p), std::streamsize(n * 4));
}

void need(std::istream& is, const char* what) {
    if (!is.good()) throw IoError(std::string("unexpected end of checkpoint file reading ") + what);
}
uint16_t read_u16(std::istream& is, const char* what) {
    uint16_t v;
    is.read(reinterpret_cast<char*>(&v), 2);
    need(is, what);
    return v;
}
uint32_t read_u32(std::istream& is, const char* what) {
    uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    need(is, what);
    return v;
}
uint64_t read_u64(std::istream& is, const char* what) {
    uint64_t v;
    is.read(reinterpret_cast<char*>(&v), 8);
    need(is, what);
    return v;
}
std::string read_str(std::istream& is, const char* what) {
    uint32_t n = read_u32(is, what);
    if (n > (1u << 20)) throw IoError("corrupt checkpoint: oversized string");
    std::string s(n, '\0');
    is.read(s.data(), n);
    need(is, what);
    return s;
}
void read_f32(std::istream& is, float* p, size_t n, const char* what) {
    is.read(reinterpret_cast<char*>(p), std::streamsize(n * 4));
    need(is, what);
}

constexpr uint16_t kVersion = 1;

}  // namespace

void save_checkpoint(Network<float>& net, const std::string& path, uint32_t epoch, uint64_t seed,
                     Adam* adam) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write("CAEC", 4);
    write_u16(os, kVersion);
    write_str(os, net.architecture_id);
    os.put(char(static_cast<uint8_t>(net.role)));
    write_u32(os, epoch);
    write_u64(os, seed);

    auto segs = net.params();
    write_u32(os, uint32_t(segs.size()));
    for (auto& seg : segs) {
        write_str(os, seg.name);
        write_u32(os, uint32_t(seg.value->shape.size()));
        for (int d : seg.value->shape) write_u32(os, uint32_t(d));
        write_f32(os, seg.value->ptr(), size_t(seg.value->numel()));
    }

    auto bns = net.bn_layers();
    write_u32(os, uint32_t(bns.size()));
    for (auto* bn : bns) {
        write_str(os, bn->name);
        write_u32(os, uint32_t(bn->channels_));
        write_f32(os, bn->running_mean.ptr(), size_t(bn->channels_));
        write_f32(os, bn->running_var.ptr(), size_t(bn->channels_));
    }

    if (adam && !adam->moment1().empty()) {
        write_str(os, "adam");
        write_u64(os, uint64_t(adam->t()));
        write_u32(os, uint32_t(adam->moment1().size()));
        for (size_t i = 0; i < adam->moment1().size(); ++i) {
            write_u32(os, uint32_t(adam->moment1()[i].numel()));
            write_f32(os, adam->moment1()[i].ptr(), size_t(adam->moment1()[i].numel()));
            write_f32(os, adam->moment2()[i].ptr(), size_t(adam->moment2()[i].numel()));
        }
    } else {
        write_str(os, "none");
    }
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

Network<float> load_checkpoint(const std::string& path, CheckpointMeta* meta, Adam* adam,
                               const std::string& expected_arch_prefix) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    need(is, "magic");
    if (std::memcmp(magic, "CAEC", 4) != 0) throw IoError("bad checkpoint magic in " + path);
    uint16_t version = read_u16(is, "version");
    if (version != kVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    std::string arch = read_str(is, "architecture id");
    if (!expected_arch_prefix.empty() && arch.rfind(expected_arch_prefix, 0) != 0)
        throw IoError("checkpoint architecture '" + arch + "' does not match expected '" +
                      expected_arch_prefix + "'");
    int role_byte = is.get();
    need(is, "role");
    uint32_t epoch = read_u32(is, "epoch");
    uint64_t seed = read_u64(is, "seed");

    Network<float> net = make_network<float>(arch);
    net.role = static_cast<Role>(role_byte);

    auto segs = net.params();
    uint32_t n_segs = read_u32(is, "segment count");
    if (n_segs != segs.size())
        throw IoError("checkpoint segment count mismatch for architecture " + arch);
    for (auto& seg : segs) {
        std::string name = read_str(is, "segment name");
        if (name != seg.name) throw IoError("checkpoint segment order mismatch at " + name);
        uint32_t ndim = read_u32(is, "segment rank");
        std::vector<int> dims(ndim);
        for (auto& d : dims) d = int(read_u32(is, "segment dim"));
        if (dims != seg.value->shape) throw IoError("checkpoint segment shape mismatch at " + name);
        read_f32(is, seg.value->ptr(), size_t(seg.value->numel()), "segment payload");
    }

    auto bns = net.bn_layers();
    uint32_t n_bn = read_u32(is, "bn count");
    if (n_bn != bns.size()) throw IoError("checkpoint BN layer count mismatch");
    for (auto* bn : bns) {
        std::string name = read_str(is, "bn name");
        if (name != bn->name) throw IoError("checkpoint BN order mismatch at " + name);
        uint32_t ch = read_u32(is, "bn channels");
        if (int(ch) != bn->channels_) throw IoError("checkpoint BN width mismatch at " + name);
        read_f32(is, bn->running_mean.ptr(), ch, "bn running mean");
        read_f32(is, bn->running_var.ptr(), ch, "bn running var");
    }

    std::string opt_kind = read_str(is, "optimizer kind");
    if (opt_kind == "adam") {
        uint64_t t = read_u64(is, "adam step");
        uint32_t n = read_u32(is, "adam segment count");
        if (adam) {
            adam->set_t(int64_t(t));
            adam->moment1().clear();
            adam->moment2().clear();
        }
        for (uint32_t i = 0; i < n; ++i) {
            uint32_t numel = read_u32(is, "adam segment size");
            Tensor<float> m({int(numel)}), v({int(numel)});
            read_f32(is, m.ptr(), numel, "adam m");
            read_f32(is, v.ptr(), numel, "adam v");
            if (adam) {
                adam->moment1().push_back(std::move(m));
                adam->moment2().push_back(std::move(v));
            }
        }
    } else if (opt_kind != "none" && opt_kind != "sgd") {
        throw IoError("unknown optimizer kind in checkpoint: " + opt_kind);
    }

    if (meta) {
        meta->architecture_id = arch;
        meta->role = net.role;
        meta->epoch = epoch;
        meta->seed = seed;
    }
    return net;
}

}  // namespace cae
