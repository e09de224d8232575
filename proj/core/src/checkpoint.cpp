#include "orgnet/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "orgnet/errors.hpp"
#include "orgnet/io.hpp"

namespace orgnet {

namespace {

constexpr char kMagic[8] = {'O', 'R', 'G', 'N', 'E', 'T', 'C', 'K'};
constexpr char kLittle = 'L';
constexpr std::size_t kHeaderSize = sizeof(kMagic) + 4 + 1;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(std::span<const double> v) {
        for (double x : v) f64(x);
    }
    void arch(const NetworkArchitecture& a) {
        u32(static_cast<std::uint32_t>(a.layer_sizes().size()));
        for (std::size_t s : a.layer_sizes()) u64(s);
        u8(static_cast<std::uint8_t>(a.activation()));
    }
    std::string& bytes() { return out_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    std::string out_;
};

class Reader {
public:
    Reader(const char* data, std::size_t n) : p_(data), end_(data + n) {}

    std::uint8_t u8(const char* field) { return static_cast<std::uint8_t>(get(1, field)); }
    std::uint32_t u32(const char* field) { return static_cast<std::uint32_t>(get(4, field)); }
    std::uint64_t u64(const char* field) { return get(8, field); }
    double f64(const char* field) { return std::bit_cast<double>(u64(field)); }
    void f64s(std::span<double> v, const char* field) {
        for (double& x : v) x = f64(field);
    }
    NetworkArchitecture arch(const char* field) {
        const std::uint32_t n = u32(field);
        if (n < 2 || n > 64) throw FormatError(std::string("checkpoint: bad layer count in ") + field);
        std::vector<std::size_t> sizes(n);
        for (auto& s : sizes) {
            const std::uint64_t v = u64(field);
            if (v == 0 || v > kMaxElements) throw FormatError(std::string("checkpoint: bad layer size in ") + field);
            s = static_cast<std::size_t>(v);
        }
        const std::uint8_t act = u8(field);
        if (act > static_cast<std::uint8_t>(Activation::Gelu)) {
            throw FormatError(std::string("checkpoint: unknown activation in ") + field);
        }
        return NetworkArchitecture(std::move(sizes), static_cast<Activation>(act));
    }
    bool done() const { return p_ == end_; }

private:
    std::uint64_t get(int n, const char* field) {
        if (end_ - p_ < n) throw FormatError(std::string("checkpoint truncated while reading ") + field);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t{static_cast<unsigned char>(p_[i])} << (8 * i);
        p_ += n;
        return v;
    }
    const char* p_;
    const char* end_;
};

OrganismNetwork decode_payload(const char* payload, std::size_t payload_size);

}  // namespace

std::string encode_checkpoint(const OrganismNetwork& on) {
    Writer w;
    w.arch(on.network_arch());
    w.arch(on.arch().particle_arch);
    w.u8(on.diverged() ? 1 : 0);
    w.u64(on.size());
    for (std::size_t k = 0; k < on.size(); ++k) {
        const auto& p = on.particle(k);
        const auto& opt = on.self_optimizer(k);
        w.u8(p.diverged() ? 1 : 0);
        w.f64s(p.weights());
        w.f64(opt.learning_rate);
        w.f64(opt.momentum);
        w.f64s(opt.velocity);
    }
    const auto& task = on.task_optimizer();
    w.f64(task.learning_rate);
    w.f64(task.momentum);
    w.f64s(task.velocity);

    std::string out(kMagic, sizeof(kMagic));
    Writer head;
    head.u32(kCheckpointVersion);
    head.u8(static_cast<std::uint8_t>(kLittle));
    out += head.bytes();
    out += w.bytes();
    Writer tail;
    tail.u64(fnv1a64(w.bytes()));
    out += tail.bytes();
    return out;
}

OrganismNetwork decode_checkpoint(const std::string& bytes) {
    if (bytes.size() < kHeaderSize + 8) throw FormatError("checkpoint truncated while reading header");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("checkpoint: bad magic");
    Reader head(bytes.data() + sizeof(kMagic), 5);
    const std::uint32_t version = head.u32("version");
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    if (head.u8("endianness") != static_cast<std::uint8_t>(kLittle)) {
        throw FormatError("checkpoint: unknown endianness tag");
    }
    const std::size_t payload_size = bytes.size() - kHeaderSize - 8;
    const char* payload = bytes.data() + kHeaderSize;
    Reader tail(payload + payload_size, 8);
    if (tail.u64("hash") != fnv1a64(std::string_view(payload, payload_size))) throw FormatError("checkpoint: hash mismatch");

    try {
        return decode_payload(payload, payload_size);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

namespace {

OrganismNetwork decode_payload(const char* payload, std::size_t payload_size) {
    Reader r(payload, payload_size);
    OrganismArchitecture arch;
    const NetworkArchitecture na = r.arch("organism architecture");
    arch.layer_sizes = na.layer_sizes();
    arch.activation = na.activation();
    arch.particle_arch = r.arch("particle architecture");
    const bool diverged = r.u8("organism flags") != 0;
    const std::uint64_t count = r.u64("particle count");
    if (count != arch.particle_count()) throw FormatError("checkpoint: particle count does not match architecture");
    const std::size_t pw = arch.particle_arch.weight_count();

    std::vector<ParticleNetwork> particles;
    std::vector<OptimizerState> opts;
    particles.reserve(count);
    opts.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        Network net(arch.particle_arch);
        net.diverged = r.u8("particle flags") != 0;
        r.f64s(net.weights, "particle weights");
        const double lr = r.f64("self optimizer");
        const double mom = r.f64("self optimizer");
        OptimizerState opt(pw, lr, mom);
        r.f64s(opt.velocity, "self optimizer velocity");
        particles.emplace_back(std::move(net));
        opts.push_back(std::move(opt));
    }
    const double lr = r.f64("task optimizer");
    const double mom = r.f64("task optimizer");
    OrganismNetwork on = OrganismNetwork::from_particles(arch, std::move(particles), lr, mom);
    r.f64s(on.task_optimizer().velocity, "task optimizer velocity");
    if (!r.done()) throw FormatError("checkpoint: trailing bytes after payload");
    for (std::size_t k = 0; k < opts.size(); ++k) on.self_optimizer(k) = std::move(opts[k]);
    if (diverged) on.mark_diverged();
    return on;
}

}  // namespace

void save_checkpoint(const OrganismNetwork& on, const std::filesystem::path& path) {
    write_file(path, encode_checkpoint(on));
}

OrganismNetwork load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path));
}

}  // namespace orgnet
