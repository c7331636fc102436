#include "eegdiff/signal/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>

namespace eegdiff::signal {

namespace {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

class Writer {
public:
    template <typename T>
    void put(T value) {
        char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        buffer_.append(bytes, sizeof(T));
    }
    void put_bytes(const std::string& s) { buffer_.append(s); }
    void put_doubles(std::span<const double> values) {
        buffer_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
    }
    std::uint64_t position() const { return buffer_.size(); }
    const std::string& bytes() const { return buffer_; }

private:
    std::string buffer_;
};

class Reader {
public:
    Reader(std::string bytes, std::string origin) : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

    template <typename T>
    T get(const char* what) {
        require(sizeof(T), what);
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    std::string get_bytes(std::size_t n, const char* what) {
        require(n, what);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> get_doubles(std::size_t n, const char* what) {
        if (n > (bytes_.size() - pos_) / sizeof(double)) truncated(what);
        std::vector<double> out(n);
        std::memcpy(out.data(), bytes_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
        return out;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void require(std::size_t n, const char* what) {
        if (n > bytes_.size() - pos_) truncated(what);
    }
    [[noreturn]] void truncated(const char* what) const {
        throw FormatError(origin_ + ": truncated file while reading " + what);
    }

    std::string bytes_;
    std::string origin_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<RecordOffset> save_container(const std::filesystem::path& path, const Container& container) {
    Writer w;
    w.put_bytes(std::string(kContainerMagic, 4));
    w.put<std::uint16_t>(kContainerVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(container.header.size()));
    w.put_bytes(container.header);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(container.tensors.size()));
    std::vector<RecordOffset> offsets;
    for (const auto& [name, tensor] : container.tensors) {
        offsets.push_back({name, w.position()});
        w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
        w.put_bytes(name);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t d : tensor.shape()) w.put<std::uint64_t>(d);
        w.put_doubles(tensor.data());
    }

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    return offsets;
}

Container load_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(std::move(bytes), path.string());

    if (r.get_bytes(4, "magic") != std::string(kContainerMagic, 4)) {
        throw FormatError(path.string() + ": bad magic, not an eegdiff container");
    }
    const auto version = r.get<std::uint16_t>("version");
    if (version != kContainerVersion) {
        throw FormatError(path.string() + ": unsupported container version " + std::to_string(version));
    }
    Container c;
    c.header = r.get_bytes(r.get<std::uint32_t>("header length"), "header");
    const auto count = r.get<std::uint32_t>("record count");
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = r.get_bytes(r.get<std::uint32_t>("name length"), "record name");
        const auto rank = r.get<std::uint32_t>("rank");
        nd::Shape shape(rank);
        std::size_t total = 1;
        for (auto& d : shape) {
            d = static_cast<std::size_t>(r.get<std::uint64_t>("dims"));
            total *= d;
        }
        auto values = r.get_doubles(total, "payload");
        if (c.tensors.count(name)) throw FormatError(path.string() + ": duplicate record '" + name + "'");
        c.tensors.emplace(std::move(name), nd::Tensor::from(shape, std::move(values)));
    }
    if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after last record");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const std::map<std::string, nd::Tensor>& params,
                     const std::string& header) {
    save_container(path, Container{header, params});
}

Container load_checkpoint(const std::filesystem::path& path) { return load_container(path); }

} // namespace eegdiff::signal
