#include "fetch.hpp"

#include <curl/curl.h>

#include <cstdio>
#include <memory>
#include <ostream>

#include "orgnet/data.hpp"
#include "orgnet/errors.hpp"

namespace orgnet::tools {

namespace fs = std::filesystem;

namespace {

struct CurlGlobal {
    CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
    ~CurlGlobal() { curl_global_cleanup(); }
};

std::size_t write_cb(char* ptr, std::size_t size, std::size_t nmemb, void* user) {
    return std::fwrite(ptr, size, nmemb, static_cast<std::FILE*>(user));
}

constexpr const char* kFiles[] = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                                  "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"};

bool parses(const fs::path& p, bool images) {
    try {
        if (images) {
            read_idx_images(p);
        } else {
            read_idx_labels(p);
        }
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

void download(const std::string& url, const fs::path& dest) {
    static CurlGlobal global;
    if (!dest.parent_path().empty()) fs::create_directories(dest.parent_path());
    const fs::path tmp = dest.string() + ".part";
    {
        std::unique_ptr<std::FILE, int (*)(std::FILE*)> out(std::fopen(tmp.c_str(), "wb"), &std::fclose);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        std::unique_ptr<CURL, void (*)(CURL*)> curl(curl_easy_init(), &curl_easy_cleanup);
        if (!curl) throw IoError("curl initialisation failed");
        curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
        curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_cb);
        curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, out.get());
        curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
        curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
        curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 30L);
        const CURLcode rc = curl_easy_perform(curl.get());
        if (rc != CURLE_OK) {
            out.reset();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("download of " + url + " failed: " + curl_easy_strerror(rc));
        }
        if (std::fflush(out.get()) != 0) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, dest);
}

int fetch_mnist(const std::string& base_url, const fs::path& dir, bool force, std::ostream& log) {
    std::string base = base_url;
    if (!base.empty() && base.back() != '/') base += '/';
    int fetched = 0;
    for (const char* name : kFiles) {
        const bool images = std::string(name).find("images") != std::string::npos;
        const fs::path plain = dir / name;
        const fs::path gz = dir / (std::string(name) + ".gz");
        std::error_code ec;
        if (!force) {
            if (fs::is_regular_file(plain, ec) && parses(plain, images)) {
                log << name << ": present\n";
                continue;
            }
            if (fs::is_regular_file(gz, ec) && parses(gz, images)) {
                log << name << ".gz: present\n";
                continue;
            }
        }
        if (fs::is_regular_file(plain, ec) && !parses(plain, images)) {
            log << name << ": invalid, removing\n";
            fs::remove(plain);
        }
        const std::string url = base + name + ".gz";
        log << name << ".gz: downloading " << url << '\n';
        download(url, gz);
        if (!parses(gz, images)) throw FormatError("downloaded file " + gz.string() + " is not a valid IDX file");
        ++fetched;
    }
    return fetched;
}

}  // namespace orgnet::tools
