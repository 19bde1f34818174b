#include "pixkit/tsr.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pixkit {

using nlohmann::json;

void save_tsr(const Tensor& t, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_tsr: cannot open " + path.string());
    json header = {{"shape", t.shape}, {"dtype", "f64"}};
    f << header.dump() << "\n";
    static_assert(sizeof(double) == 8);
    f.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!f) throw std::runtime_error("save_tsr: write failed for " + path.string());
}

Tensor load_tsr(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_tsr: cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("load_tsr: missing header in " + path.string());
    json header = json::parse(line);
    if (header.value("dtype", "") != "f64") {
        throw std::runtime_error("load_tsr: unsupported dtype in " + path.string());
    }
    std::vector<size_t> shape = header.at("shape").get<std::vector<size_t>>();
    Tensor t(shape);
    f.read(reinterpret_cast<char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (static_cast<size_t>(f.gcount()) != t.data.size() * sizeof(double)) {
        throw std::runtime_error("load_tsr: truncated payload in " + path.string());
    }
    return t;
}

}  // namespace pixkit
