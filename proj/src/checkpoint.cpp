#include "alise/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace alise {

namespace {
constexpr const char* kMagic = "ALISECKPT 1";

struct TensorHeader {
  std::string name;
  std::vector<int64_t> dims;
  std::streampos data_pos;
};

void parse_headers(std::ifstream& f, std::string& config_text,
                   std::vector<TensorHeader>& headers) {
  std::string line;
  ALISE_CHECK(std::getline(f, line) && line == kMagic, "not an ALISE checkpoint");
  ALISE_CHECK(std::getline(f, line) && line.rfind("config ", 0) == 0, "missing config block");
  const int64_t clen = std::stoll(line.substr(7));
  config_text.resize(static_cast<size_t>(clen));
  f.read(config_text.data(), clen);
  ALISE_CHECK(std::getline(f, line) && line.empty(), "malformed config block");
  ALISE_CHECK(std::getline(f, line) && line.rfind("tensors ", 0) == 0, "missing tensor count");
  const int64_t count = std::stoll(line.substr(8));
  for (int64_t i = 0; i < count; ++i) {
    ALISE_CHECK(std::getline(f, line) && line.rfind("tensor ", 0) == 0, "missing tensor header");
    std::istringstream hs(line.substr(7));
    TensorHeader h;
    int64_t ndim = 0;
    hs >> h.name >> ndim;
    ALISE_CHECK(!h.name.empty() && ndim >= 0, "malformed tensor header");
    int64_t numel = 1;
    for (int64_t d = 0; d < ndim; ++d) {
      int64_t dim = 0;
      hs >> dim;
      h.dims.push_back(dim);
      numel *= dim;
    }
    h.data_pos = f.tellg();
    headers.push_back(h);
    f.seekg(numel * static_cast<int64_t>(sizeof(float)) + 1, std::ios::cur);  // data + newline
  }
}
}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& ps, const std::string& config_text) {
  std::ofstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot write checkpoint " << path);
  f << kMagic << "\n";
  f << "config " << config_text.size() << "\n" << config_text << "\n";
  f << "tensors " << ps.names().size() << "\n";
  for (const std::string& name : ps.names()) {
    const Tensor& t = ps.value(name);
    f << "tensor " << name << " " << t.ndim();
    for (int64_t d : t.shape()) f << " " << d;
    f << "\n";
    std::vector<float> buf(static_cast<size_t>(t.numel()));
    for (int64_t i = 0; i < t.numel(); ++i) buf[static_cast<size_t>(i)] = static_cast<float>(t[i]);
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<int64_t>(buf.size() * sizeof(float)));
    f << "\n";
  }
  ALISE_CHECK(f.good(), "write failed for checkpoint " << path);
}

std::string load_checkpoint(const std::string& path, ParamStore& ps) {
  std::ifstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot read checkpoint " << path);
  std::string config_text;
  std::vector<TensorHeader> headers;
  parse_headers(f, config_text, headers);

  std::map<std::string, const TensorHeader*> by_name;
  for (const TensorHeader& h : headers) {
    ALISE_CHECK(!by_name.count(h.name), "duplicate tensor '" << h.name << "' in checkpoint");
    by_name[h.name] = &h;
  }
  ALISE_CHECK(by_name.size() == ps.names().size(),
              "checkpoint holds " << by_name.size() << " tensors, model expects "
                                  << ps.names().size());
  for (const std::string& name : ps.names()) {
    auto it = by_name.find(name);
    ALISE_CHECK(it != by_name.end(), "checkpoint is missing tensor '" << name << "'");
    Tensor& dst = ps.value(name);
    ALISE_CHECK(it->second->dims == dst.shape(), "shape mismatch for tensor '" << name << "'");
    f.clear();
    f.seekg(it->second->data_pos);
    std::vector<float> buf(static_cast<size_t>(dst.numel()));
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<int64_t>(buf.size() * sizeof(float)));
    ALISE_CHECK(f.gcount() == static_cast<int64_t>(buf.size() * sizeof(float)),
                "short read in checkpoint tensor '" << name << "'");
    for (int64_t i = 0; i < dst.numel(); ++i) dst[i] = static_cast<double>(buf[static_cast<size_t>(i)]);
  }
  return config_text;
}

std::string read_checkpoint_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  ALISE_CHECK(f.good(), "cannot read checkpoint " << path);
  std::string config_text;
  std::vector<TensorHeader> headers;
  parse_headers(f, config_text, headers);
  return config_text;
}

}  // namespace alise
