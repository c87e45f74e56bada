#include "hitrank/params.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "binio.hpp"

namespace hitrank {

namespace {

constexpr char kMagic[4] = {'H', 'R', 'P', 'S'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

Parameter& ParamSet::add(std::string name, Tensor init) {
  if (name.empty()) {
    throw std::invalid_argument("ParamSet::add: empty parameter name");
  }
  if (contains(name)) {
    throw std::invalid_argument("ParamSet::add: duplicate parameter '" + name +
                                "'");
  }
  Tensor grad = Tensor::zeros_like(init);
  entries_.push_back(
      Parameter{std::move(name), std::move(init), std::move(grad)});
  return entries_.back();
}

bool ParamSet::contains(std::string_view name) const noexcept {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

Parameter& ParamSet::at(std::string_view name) {
  for (auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("ParamSet::at: no parameter named '" +
                          std::string(name) + "'");
}

const Parameter& ParamSet::at(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("ParamSet::at: no parameter named '" +
                          std::string(name) + "'");
}

std::size_t ParamSet::value_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

void ParamSet::zero_grad() noexcept {
  for (auto& e : entries_) e.grad.fill(0.0);
}

void ParamSet::save(std::ostream& out) const {
  out.write(kMagic, 4);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    binio::put_string(out, e.name);
    binio::put_u32(out, static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t ext : e.value.shape()) {
      binio::put_u64(out, static_cast<std::uint64_t>(ext));
    }
    for (double v : e.value.values()) binio::put_f64(out, v);
  }
  if (!out) throw std::runtime_error("ParamSet::save: write failure");
}

ParamSet ParamSet::load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("ParamSet::load: bad magic");
  }
  const std::uint32_t version = binio::get_u32(in);
  if (version != kVersion) {
    throw std::runtime_error("ParamSet::load: unsupported version " +
                             std::to_string(version));
  }
  const std::uint32_t count = binio::get_u32(in);
  ParamSet set;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = binio::get_string(in);
    const std::uint32_t rank = binio::get_u32(in);
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (std::uint32_t a = 0; a < rank; ++a) {
      shape[a] = static_cast<std::size_t>(binio::get_u64(in));
      numel *= shape[a];
    }
    std::vector<double> values(numel);
    for (std::size_t i = 0; i < numel; ++i) values[i] = binio::get_f64(in);
    set.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return set;
}

void ParamSet::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("ParamSet::save_file: cannot open " + path);
  }
  save(out);
}

ParamSet ParamSet::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("ParamSet::load_file: cannot open " + path);
  }
  return load(in);
}

}  // namespace hitrank
