#include "plim/atlas/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

namespace plim {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'I', 'M'};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_ += s;
  }
  void vec(const Vec& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) f64(x);
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& b) : buf_(b) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Vec vec() {
    const std::uint32_t n = u32();
    need(std::size_t{n} * 8);
    Vec v(n);
    for (std::uint32_t i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    need(n * 8);
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(ErrorKind::CorruptFile, "atlas: truncated payload");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

std::string encode(const Atlas& atlas) {
  const AtlasSpec& s = atlas.spec();
  Writer w;
  w.str(s.system);
  w.str(s.projection);
  w.u32(static_cast<std::uint32_t>(s.dim));
  for (int d = 0; d < 2; ++d) {
    w.f64(s.lo[d]);
    w.f64(s.hi[d]);
    w.f64(s.block_size[d]);
    w.u32(static_cast<std::uint32_t>(s.nodes[d]));
  }
  w.u8(s.corners == AtlasSpec::Corners::All ? 0 : 1);
  w.u64(s.anchor_data.size());
  for (const Vec& v : s.anchor_data) w.vec(v);
  w.u8(s.gsolve.mode == SolveMode::Complex ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(s.gsolve.gauss));
  w.f64(s.gsolve.accept_threshold);
  w.f64(s.gsolve.w_anchor_scale);
  w.f64(s.gsolve.prune_tol);

  w.u64(atlas.size());
  for (const Sheet& sh : atlas.sheets()) {
    w.i64(sh.id);
    w.u32(static_cast<std::uint32_t>(sh.block.ij[0]));
    w.u32(static_cast<std::uint32_t>(sh.block.ij[1]));
    w.u32(static_cast<std::uint32_t>(sh.n_components));
    w.doubles(sh.values);
    w.doubles(sh.imag);
    w.u64(sh.pruned.size());
    for (auto p : sh.pruned) w.u8(p);
    w.vec(sh.anchor.coarse);
    w.vec(sh.anchor.data);
    w.f64(sh.objective);
    w.u8(sh.degenerate ? 1 : 0);
  }
  return w.bytes();
}

Atlas decode(const std::string& payload) {
  Reader r(payload);
  AtlasSpec s;
  s.system = r.str();
  s.projection = r.str();
  s.dim = static_cast<int>(r.u32());
  for (int d = 0; d < 2; ++d) {
    s.lo[d] = r.f64();
    s.hi[d] = r.f64();
    s.block_size[d] = r.f64();
    s.nodes[d] = static_cast<int>(r.u32());
  }
  s.corners = r.u8() == 0 ? AtlasSpec::Corners::All : AtlasSpec::Corners::LowerLeft;
  const std::uint64_t na = r.u64();
  for (std::uint64_t i = 0; i < na; ++i) s.anchor_data.push_back(r.vec());
  s.gsolve.mode = r.u8() == 1 ? SolveMode::Complex : SolveMode::Real;
  s.gsolve.gauss = static_cast<int>(r.u32());
  s.gsolve.accept_threshold = r.f64();
  s.gsolve.w_anchor_scale = r.f64();
  s.gsolve.prune_tol = r.f64();

  Atlas atlas(s);
  const std::uint64_t ns = r.u64();
  for (std::uint64_t i = 0; i < ns; ++i) {
    Sheet sh;
    sh.id = r.i64();
    sh.block.ij[0] = static_cast<int>(r.u32());
    sh.block.ij[1] = static_cast<int>(r.u32());
    sh.n_components = static_cast<int>(r.u32());
    sh.values = r.doubles();
    sh.imag = r.doubles();
    const std::uint64_t np = r.u64();
    for (std::uint64_t k = 0; k < np; ++k) sh.pruned.push_back(r.u8());
    sh.anchor.coarse = r.vec();
    sh.anchor.data = r.vec();
    sh.objective = r.f64();
    sh.degenerate = r.u8() != 0;
    if (!atlas.valid_block(sh.block)) throw Error(ErrorKind::CorruptFile, "atlas: sheet block out of range");
    sh.geom = atlas.geometry(sh.block);
    const std::size_t expect = static_cast<std::size_t>(sh.geom.node_count() * sh.n_components);
    if (sh.values.size() != expect || (!sh.imag.empty() && sh.imag.size() != expect) ||
        (!sh.pruned.empty() && sh.pruned.size() != static_cast<std::size_t>(sh.geom.node_count()))) {
      throw Error(ErrorKind::CorruptFile, "atlas: sheet arrays do not match the block mesh");
    }
    atlas.add_sheet(std::move(sh), true);
  }
  if (!r.done()) throw Error(ErrorKind::CorruptFile, "atlas: trailing bytes");
  return atlas;
}

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.begin(), v.end()); }

Vec json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_atlas(const Atlas& atlas, std::ostream& out) {
  const std::string payload = encode(atlas);
  Writer head;
  head.u32(kAtlasFormatVersion);
  head.u64(payload.size());
  Writer tail;
  tail.u64(fnv1a(payload));
  out.write(kMagic, 4);
  out.write(head.bytes().data(), static_cast<std::streamsize>(head.bytes().size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.write(tail.bytes().data(), static_cast<std::streamsize>(tail.bytes().size()));
}

void save_atlas(const Atlas& atlas, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write '" + path + "'");
  write_atlas(atlas, out);
  if (!out) throw Error(ErrorKind::Config, "write failed for '" + path + "'");
}

Atlas read_atlas(std::istream& in) {
  const std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() >= 4 && std::memcmp(all.data(), kMagic, 4) == 0) {
    if (all.size() < 4 + 4 + 8 + 8) throw Error(ErrorKind::CorruptFile, "atlas: truncated header");
    const std::string head = all.substr(4, 12);
    Reader hr(head);
    const std::uint32_t version = hr.u32();
    const std::uint64_t size = hr.u64();
    if (version != kAtlasFormatVersion) {
      throw Error(ErrorKind::VersionMismatch, "atlas format version " + std::to_string(version) + ", expected " +
                                                  std::to_string(kAtlasFormatVersion));
    }
    if (all.size() != 16 + size + 8) throw Error(ErrorKind::CorruptFile, "atlas: size mismatch");
    const std::string payload = all.substr(16, size);
    const std::string tail = all.substr(16 + size);
    Reader tr(tail);
    if (tr.u64() != fnv1a(payload)) throw Error(ErrorKind::CorruptFile, "atlas: checksum mismatch");
    return decode(payload);
  }
  const auto first = all.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && all[first] == '{') {
    std::istringstream ss(all);
    return import_atlas_text(ss);
  }
  throw Error(ErrorKind::CorruptFile, "atlas: unrecognised file (bad magic)");
}

Atlas load_atlas(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read '" + path + "'");
  return read_atlas(in);
}

void export_atlas_text(const Atlas& atlas, std::ostream& out) {
  const AtlasSpec& s = atlas.spec();
  nlohmann::json j;
  j["format"] = "plim-atlas";
  j["version"] = kAtlasFormatVersion;
  j["system"] = s.system;
  j["projection"] = s.projection;
  j["dim"] = s.dim;
  j["lo"] = s.lo;
  j["hi"] = s.hi;
  j["block_size"] = s.block_size;
  j["nodes"] = s.nodes;
  j["corners"] = s.corners == AtlasSpec::Corners::All ? "all" : "lower-left";
  j["anchor_data"] = nlohmann::json::array();
  for (const Vec& v : s.anchor_data) j["anchor_data"].push_back(vec_json(v));
  j["gsolve"] = {{"mode", s.gsolve.mode == SolveMode::Complex ? "complex" : "real"},
                 {"gauss", s.gsolve.gauss},
                 {"accept_threshold", s.gsolve.accept_threshold},
                 {"w_anchor_scale", s.gsolve.w_anchor_scale},
                 {"prune_tol", s.gsolve.prune_tol}};
  j["sheets"] = nlohmann::json::array();
  for (const Sheet& sh : atlas.sheets()) {
    nlohmann::json js;
    js["id"] = sh.id;
    js["block"] = sh.block.ij;
    js["n_components"] = sh.n_components;
    js["values"] = sh.values;
    if (!sh.imag.empty()) js["imag"] = sh.imag;
    if (!sh.pruned.empty()) js["pruned"] = sh.pruned;
    js["anchor"] = {{"coarse", vec_json(sh.anchor.coarse)}, {"data", vec_json(sh.anchor.data)}};
    js["objective"] = sh.objective;
    js["degenerate"] = sh.degenerate;
    j["sheets"].push_back(std::move(js));
  }
  out << j.dump(1) << '\n';
}

Atlas import_atlas_text(std::istream& in) {
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format") != "plim-atlas") throw Error(ErrorKind::CorruptFile, "atlas text: wrong format tag");
    if (j.at("version").get<std::uint32_t>() != kAtlasFormatVersion) {
      throw Error(ErrorKind::VersionMismatch, "atlas text: unsupported version");
    }
    AtlasSpec s;
    s.system = j.at("system");
    s.projection = j.at("projection");
    s.dim = j.at("dim");
    s.lo = j.at("lo");
    s.hi = j.at("hi");
    s.block_size = j.at("block_size");
    s.nodes = j.at("nodes");
    s.corners = j.at("corners") == "all" ? AtlasSpec::Corners::All : AtlasSpec::Corners::LowerLeft;
    for (const auto& v : j.at("anchor_data")) s.anchor_data.push_back(json_vec(v));
    const auto& g = j.at("gsolve");
    s.gsolve.mode = g.at("mode") == "complex" ? SolveMode::Complex : SolveMode::Real;
    s.gsolve.gauss = g.at("gauss");
    s.gsolve.accept_threshold = g.at("accept_threshold");
    s.gsolve.w_anchor_scale = g.at("w_anchor_scale");
    s.gsolve.prune_tol = g.at("prune_tol");
    Atlas atlas(s);
    for (const auto& js : j.at("sheets")) {
      Sheet sh;
      sh.id = js.at("id");
      sh.block.ij = js.at("block");
      sh.n_components = js.at("n_components");
      sh.values = js.at("values").get<std::vector<double>>();
      if (js.contains("imag")) sh.imag = js["imag"].get<std::vector<double>>();
      if (js.contains("pruned")) sh.pruned = js["pruned"].get<std::vector<std::uint8_t>>();
      sh.anchor.coarse = json_vec(js.at("anchor").at("coarse"));
      sh.anchor.data = json_vec(js.at("anchor").at("data"));
      sh.objective = js.at("objective");
      sh.degenerate = js.at("degenerate");
      if (!atlas.valid_block(sh.block)) throw Error(ErrorKind::CorruptFile, "atlas text: block out of range");
      sh.geom = atlas.geometry(sh.block);
      if (sh.values.size() != static_cast<std::size_t>(sh.geom.node_count() * sh.n_components)) {
        throw Error(ErrorKind::CorruptFile, "atlas text: value count does not match the mesh");
      }
      atlas.add_sheet(std::move(sh), true);
    }
    return atlas;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::CorruptFile, std::string("atlas text: ") + e.what());
  }
}

}  // namespace plim
