#include "skc/model_io.hpp"

#include <json.hpp>

#include <cmath>
#include <complex>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

namespace skc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void check_keys(const json& o, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : o.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) fail(path + "/" + item.key(), "unknown field");
  }
}

const json& need(const json& o, const char* key, const std::string& path) {
  const auto it = o.find(key);
  if (it == o.end()) fail(path + "/" + key, "missing field");
  return *it;
}

double num_at(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

long int_at(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long>();
}

std::vector<double> vec_at(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(num_at(v[i], path + "/" + std::to_string(i)));
  return out;
}

Eigen::MatrixXd mat_at(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty 2D array");
  const std::size_t rows = v.size();
  std::vector<std::vector<double>> data;
  data.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    data.push_back(vec_at(v[i], path + "/" + std::to_string(i)));
    if (data[i].size() != data[0].size())
      fail(path + "/" + std::to_string(i), "ragged matrix row");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(data[0].size()));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < data[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
  return m;
}

// A spectral member is {"acov": [...]} (one-sided, even extension),
// {"acov": {"kmin": k, "coeffs": [...]}} (two-sided) or {"grid": [...]} with
// entries that are numbers or [re, im] pairs.
SpectralFunction parse_spectral(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object with 'acov' or 'grid'");
  check_keys(v, path, {"acov", "grid"});
  if (v.contains("acov") == v.contains("grid"))
    fail(path, "exactly one of 'acov' and 'grid' is required");
  if (v.contains("acov")) {
    const json& a = v["acov"];
    if (a.is_array()) return SpectralFunction::from_acov(Acov::even(vec_at(a, path + "/acov")));
    if (!a.is_object()) fail(path + "/acov", "expected an array or {kmin, coeffs}");
    check_keys(a, path + "/acov", {"kmin", "coeffs"});
    Acov acov;
    acov.kmin = static_cast<int>(int_at(need(a, "kmin", path + "/acov"), path + "/acov/kmin"));
    acov.coeffs = vec_at(need(a, "coeffs", path + "/acov"), path + "/acov/coeffs");
    if (acov.coeffs.empty()) fail(path + "/acov/coeffs", "empty coefficient list");
    return SpectralFunction::from_acov(std::move(acov));
  }
  const json& g = v["grid"];
  if (!g.is_array() || g.empty()) fail(path + "/grid", "expected a non-empty array");
  std::vector<std::complex<double>> samples;
  samples.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::string p = path + "/grid/" + std::to_string(i);
    if (g[i].is_number()) {
      samples.emplace_back(g[i].get<double>(), 0.0);
    } else if (g[i].is_array() && g[i].size() == 2) {
      samples.emplace_back(num_at(g[i][0], p + "/0"), num_at(g[i][1], p + "/1"));
    } else {
      fail(p, "expected a number or [re, im] pair");
    }
  }
  return SpectralFunction::from_grid(std::move(samples));
}

DiscreteJoint joint_at(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty 3D array");
  DiscreteJoint j;
  j.nx = static_cast<int>(v.size());
  for (std::size_t x = 0; x < v.size(); ++x) {
    const std::string px = path + "/" + std::to_string(x);
    if (!v[x].is_array() || v[x].empty()) fail(px, "expected a non-empty 2D array");
    if (x == 0) j.ny = static_cast<int>(v[x].size());
    if (static_cast<int>(v[x].size()) != j.ny) fail(px, "ragged pmf slab");
    for (std::size_t y = 0; y < v[x].size(); ++y) {
      const auto row = vec_at(v[x][y], px + "/" + std::to_string(y));
      if (x == 0 && y == 0) j.nz = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != j.nz)
        fail(px + "/" + std::to_string(y), "ragged pmf row");
      j.p.insert(j.p.end(), row.begin(), row.end());
    }
  }
  return j;
}

json dump_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json dump_spectral(const SpectralFunction& f) {
  json o = json::object();
  if (f.grid_backed()) {
    json g = json::array();
    for (int i = 0; i < f.grid_size(); ++i) {
      const auto v = f.eval(2.0 * M_PI * i / f.grid_size());
      if (v.imag() == 0.0)
        g.push_back(v.real());
      else
        g.push_back(json::array({v.real(), v.imag()}));
    }
    o["grid"] = std::move(g);
  } else {
    o["acov"] = json{{"kmin", f.acov().kmin}, {"coeffs", f.acov().coeffs}};
  }
  return o;
}

json dump_joint(const DiscreteJoint& j) {
  json cube = json::array();
  for (int x = 0; x < j.nx; ++x) {
    json slab = json::array();
    for (int y = 0; y < j.ny; ++y) {
      json row = json::array();
      for (int z = 0; z < j.nz; ++z) row.push_back(j.at(x, y, z));
      slab.push_back(std::move(row));
    }
    cube.push_back(std::move(slab));
  }
  return cube;
}

}  // namespace

ModelFile parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("/: model file must be a JSON object");

  ModelFile m;
  const json& kind = need(j, "kind", "");
  if (!kind.is_string()) fail("/kind", "expected a string");
  m.kind = kind.get<std::string>();

  if (j.contains("unit")) {
    const json& u = j["unit"];
    if (!u.is_string() || (u != "bits" && u != "nats"))
      fail("/unit", "expected 'bits' or 'nats'");
    m.unit = u == "bits" ? Unit::Bits : Unit::Nats;
  }

  if (m.kind == "scalar") {
    check_keys(j, "", {"kind", "unit", "rho_xy", "rho_xz"});
    ScalarGaussTriple t;
    t.rho_xy = num_at(need(j, "rho_xy", ""), "/rho_xy");
    t.rho_xz = num_at(need(j, "rho_xz", ""), "/rho_xz");
    validate(t);
    m.payload = t;
  } else if (m.kind == "product") {
    check_keys(j, "", {"kind", "unit", "betas"});
    m.payload = ProductGaussSource::from_betas(vec_at(need(j, "betas", ""), "/betas"));
  } else if (m.kind == "vector") {
    check_keys(j, "", {"kind", "unit", "sx", "sy", "sz", "sxy", "sxz"});
    GaussVectorModel g;
    g.sx = mat_at(need(j, "sx", ""), "/sx");
    g.sy = mat_at(need(j, "sy", ""), "/sy");
    g.sz = mat_at(need(j, "sz", ""), "/sz");
    g.sxy = mat_at(need(j, "sxy", ""), "/sxy");
    g.sxz = mat_at(need(j, "sxz", ""), "/sxz");
    validate(g);
    m.payload = g;
  } else if (m.kind == "spectrum") {
    check_keys(j, "", {"kind", "unit", "sx", "sy", "sz", "sxy", "sxz"});
    m.payload = make_spectrum_triple(parse_spectral(need(j, "sx", ""), "/sx"),
                                     parse_spectral(need(j, "sy", ""), "/sy"),
                                     parse_spectral(need(j, "sz", ""), "/sz"),
                                     parse_spectral(need(j, "sxy", ""), "/sxy"),
                                     parse_spectral(need(j, "sxz", ""), "/sxz"));
  } else if (m.kind == "discrete") {
    check_keys(j, "", {"kind", "unit", "pmf"});
    DiscreteJoint d = joint_at(need(j, "pmf", ""), "/pmf");
    validate(d);
    m.payload = d;
  } else if (m.kind == "oneshot") {
    check_keys(j, "", {"kind", "unit", "source", "channel", "m", "m1", "m2"});
    OneshotInstance inst;
    inst.source = joint_at(need(j, "source", ""), "/source");
    inst.channel = mat_at(need(j, "channel", ""), "/channel");
    inst.m = int_at(need(j, "m", ""), "/m");
    inst.m1 = int_at(need(j, "m1", ""), "/m1");
    inst.m2 = int_at(need(j, "m2", ""), "/m2");
    validate(inst);
    m.payload = inst;
  } else {
    fail("/kind", "unknown kind '" + m.kind + "'");
  }
  return m;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string serialize_model(const ModelFile& m) {
  json j;
  j["unit"] = m.unit == Unit::Bits ? "bits" : "nats";
  if (const auto* t = std::get_if<ScalarGaussTriple>(&m.payload)) {
    j["kind"] = "scalar";
    j["rho_xy"] = t->rho_xy;
    j["rho_xz"] = t->rho_xz;
  } else if (const auto* p = std::get_if<ProductGaussSource>(&m.payload)) {
    j["kind"] = "product";
    json betas = json::array();
    for (const auto& e : p->components) betas.push_back(e.beta);
    j["betas"] = std::move(betas);
  } else if (const auto* g = std::get_if<GaussVectorModel>(&m.payload)) {
    j["kind"] = "vector";
    j["sx"] = dump_matrix(g->sx);
    j["sy"] = dump_matrix(g->sy);
    j["sz"] = dump_matrix(g->sz);
    j["sxy"] = dump_matrix(g->sxy);
    j["sxz"] = dump_matrix(g->sxz);
  } else if (const auto* s = std::get_if<SpectrumTriple>(&m.payload)) {
    j["kind"] = "spectrum";
    j["sx"] = dump_spectral(s->sx);
    j["sy"] = dump_spectral(s->sy);
    j["sz"] = dump_spectral(s->sz);
    j["sxy"] = dump_spectral(s->sxy);
    j["sxz"] = dump_spectral(s->sxz);
  } else if (const auto* d = std::get_if<DiscreteJoint>(&m.payload)) {
    j["kind"] = "discrete";
    j["pmf"] = dump_joint(*d);
  } else if (const auto* o = std::get_if<OneshotInstance>(&m.payload)) {
    j["kind"] = "oneshot";
    j["source"] = dump_joint(o->source);
    j["channel"] = dump_matrix(o->channel);
    j["m"] = o->m;
    j["m1"] = o->m1;
    j["m2"] = o->m2;
  }
  return j.dump(2) + "\n";
}

}  // namespace skc
