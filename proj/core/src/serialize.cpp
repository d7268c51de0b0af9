#include "kmtc/serialize.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "kmtc/errors.hpp"

namespace kmtc {

namespace {

std::string fraction_pow2(std::uint64_t num, unsigned log2_den) {
  // num / 2^log2_den reduced to lowest terms.
  std::uint64_t den = std::uint64_t{1} << log2_den;
  if (num == 0) return "0";
  while (num % 2 == 0 && den > 1) {
    num /= 2;
    den /= 2;
  }
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

const char* kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::poly_gaussian: return "poly_gaussian";
    case FamilyKind::smoothed_compact: return "smoothed_compact";
    case FamilyKind::conv_power: return "conv_power";
  }
  return "?";
}

FamilyKind kind_from_name(const std::string& s) {
  if (s == "gaussian") return FamilyKind::gaussian;
  if (s == "poly_gaussian") return FamilyKind::poly_gaussian;
  if (s == "smoothed_compact") return FamilyKind::smoothed_compact;
  if (s == "conv_power") return FamilyKind::conv_power;
  throw NumericError("family: unknown kind '" + s + "'");
}

Json base_to_json(const BaseDensity& b) {
  Json j;
  j["shape"] = b.shape;
  if (b.shape == "samples") {
    j["grid"] = Json{{"lo", b.sample_grid.lo},
                     {"hi", b.sample_grid.hi},
                     {"n", b.sample_grid.n}};
    j["samples"] = b.samples;
  } else {
    j["half_width"] = b.half_width;
  }
  return j;
}

BaseDensity base_from_json(const Json& j) {
  BaseDensity b;
  b.shape = j.value("shape", std::string("raised_cosine"));
  if (b.shape == "samples") {
    if (!j.contains("grid") || !j.contains("samples"))
      throw NumericError("base density: 'samples' needs grid and samples");
    const Json& g = j.at("grid");
    b.sample_grid = Grid{g.at("lo").get<double>(), g.at("hi").get<double>(),
                         g.at("n").get<std::size_t>()};
    b.samples = j.at("samples").get<std::vector<double>>();
    if (b.samples.size() != b.sample_grid.n)
      throw NumericError("base density: samples/grid size mismatch");
  } else {
    b.half_width = j.value("half_width", 1.0);
    if (!(b.half_width > 0.0))
      throw NumericError("base density: half_width must be positive");
  }
  return b;
}

std::vector<std::string> path_header(unsigned d) {
  std::vector<std::string> h;
  h.emplace_back("k");
  for (unsigned c = 1; c <= d; ++c) h.push_back("x_" + std::to_string(c));
  for (unsigned c = 1; c <= d; ++c) h.push_back("y_" + std::to_string(c));
  h.emplace_back("disc");
  return h;
}

void write_path_rows(std::ostream& os, unsigned d, std::uint64_t rows,
                     const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<double>& disc) {
  write_csv_row(os, path_header(d));
  std::vector<std::string> cells;
  for (std::uint64_t i = 0; i < rows; ++i) {
    cells.clear();
    cells.push_back(std::to_string(i + 1));
    for (unsigned c = 0; c < d; ++c) cells.push_back(format_double(x[i * d + c]));
    for (unsigned c = 0; c < d; ++c) cells.push_back(format_double(y[i * d + c]));
    cells.push_back(format_double(disc[i]));
    write_csv_row(os, cells);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(cells[i]);
  }
  os << '\n';
}

Json family_to_json(const FamilySpec1D& spec) {
  Json j;
  j["kind"] = kind_name(spec.kind);
  switch (spec.kind) {
    case FamilyKind::gaussian:
      j["var"] = spec.var;
      break;
    case FamilyKind::poly_gaussian:
      j["tau"] = spec.tau;
      j["d_param"] = spec.d_param;
      break;
    case FamilyKind::smoothed_compact:
      j["b2"] = spec.b2;
      j["inner"] = spec.inner ? family_to_json(*spec.inner) : Json(nullptr);
      break;
    case FamilyKind::conv_power:
      j["base"] = base_to_json(spec.base);
      j["m"] = spec.m;
      break;
  }
  j["scale"] = spec.scale;
  j["shift"] = spec.shift;
  return j;
}

FamilySpec1D family_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw NumericError("family: expected an object with a 'kind' field");
  FamilySpec1D spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  switch (spec.kind) {
    case FamilyKind::gaussian:
      spec.var = j.value("var", 1.0);
      if (!(spec.var > 0.0)) throw NumericError("family: var must be positive");
      break;
    case FamilyKind::poly_gaussian:
      spec.tau = j.value("tau", 0.5);
      spec.d_param = j.value("d_param", 1);
      if (spec.tau < 0.0) throw NumericError("family: tau must be >= 0");
      if (spec.d_param < 1) throw NumericError("family: d_param must be >= 1");
      break;
    case FamilyKind::smoothed_compact: {
      spec.b2 = j.value("b2", 0.25);
      if (!(spec.b2 > 0.0)) throw NumericError("family: b2 must be positive");
      if (!j.contains("inner"))
        throw NumericError("family: smoothed_compact needs 'inner'");
      spec.inner = std::make_shared<const FamilySpec1D>(
          family_from_json(j.at("inner")));
      break;
    }
    case FamilyKind::conv_power:
      if (!j.contains("base"))
        throw NumericError("family: conv_power needs 'base'");
      spec.base = base_from_json(j.at("base"));
      spec.m = j.value("m", std::uint64_t{1});
      if (spec.m < 1) throw NumericError("family: m must be >= 1");
      break;
  }
  spec.scale = j.value("scale", 1.0);
  spec.shift = j.value("shift", 0.0);
  if (!(spec.scale > 0.0)) throw NumericError("family: scale must be positive");
  return spec;
}

Json product_to_json(const ProductFamily& fam) {
  Json coords = Json::array();
  for (const auto& c : fam.coords) coords.push_back(family_to_json(c));
  return Json{{"coords", std::move(coords)}};
}

ProductFamily product_from_json(const Json& j) {
  ProductFamily fam;
  if (j.is_object() && j.contains("coords")) {
    for (const auto& c : j.at("coords")) fam.coords.push_back(family_from_json(c));
  } else if (j.is_object() && j.contains("spec")) {
    const unsigned d = j.value("d", 1u);
    if (d < 1) throw NumericError("family: d must be >= 1");
    fam = replicate(family_from_json(j.at("spec")), d);
  } else {
    // A bare spec object counts as d = 1.
    fam = replicate(family_from_json(j), 1);
  }
  if (fam.coords.empty()) throw NumericError("family: no coordinates");
  return fam;
}

Json grid_policy_to_json(const GridPolicy& gp) {
  return Json{{"radius_sigma", gp.radius_sigma},
              {"n_points", gp.n_points},
              {"max_points", gp.max_points}};
}

GridPolicy grid_policy_from_json(const Json& j) {
  GridPolicy gp;
  gp.radius_sigma = j.value("radius_sigma", gp.radius_sigma);
  gp.n_points = j.value("n_points", gp.n_points);
  gp.max_points = j.value("max_points", gp.max_points);
  if (!(gp.radius_sigma > 0.0) || gp.n_points < 64)
    throw NumericError("grid policy: radius_sigma > 0 and n_points >= 64");
  return gp;
}

Json probe_to_json(const ProbeReport& rep) {
  Json j;
  j["name"] = rep.name;
  j["pass"] = rep.pass;
  j["worst_margin"] = rep.worst_margin;
  Json fitted = Json::object();
  for (const auto& [k, v] : rep.fitted) fitted[k] = v;
  j["fitted"] = std::move(fitted);
  j["notes"] = rep.notes;
  Json pts = Json::array();
  for (const auto& p : rep.points) {
    pts.push_back(Json{{"x", p.x},
                       {"empirical", p.empirical},
                       {"bound", p.bound},
                       {"margin", p.margin}});
  }
  j["points"] = std::move(pts);
  return j;
}

void write_probe_rows(std::ostream& os, const ProbeReport& rep) {
  for (const auto& p : rep.points) {
    write_csv_row(os, {rep.name, format_double(p.x), format_double(p.empirical),
                       format_double(p.bound), format_double(p.margin)});
  }
}

Json class_report_to_json(const ClassReport& rep) {
  Json j;
  j["family"] = rep.family_id;
  j["tau_hat"] = rep.tau_hat;
  j["var_normalizer"] = rep.var_normalizer;
  j["max_third"] = rep.max_third;
  j["z_radius"] = rep.z_radius_used;
  Json w = Json::array();
  for (const auto& x : rep.witnesses)
    w.push_back(Json{{"z", x.z}, {"third", x.third}});
  j["witnesses"] = std::move(w);
  return j;
}

void write_coupling_csv(std::ostream& os, const CouplingOutput& out) {
  const std::uint64_t rows = std::uint64_t{1} << out.N;
  write_path_rows(os, out.d, rows, out.x, out.y, out.disc);
}

void write_chain_csv(std::ostream& os, const ChainOutput& out) {
  write_path_rows(os, out.d, out.total_count, out.x, out.y, out.disc);
}

Json decomposition_to_json(const Decomposition& dec) {
  Json j;
  j["m"] = dec.m;
  j["N"] = dec.N;
  j["r"] = dec.r;
  j["global_coeff"] = dec.global_coeff;
  j["global_coeff_exact"] = fraction_pow2(dec.m, dec.N);
  Json terms = Json::array();
  for (const auto& t : dec.terms) {
    const std::uint64_t num =
        static_cast<std::uint64_t>(std::llround(t.gamma * std::ldexp(1.0, t.n)));
    terms.push_back(Json{{"n", t.n},
                         {"k", t.k},
                         {"gamma", t.gamma},
                         {"gamma_exact", fraction_pow2(num, t.n)}});
  }
  j["terms"] = std::move(terms);
  return j;
}

std::string decomposition_text(const Decomposition& dec) {
  std::ostringstream os;
  os << "S_" << dec.m << " = " << fraction_pow2(dec.m, dec.N) << "*S["
     << (std::uint64_t{1} << dec.N) << "]";
  for (const auto& t : dec.terms) {
    const std::uint64_t num =
        static_cast<std::uint64_t>(std::llround(t.gamma * std::ldexp(1.0, t.n)));
    os << " + " << fraction_pow2(num, t.n) << "*D[" << t.n << "," << t.k << "]";
  }
  return os.str();
}

}  // namespace kmtc
