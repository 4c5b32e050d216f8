#include "conevol/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "conevol/errors.hpp"
#include "conevol/kstab.hpp"
#include "conevol/ratgeom.hpp"
#include "conevol/reebopt.hpp"

namespace conevol::cli {
namespace {

using nlohmann::ordered_json;

// --------------------------------------------------------------- formatting

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  std::string r = s;
  if (r.size() < w) r.append(w - r.size(), ' ');
  return r;
}

std::string join_dvec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt17(v[i]);
  }
  return s + ")";
}

std::string join_qvec(const QVec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_rational(v[i]);
  }
  return s + ")";
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string r = "\"";
  for (char c : s) {
    if (c == '"') r += '"';
    r += c;
  }
  return r + "\"";
}

ordered_json jfloat(double x) { return fmt17(x); }
ordered_json jrat(const Rational& q) { return format_rational(q); }

ordered_json jdvec(const std::vector<double>& v) {
  auto a = ordered_json::array();
  for (double x : v) a.push_back(jfloat(x));
  return a;
}

ordered_json jqvec_rat(const QVec& v) {
  auto a = ordered_json::array();
  for (const Rational& q : v) a.push_back(jrat(q));
  return a;
}

ordered_json jqvec_int(const QVec& v) {
  auto a = ordered_json::array();
  for (const Rational& q : v) a.push_back(num(q).convert_to<long long>());
  return a;
}

std::vector<double> to_dvec(const QVec& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const Rational& q : v) out.push_back(q.convert_to<double>());
  return out;
}

// ------------------------------------------------------------- JSON helpers

const nlohmann::json& require_member(const nlohmann::json& j, const char* key, const char* where) {
  if (!j.contains(key))
    throw ParseError(std::string(where) + ": missing key \"" + key + "\"");
  return j.at(key);
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ParseError(std::string(where) + ": unknown key \"" + it.key() + "\"");
  }
}

long long require_int(const nlohmann::json& j, const char* where) {
  if (!j.is_number_integer())
    throw ParseError(std::string(where) + " must be a JSON integer");
  return j.get<long long>();
}

Rational require_rational(const nlohmann::json& j, const char* where) {
  if (!j.is_string())
    throw ParseError(std::string(where) +
                     " must be a rational written as a string, e.g. \"5/4\" (decimals are not accepted)");
  return parse_rational(j.get<std::string>());
}

QVec require_int_vector(const nlohmann::json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw ParseError(std::string(where) + " must be a nonempty array of integers");
  QVec out;
  for (const auto& e : j) out.emplace_back(require_int(e, where));
  return out;
}

QVec require_rational_vector(const nlohmann::json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw ParseError(std::string(where) + " must be a nonempty array of rational strings");
  QVec out;
  for (const auto& e : j) out.push_back(require_rational(e, where));
  return out;
}

}  // namespace

// ---------------------------------------------------------- input documents

bool InputDocument::operator==(const InputDocument& o) const {
  return kind == o.kind && rays == o.rays && tail == o.tail && terms == o.terms &&
         suss.k == o.suss.k && suss.m == o.suss.m && suss.mp == o.suss.mp &&
         suss.generic_positions == o.suss.generic_positions;
}

InputDocument parse_input(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("document must be a JSON object");
  const auto& kindj = require_member(j, "kind", "document");
  if (!kindj.is_string()) throw ParseError("\"kind\" must be a string");
  const std::string kind = kindj.get<std::string>();

  InputDocument doc;
  if (kind == "toric") {
    doc.kind = InputKind::toric;
    check_keys(j, {"kind", "rays"}, "toric document");
    const auto& rays = require_member(j, "rays", "toric document");
    if (!rays.is_array() || rays.empty())
      throw ParseError("\"rays\" must be a nonempty array of integer vectors");
    for (const auto& r : rays) doc.rays.push_back(require_int_vector(r, "ray"));
    for (const QVec& r : doc.rays)
      if (r.size() != doc.rays.front().size())
        throw ParseError("rays must all have the same dimension");
  } else if (kind == "complexity_one") {
    doc.kind = InputKind::complexity_one;
    check_keys(j, {"kind", "tail", "terms"}, "complexity_one document");
    const auto& tail = require_member(j, "tail", "complexity_one document");
    if (!tail.is_array() || tail.empty())
      throw ParseError("\"tail\" must be a nonempty array of integer vectors");
    for (const auto& r : tail) doc.tail.push_back(require_int_vector(r, "tail ray"));
    for (const QVec& r : doc.tail)
      if (r.size() != doc.tail.front().size())
        throw ParseError("tail rays must all have the same dimension");
    const auto& terms = require_member(j, "terms", "complexity_one document");
    if (!terms.is_array() || terms.empty())
      throw ParseError("\"terms\" must be a nonempty array of objects");
    for (const auto& t : terms) {
      if (!t.is_object()) throw ParseError("each term must be an object");
      check_keys(t, {"point", "vertices"}, "term");
      const auto& pj = require_member(t, "point", "term");
      if (!pj.is_string())
        throw ParseError("term \"point\" must be \"0\", \"inf\" or a rational string");
      DivisorTermDoc term;
      term.point = cxone::MarkedPoint::parse(pj.get<std::string>());
      const auto& vs = require_member(t, "vertices", "term");
      if (!vs.is_array() || vs.empty())
        throw ParseError("term \"vertices\" must be a nonempty array of rational vectors");
      for (const auto& v : vs) term.vertices.push_back(require_rational_vector(v, "vertex"));
      doc.terms.push_back(std::move(term));
    }
  } else if (kind == "suss_family") {
    doc.kind = InputKind::suss_family;
    check_keys(j, {"kind", "k", "m", "mp", "positions"}, "suss_family document");
    doc.suss.k =
        static_cast<int>(require_int(require_member(j, "k", "suss_family document"), "\"k\""));
    doc.suss.m = j.contains("m") ? static_cast<int>(require_int(j.at("m"), "\"m\"")) : 0;
    doc.suss.mp = j.contains("mp") ? static_cast<int>(require_int(j.at("mp"), "\"mp\"")) : 0;
    if (j.contains("positions")) {
      const auto& ps = j.at("positions");
      if (!ps.is_array())
        throw ParseError("\"positions\" must be an array of rational strings");
      for (const auto& p : ps) doc.suss.generic_positions.push_back(require_rational(p, "position"));
    } else {
      const long long g =
          static_cast<long long>(doc.suss.k) - doc.suss.m - doc.suss.mp;
      for (long long i = 1; i <= g; ++i) doc.suss.generic_positions.emplace_back(i);
    }
  } else {
    throw ParseError("unknown kind \"" + kind +
                     "\" (expected \"toric\", \"complexity_one\" or \"suss_family\")");
  }
  return doc;
}

std::string serialize_input(const InputDocument& doc) {
  ordered_json j;
  switch (doc.kind) {
    case InputKind::toric: {
      j["kind"] = "toric";
      auto rays = ordered_json::array();
      for (const QVec& r : doc.rays) rays.push_back(jqvec_int(r));
      j["rays"] = std::move(rays);
      break;
    }
    case InputKind::complexity_one: {
      j["kind"] = "complexity_one";
      auto tail = ordered_json::array();
      for (const QVec& r : doc.tail) tail.push_back(jqvec_int(r));
      j["tail"] = std::move(tail);
      auto terms = ordered_json::array();
      for (const DivisorTermDoc& t : doc.terms) {
        ordered_json tj;
        tj["point"] = t.point.str();
        auto vs = ordered_json::array();
        for (const QVec& v : t.vertices) vs.push_back(jqvec_rat(v));
        tj["vertices"] = std::move(vs);
        terms.push_back(std::move(tj));
      }
      j["terms"] = std::move(terms);
      break;
    }
    case InputKind::suss_family: {
      j["kind"] = "suss_family";
      j["k"] = doc.suss.k;
      j["m"] = doc.suss.m;
      j["mp"] = doc.suss.mp;
      auto ps = ordered_json::array();
      for (const Rational& p : doc.suss.generic_positions) ps.push_back(jrat(p));
      j["positions"] = std::move(ps);
      break;
    }
  }
  return j.dump(2) + "\n";
}

toric::ToricConeVariety build_toric(const InputDocument& doc) {
  if (doc.kind != InputKind::toric) throw InvalidParams("not a toric document");
  const int dim = static_cast<int>(doc.rays.front().size());
  return toric::make_toric(ratgeom::make_cone(dim, doc.rays));
}

cxone::PolyhedralDivisor build_divisor(const InputDocument& doc) {
  if (doc.kind == InputKind::suss_family) return cxone::suss_family(doc.suss);
  if (doc.kind != InputKind::complexity_one)
    throw InvalidParams("not a complexity-one document");
  const int dim = static_cast<int>(doc.tail.front().size());
  ratgeom::RationalCone tail = ratgeom::make_cone(dim, doc.tail);
  std::vector<std::pair<cxone::MarkedPoint, ratgeom::RationalPolyhedron>> terms;
  terms.reserve(doc.terms.size());
  for (const DivisorTermDoc& t : doc.terms)
    terms.emplace_back(t.point, ratgeom::make_polyhedron(dim, t.vertices, tail));
  return cxone::make_divisor(std::move(tail), std::move(terms));
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ------------------------------------------------------------------ engine

namespace {

struct InputOpts {
  std::string path;
  int k = -1;
  long long m = 0;
  long long mp = 0;
};

struct Loaded {
  InputDocument doc;
  std::string name;
  std::string digest;
};

struct Target {
  std::optional<toric::ToricConeVariety> X;
  std::optional<cxone::PolyhedralDivisor> D;
  int rank = 0;
};

Loaded load_input(const InputOpts& io) {
  const bool builtin = io.k >= 0 || io.m != 0 || io.mp != 0;
  if (!io.path.empty() && builtin)
    throw ParseError("choose either --input FILE or the built-in family flags --k/--m/--mp");
  if (io.path.empty() && !builtin)
    throw ParseError("an input is required: --input FILE or --k K [--m M] [--mp MP]");
  if (io.path.empty() && io.k < 0) throw ParseError("--m/--mp require --k");
  if (!io.path.empty()) {
    std::ifstream f(io.path, std::ios::binary);
    if (!f) throw ParseError("cannot read input file '" + io.path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string bytes = ss.str();
    return {parse_input(bytes), io.path, fnv1a_hex(bytes)};
  }
  InputDocument doc;
  doc.kind = InputKind::suss_family;
  doc.suss.k = io.k;
  doc.suss.m = static_cast<int>(io.m);
  doc.suss.mp = static_cast<int>(io.mp);
  const long long g = static_cast<long long>(io.k) - io.m - io.mp;
  for (long long i = 1; i <= g; ++i) doc.suss.generic_positions.emplace_back(i);
  char nm[64];
  std::snprintf(nm, sizeof(nm), "builtin:suss(k=%d,m=%lld,mp=%lld)", io.k, io.m, io.mp);
  return {std::move(doc), nm, fnv1a_hex(serialize_input(doc))};
}

Target build_target(const InputDocument& doc) {
  Target t;
  if (doc.kind == InputKind::toric) {
    t.X.emplace(build_toric(doc));
    t.rank = t.X->n;
  } else {
    t.D.emplace(build_divisor(doc));
    t.rank = t.D->rank;
  }
  return t;
}

reebopt::VolumeModel target_model(const Target& t) {
  return t.X ? reebopt::toric_model(*t.X) : cxone::cx1_model(*t.D);
}

// A^n * a0 at an exactly known Reeb field, with A = <gauge, xi>.
std::optional<Rational> exact_vhat(const reebopt::VolumeModel& M, const std::optional<QVec>& xi) {
  if (!xi) return std::nullopt;
  Rational A = 0;
  for (std::size_t i = 0; i < M.gauge.size(); ++i) A += M.gauge[i] * (*xi)[i];
  Rational v = reebopt::model_a0(M, *xi);
  for (int i = 0; i < M.n; ++i) v *= A;
  return v;
}

QVec parse_xi(const std::string& s, int rank) {
  QVec v;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b == std::string::npos) throw ParseError("--xi has an empty component");
    v.push_back(parse_rational(cur.substr(b, e - b + 1)));
    cur.clear();
  };
  for (char c : s) {
    if (c == ',')
      flush();
    else
      cur += c;
  }
  flush();
  if (static_cast<int>(v.size()) != rank)
    throw ParseError("--xi needs exactly " + std::to_string(rank) +
                     " comma-separated rationals for this input");
  return v;
}

reebopt::MinimizerReport resolve_reeb(const Target& t, const std::string& xi_str, double tol,
                                      int starts, std::string& source) {
  if (!xi_str.empty()) {
    const QVec xi = parse_xi(xi_str, t.rank);
    reebopt::MinimizerReport rep;
    rep.xi_star = to_dvec(xi);
    rep.quasiregular = xi;
    source = "given";
    return rep;
  }
  source = "volmin";
  return reebopt::minimize_volume(target_model(t), tol, starts);
}

// ---------------------------------------------------------- candidate rows

struct CandidateRow {
  std::string point;
  bool evaluated = false;
  kstab::DFReport df;
  std::string note;
  std::optional<kstab::DHMeasure> mu;
  double jna = 0;
};

// Mirrors the verdict policy row by row so tables and statuses agree:
// toric inputs get one product configuration per basis direction; divisor
// inputs get every candidate point, skipped as "improper"/"nonflat" when the
// degeneration fails, flagged "product" when its spectral measure is Dirac.
std::vector<CandidateRow> candidate_rows(const Target& t, const reebopt::MinimizerReport& rep,
                                         const Rational& constancy_cutoff, double dh_cutoff,
                                         bool with_measures) {
  std::vector<CandidateRow> rows;
  if (t.X) {
    for (int i = 0; i < t.X->n; ++i) {
      QVec eta(static_cast<std::size_t>(t.X->n), Rational(0));
      eta[static_cast<std::size_t>(i)] = 1;
      const cxone::SpecialTestConfig tc =
          kstab::product_config(*t.X, rep.xi_star, eta, rep.quasiregular);
      CandidateRow r;
      r.point = tc.source;
      r.evaluated = true;
      r.df = kstab::df_report(tc);
      r.note = "product";
      if (with_measures) {
        r.mu = kstab::dh_measure(tc, dh_cutoff);
        r.jna = r.mu->atoms.empty() ? 0.0 : kstab::jna_norm(*r.mu);
      }
      rows.push_back(std::move(r));
    }
    return rows;
  }
  const cxone::PolyhedralDivisor& D = *t.D;
  const QVec gate = cxone::interior_sample(D);
  for (const cxone::MarkedPoint& y : cxone::candidate_points(D)) {
    CandidateRow r;
    r.point = y.str();
    cxone::SpecialTestConfig tc;
    try {
      tc = cxone::degenerate_at(D, y, rep.xi_star, rep.quasiregular);
    } catch (const ImproperDegeneration&) {
      r.note = "improper";
      rows.push_back(std::move(r));
      continue;
    }
    if (!cxone::hilbert_constancy_check(D, tc, gate, constancy_cutoff).ok) {
      r.note = "nonflat";
      rows.push_back(std::move(r));
      continue;
    }
    r.evaluated = true;
    r.df = kstab::df_report(tc);
    const kstab::DHMeasure mu = kstab::dh_measure(tc, dh_cutoff);
    r.jna = mu.atoms.empty() ? 0.0 : kstab::jna_norm(mu);
    if (!mu.atoms.empty() && r.jna <= 1e-12) r.note = "product";
    if (with_measures) r.mu = mu;
    rows.push_back(std::move(r));
  }
  return rows;
}

kstab::Status target_status(const Target& t, const reebopt::MinimizerReport& rep,
                            const Rational& constancy_cutoff, double dh_cutoff) {
  if (t.X) return kstab::verdict(*t.X, rep).status;
  return kstab::verdict(*t.D, rep, constancy_cutoff, dh_cutoff).status;
}

// -------------------------------------------------------------- rendering

void emit_header(std::ostream& out, const char* command, const Loaded* L) {
  out << "conevol " << command << "\n";
  if (L) {
    out << "input   " << L->name << "\n";
    out << "digest  fnv1a:" << L->digest << "\n";
  }
  out << "\n";
}

ordered_json base_json(const char* command, const Loaded* L) {
  ordered_json j;
  j["command"] = command;
  if (L) {
    j["input"] = L->name;
    j["digest"] = "fnv1a:" + L->digest;
  }
  return j;
}

void emit_json(std::ostream& out, const ordered_json& j) { out << "JSON\n" << j.dump(2) << "\n"; }

void emit_minimizer_human(std::ostream& out, const reebopt::MinimizerReport& rep,
                          const std::optional<Rational>& vhat_exact) {
  out << "xi_star            " << join_dvec(rep.xi_star) << "\n";
  out << "vhat               " << fmt17(rep.vhat) << "\n";
  out << "vhat_exact         "
      << (vhat_exact ? format_rational(*vhat_exact) : std::string("none")) << "\n";
  out << "grad_residual      " << fmt17(rep.grad_residual) << "\n";
  out << "hessian_min_eigen  " << fmt17(rep.hessian_min_eigen) << "\n";
  out << "iterations         " << rep.iterations << "\n";
  out << "starts             " << rep.starts << "\n";
  out << "all_starts_agree   " << (rep.all_starts_agree ? "yes" : "no") << "\n";
  out << "quasiregular       "
      << (rep.quasiregular ? join_qvec(*rep.quasiregular) : std::string("none")) << "\n";
}

ordered_json minimizer_json(const reebopt::MinimizerReport& rep,
                            const std::optional<Rational>& vhat_exact) {
  ordered_json j;
  j["xi_star"] = jdvec(rep.xi_star);
  j["vhat"] = jfloat(rep.vhat);
  j["vhat_exact"] = vhat_exact ? jrat(*vhat_exact) : ordered_json(nullptr);
  j["grad_residual"] = jfloat(rep.grad_residual);
  j["hessian_min_eigen"] = jfloat(rep.hessian_min_eigen);
  j["iterations"] = rep.iterations;
  j["starts"] = rep.starts;
  j["all_starts_agree"] = rep.all_starts_agree;
  j["quasiregular"] = rep.quasiregular ? jqvec_rat(*rep.quasiregular) : ordered_json(nullptr);
  return j;
}

std::string sign_str(int s) { return s > 0 ? "+" : s < 0 ? "-" : "0"; }

void emit_df_table(std::ostream& out, const std::vector<CandidateRow>& rows) {
  std::size_t wp = 5;
  for (const CandidateRow& r : rows) wp = std::max(wp, r.point.size());
  wp += 2;
  out << pad("point", wp) << pad("df_volume", 28) << pad("df_ab", 28) << pad("sign", 6)
      << "note\n";
  for (const CandidateRow& r : rows) {
    const std::string note = r.note.empty() ? "-" : r.note;
    if (r.evaluated)
      out << pad(r.point, wp) << pad(fmt17(r.df.df_volume_route), 28)
          << pad(fmt17(r.df.df_ab_route), 28) << pad(sign_str(r.df.sign), 6) << note << "\n";
    else
      out << pad(r.point, wp) << pad("na", 28) << pad("na", 28) << pad("na", 6) << note << "\n";
  }
}

ordered_json df_rows_json(const std::vector<CandidateRow>& rows) {
  auto arr = ordered_json::array();
  for (const CandidateRow& r : rows) {
    ordered_json o;
    o["point"] = r.point;
    o["df_volume"] = r.evaluated ? jfloat(r.df.df_volume_route) : ordered_json(nullptr);
    o["df_ab"] = r.evaluated ? jfloat(r.df.df_ab_route) : ordered_json(nullptr);
    o["sign"] = r.evaluated ? ordered_json(r.df.sign) : ordered_json(nullptr);
    o["note"] = r.note;
    arr.push_back(std::move(o));
  }
  return arr;
}

void emit_reeb_lines(std::ostream& out, const std::string& source,
                     const reebopt::MinimizerReport& rep) {
  out << "reeb    " << source << "\n";
  out << "xi      " << join_dvec(rep.xi_star) << "\n";
  out << "exact   "
      << (rep.quasiregular ? join_qvec(*rep.quasiregular) : std::string("none")) << "\n\n";
}

// ---------------------------------------------------------------- commands

struct HilbertOpts {
  InputOpts in;
  std::string xi;
  std::string cutoff;
  bool csv = false;
};

void cmd_hilbert(const HilbertOpts& o, std::ostream& out) {
  const Loaded L = load_input(o.in);
  const Target t = build_target(L.doc);
  const QVec xi = parse_xi(o.xi, t.rank);
  const Rational cutoff = parse_rational(o.cutoff);
  const ratgeom::RationalCone& M = t.X ? t.X->dual : t.D->dual_tail;
  std::vector<QVec> pts;
  if (cutoff > 0) pts = ratgeom::lattice_points_under_level(M, xi, cutoff);
  std::sort(pts.begin(), pts.end(), ratgeom::lex_less);
  std::vector<std::pair<QVec, long long>> rows;
  rows.reserve(pts.size());
  for (const QVec& m : pts)
    rows.emplace_back(m, t.X ? 1LL : cxone::hilbert_dim(*t.D, m));
  if (o.csv) {
    out << "m,dim\n";
    for (const auto& [m, d] : rows) {
      std::string cell;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) cell += ' ';
        cell += num(m[i]).str();
      }
      out << csv_cell(cell) << "," << d << "\n";
    }
    return;
  }
  emit_header(out, "hilbert", &L);
  std::size_t wm = 8;
  for (const auto& [m, d] : rows) wm = std::max(wm, join_qvec(m).size());
  wm += 2;
  out << pad("m", wm) << "dim\n";
  for (const auto& [m, d] : rows) out << pad(join_qvec(m), wm) << d << "\n";
  out << "rows    " << rows.size() << "\n";
  ordered_json j = base_json("hilbert", &L);
  ordered_json params;
  params["xi"] = jqvec_rat(xi);
  params["cutoff"] = jrat(cutoff);
  j["parameters"] = std::move(params);
  auto arr = ordered_json::array();
  for (const auto& [m, d] : rows) {
    ordered_json row;
    row["m"] = jqvec_int(m);
    row["dim"] = d;
    arr.push_back(std::move(row));
  }
  ordered_json res;
  res["rows"] = std::move(arr);
  res["count"] = rows.size();
  j["results"] = std::move(res);
  emit_json(out, j);
}

struct SolveOpts {
  InputOpts in;
  double tol = 1e-10;
  int starts = 8;
};

void cmd_volmin(const SolveOpts& o, std::ostream& out) {
  const Loaded L = load_input(o.in);
  const Target t = build_target(L.doc);
  const reebopt::VolumeModel M = target_model(t);
  const reebopt::MinimizerReport rep = reebopt::minimize_volume(M, o.tol, o.starts);
  const std::optional<Rational> ve = exact_vhat(M, rep.quasiregular);
  emit_header(out, "volmin", &L);
  emit_minimizer_human(out, rep, ve);
  ordered_json j = base_json("volmin", &L);
  ordered_json params;
  params["tol"] = jfloat(o.tol);
  params["starts"] = o.starts;
  j["parameters"] = std::move(params);
  j["results"] = minimizer_json(rep, ve);
  emit_json(out, j);
}

struct DfOpts {
  InputOpts in;
  std::string xi;
  double tol = 1e-10;
  int starts = 8;
};

void cmd_df(const DfOpts& o, std::ostream& out) {
  const Loaded L = load_input(o.in);
  const Target t = build_target(L.doc);
  std::string source;
  const reebopt::MinimizerReport rep = resolve_reeb(t, o.xi, o.tol, o.starts, source);
  const auto rows = candidate_rows(t, rep, Rational(50), 50.0, false);
  emit_header(out, "df", &L);
  emit_reeb_lines(out, source, rep);
  emit_df_table(out, rows);
  ordered_json j = base_json("df", &L);
  ordered_json params;
  params["reeb"] = source;
  params["xi"] = jdvec(rep.xi_star);
  params["xi_exact"] = rep.quasiregular ? jqvec_rat(*rep.quasiregular) : ordered_json(nullptr);
  j["parameters"] = std::move(params);
  ordered_json res;
  res["rows"] = df_rows_json(rows);
  j["results"] = std::move(res);
  emit_json(out, j);
}

struct VerdictOpts {
  InputOpts in;
  std::string cutoff = "50";
  double tol = 1e-10;
  int starts = 8;
};

void cmd_verdict(const VerdictOpts& o, std::ostream& out) {
  const Loaded L = load_input(o.in);
  const Target t = build_target(L.doc);
  const Rational cc = parse_rational(o.cutoff);
  const reebopt::VolumeModel M = target_model(t);
  const reebopt::MinimizerReport rep = reebopt::minimize_volume(M, o.tol, o.starts);
  const std::optional<Rational> ve = exact_vhat(M, rep.quasiregular);
  const double ccd = cc.convert_to<double>();
  const auto rows = candidate_rows(t, rep, cc, ccd, false);
  const kstab::Status st = target_status(t, rep, cc, ccd);
  emit_header(out, "verdict", &L);
  emit_minimizer_human(out, rep, ve);
  out << "\n";
  emit_df_table(out, rows);
  out << "\nstatus  " << kstab::status_name(st) << "\n";
  ordered_json j = base_json("verdict", &L);
  ordered_json params;
  params["cutoff"] = jrat(cc);
  params["tol"] = jfloat(o.tol);
  params["starts"] = o.starts;
  j["parameters"] = std::move(params);
  ordered_json res;
  res["minimizer"] = minimizer_json(rep, ve);
  res["rows"] = df_rows_json(rows);
  res["status"] = kstab::status_name(st);
  j["results"] = std::move(res);
  emit_json(out, j);
}

struct DhOpts {
  InputOpts in;
  std::string xi;
  std::string cutoff = "50";
  double tol = 1e-10;
  int starts = 8;
  bool csv = false;
};

void cmd_dh(const DhOpts& o, std::ostream& out) {
  const Loaded L = load_input(o.in);
  const Target t = build_target(L.doc);
  std::string source;
  const reebopt::MinimizerReport rep = resolve_reeb(t, o.xi, o.tol, o.starts, source);
  const Rational cc = parse_rational(o.cutoff);
  const auto rows = candidate_rows(t, rep, Rational(50), cc.convert_to<double>(), true);
  if (o.csv) {
    out << "point,location,mass\n";
    for (const CandidateRow& r : rows) {
      if (!r.mu) continue;
      for (const kstab::DHAtom& a : r.mu->atoms)
        out << csv_cell(r.point) << "," << fmt17(a.location) << "," << fmt17(a.mass) << "\n";
    }
    return;
  }
  emit_header(out, "dh", &L);
  emit_reeb_lines(out, source, rep);
  for (const CandidateRow& r : rows) {
    if (!r.mu) {
      out << "point " << r.point << "  skipped (" << r.note << ")\n\n";
      continue;
    }
    double mass = 0;
    for (const kstab::DHAtom& a : r.mu->atoms) mass += a.mass;
    out << "point " << r.point << "  atoms " << r.mu->atoms.size() << "  mass " << fmt17(mass)
        << "  jna " << fmt17(r.jna) << "\n";
    out << "  " << pad("location", 28) << "mass\n";
    for (const kstab::DHAtom& a : r.mu->atoms)
      out << "  " << pad(fmt17(a.location), 28) << fmt17(a.mass) << "\n";
    out << "\n";
  }
  ordered_json j = base_json("dh", &L);
  ordered_json params;
  params["reeb"] = source;
  params["xi"] = jdvec(rep.xi_star);
  params["xi_exact"] = rep.quasiregular ? jqvec_rat(*rep.quasiregular) : ordered_json(nullptr);
  params["cutoff"] = jrat(cc);
  j["parameters"] = std::move(params);
  auto arr = ordered_json::array();
  for (const CandidateRow& r : rows) {
    ordered_json o2;
    o2["point"] = r.point;
    if (r.mu) {
      auto atoms = ordered_json::array();
      for (const kstab::DHAtom& a : r.mu->atoms) {
        ordered_json aj;
        aj["location"] = jfloat(a.location);
        aj["mass"] = jfloat(a.mass);
        atoms.push_back(std::move(aj));
      }
      o2["atoms"] = std::move(atoms);
      o2["jna"] = jfloat(r.jna);
    } else {
      o2["atoms"] = nullptr;
      o2["jna"] = nullptr;
    }
    o2["note"] = r.note;
    arr.push_back(std::move(o2));
  }
  ordered_json res;
  res["measures"] = std::move(arr);
  j["results"] = std::move(res);
  emit_json(out, j);
}

struct BoundsOpts {
  int n = 0;
  std::string vhat;
  long long gamma = -1;
};

void cmd_bounds(const BoundsOpts& o, std::ostream& out) {
  if (o.vhat.empty() && o.gamma < 0)
    throw ParseError("bounds needs --vhat and/or --gamma");
  emit_header(out, "bounds", nullptr);
  ordered_json j = base_json("bounds", nullptr);
  ordered_json res;
  if (!o.vhat.empty()) {
    const Rational v = parse_rational(o.vhat);
    const Rational b = kstab::liu_bound(o.n, v);
    out << "liu(n=" << o.n << ", vhat=" << format_rational(v) << ")  =  " << format_rational(b)
        << "  (" << fmt17(b.convert_to<double>()) << ")\n";
    ordered_json lj;
    lj["n"] = o.n;
    lj["vhat"] = jrat(v);
    lj["bound"] = jrat(b);
    lj["bound_float"] = jfloat(b.convert_to<double>());
    res["liu"] = std::move(lj);
  } else {
    res["liu"] = nullptr;
  }
  if (o.gamma >= 0) {
    const Rational b = kstab::bishop_gromov_bound(o.n, Integer(o.gamma));
    out << "bishop_gromov(n=" << o.n << ", order=" << o.gamma << ")  =  " << format_rational(b)
        << "  (" << fmt17(b.convert_to<double>()) << ")\n";
    ordered_json bj;
    bj["n"] = o.n;
    bj["order"] = o.gamma;
    bj["bound"] = jrat(b);
    bj["bound_float"] = jfloat(b.convert_to<double>());
    res["bishop_gromov"] = std::move(bj);
  } else {
    res["bishop_gromov"] = nullptr;
  }
  j["results"] = std::move(res);
  emit_json(out, j);
}

struct SweepOpts {
  int k = 2;
  std::string cutoff = "50";
  double tol = 1e-10;
  int starts = 8;
  bool csv = false;
};

struct SweepCell {
  int m = 0;
  int mp = 0;
  kstab::Status status = kstab::Status::polystable_relative;
  std::vector<CandidateRow> rows;
  reebopt::MinimizerReport rep;
  std::optional<Rational> vhat_exact;
  std::exception_ptr error;
};

void compute_cell(SweepCell& cell, int k, const Rational& cc, double tol, int starts) {
  try {
    cxone::SussFamilyParams p;
    p.k = k;
    p.m = cell.m;
    p.mp = cell.mp;
    for (int i = 1; i <= k - cell.m - cell.mp; ++i) p.generic_positions.emplace_back(i);
    Target t;
    t.D.emplace(cxone::suss_family(p));
    t.rank = t.D->rank;
    const reebopt::VolumeModel M = cxone::cx1_model(*t.D);
    cell.rep = reebopt::minimize_volume(M, tol, starts);
    cell.vhat_exact = exact_vhat(M, cell.rep.quasiregular);
    const double ccd = cc.convert_to<double>();
    cell.rows = candidate_rows(t, cell.rep, cc, ccd, false);
    cell.status = target_status(t, cell.rep, cc, ccd);
  } catch (...) {
    cell.error = std::current_exception();
  }
}

unsigned sweep_threads(std::size_t cells) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("CONEVOL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 256) hw = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(hw, cells));
}

std::string pole_mark(const SweepCell& c, const char* pt) {
  for (const CandidateRow& r : c.rows)
    if (r.point == pt) return r.evaluated ? sign_str(r.df.sign) : r.note;
  return "na";
}

void cmd_sweep(const SweepOpts& o, std::ostream& out) {
  const Rational cc = parse_rational(o.cutoff);
  std::vector<SweepCell> cells;
  for (int m = 0; m <= o.k; ++m)
    for (int mp = 0; m + mp <= o.k; ++mp) {
      SweepCell c;
      c.m = m;
      c.mp = mp;
      cells.push_back(std::move(c));
    }
  const unsigned T = sweep_threads(cells.size());
  if (T <= 1) {
    for (SweepCell& c : cells) compute_cell(c, o.k, cc, o.tol, o.starts);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(T);
    for (unsigned i = 0; i < T; ++i)
      pool.emplace_back([&cells, &next, &o, &cc] {
        for (std::size_t idx = next.fetch_add(1); idx < cells.size(); idx = next.fetch_add(1))
          compute_cell(cells[idx], o.k, cc, o.tol, o.starts);
      });
    for (std::thread& th : pool) th.join();
  }
  for (const SweepCell& c : cells)
    if (c.error) std::rethrow_exception(c.error);
  if (o.csv) {
    out << "m,mp,status,df0,dfinf,vhat\n";
    for (const SweepCell& c : cells)
      out << c.m << "," << c.mp << "," << kstab::status_name(c.status) << ","
          << pole_mark(c, "0") << "," << pole_mark(c, "inf") << "," << fmt17(c.rep.vhat)
          << "\n";
    return;
  }
  out << "conevol sweep-suss\n";
  out << "family  k=" << o.k << "\n\n";
  out << pad("m", 4) << pad("mp", 4) << pad("status", 27) << pad("df0", 6) << pad("dfinf", 8)
      << "vhat\n";
  for (const SweepCell& c : cells)
    out << pad(std::to_string(c.m), 4) << pad(std::to_string(c.mp), 4)
        << pad(kstab::status_name(c.status), 27) << pad(pole_mark(c, "0"), 6)
        << pad(pole_mark(c, "inf"), 8) << fmt17(c.rep.vhat) << "\n";
  ordered_json j = base_json("sweep-suss", nullptr);
  ordered_json params;
  params["k"] = o.k;
  params["cutoff"] = jrat(cc);
  params["tol"] = jfloat(o.tol);
  params["starts"] = o.starts;
  j["parameters"] = std::move(params);
  auto arr = ordered_json::array();
  for (const SweepCell& c : cells) {
    ordered_json cj;
    cj["m"] = c.m;
    cj["mp"] = c.mp;
    cj["status"] = kstab::status_name(c.status);
    cj["minimizer"] = minimizer_json(c.rep, c.vhat_exact);
    cj["rows"] = df_rows_json(c.rows);
    arr.push_back(std::move(cj));
  }
  ordered_json res;
  res["cells"] = std::move(arr);
  j["results"] = std::move(res);
  emit_json(out, j);
}

// --------------------------------------------------------------- dispatch

void add_input_flags(CLI::App* c, InputOpts& io) {
  c->add_option("--input", io.path, "JSON input document");
  c->add_option("--k", io.k, "built-in family: number of segment summands");
  c->add_option("--m", io.m, "built-in family: collisions at zero");
  c->add_option("--mp", io.mp, "built-in family: collisions at infinity");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact K-stability toolkit for Fano cone singularities"};
  app.name("conevol");
  app.require_subcommand(1);

  HilbertOpts ho;
  SolveOpts vo;
  DfOpts dfo;
  VerdictOpts veo;
  DhOpts dho;
  BoundsOpts bo;
  SweepOpts so;

  CLI::App* ch = app.add_subcommand("hilbert", "weight-space dimensions under a Reeb level");
  add_input_flags(ch, ho.in);
  ch->add_option("--xi", ho.xi, "Reeb field, comma-separated rationals")->required();
  ch->add_option("--cutoff", ho.cutoff, "level cutoff, rational")->required();
  ch->add_flag("--csv", ho.csv, "emit CSV only");

  CLI::App* cv = app.add_subcommand("volmin", "minimize the normalized volume");
  add_input_flags(cv, vo.in);
  cv->add_option("--tol", vo.tol, "slice-gradient tolerance");
  cv->add_option("--starts", vo.starts, "optimizer starts");

  CLI::App* cd = app.add_subcommand("df", "Donaldson-Futaki values of the candidates");
  add_input_flags(cd, dfo.in);
  cd->add_option("--xi", dfo.xi, "evaluate at this Reeb field instead of the minimizer");
  cd->add_option("--tol", dfo.tol, "slice-gradient tolerance");
  cd->add_option("--starts", dfo.starts, "optimizer starts");

  CLI::App* ce = app.add_subcommand("verdict", "stability verdict at the volume minimizer");
  add_input_flags(ce, veo.in);
  ce->add_option("--cutoff", veo.cutoff, "flatness and measure level cutoff, rational");
  ce->add_option("--tol", veo.tol, "slice-gradient tolerance");
  ce->add_option("--starts", veo.starts, "optimizer starts");

  CLI::App* cm = app.add_subcommand("dh", "spectral measures of the candidates");
  add_input_flags(cm, dho.in);
  cm->add_option("--xi", dho.xi, "evaluate at this Reeb field instead of the minimizer");
  cm->add_option("--cutoff", dho.cutoff, "atom level cutoff, rational");
  cm->add_option("--tol", dho.tol, "slice-gradient tolerance");
  cm->add_option("--starts", dho.starts, "optimizer starts");
  cm->add_flag("--csv", dho.csv, "emit CSV only");

  CLI::App* cb = app.add_subcommand("bounds", "volume upper bounds");
  cb->add_option("--n", bo.n, "complex dimension")->required()->check(CLI::Range(1, 32));
  cb->add_option("--vhat", bo.vhat, "normalized volume, rational");
  cb->add_option("--gamma", bo.gamma, "order of the local fundamental group");

  CLI::App* cs = app.add_subcommand("sweep-suss", "verdict sweep over the built-in family");
  cs->add_option("--k", so.k, "number of segment summands")->check(CLI::Range(1, 4));
  cs->add_option("--cutoff", so.cutoff, "flatness and measure level cutoff, rational");
  cs->add_option("--tol", so.tol, "slice-gradient tolerance");
  cs->add_option("--starts", so.starts, "optimizer starts");
  cs->add_flag("--csv", so.csv, "emit CSV only");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("conevol");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  if (app.got_subcommand(ch))
    cmd_hilbert(ho, out);
  else if (app.got_subcommand(cv))
    cmd_volmin(vo, out);
  else if (app.got_subcommand(cd))
    cmd_df(dfo, out);
  else if (app.got_subcommand(ce))
    cmd_verdict(veo, out);
  else if (app.got_subcommand(cm))
    cmd_dh(dho, out);
  else if (app.got_subcommand(cb))
    cmd_bounds(bo, out);
  else
    cmd_sweep(so, out);
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    code = dispatch(args, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    code = e.kind() == ErrorKind::Parse ? 2 : e.kind() == ErrorKind::Domain ? 3 : 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 1;
  }
  const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - t0;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "wall_ms %.3f", ms.count());
  err << buf << "\n";
  return code;
}

}  // namespace conevol::cli
