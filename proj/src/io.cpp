#include "fofpls/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fofpls/error.hpp"

namespace fofpls {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  if (first < last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(ErrorKind::Parse, where + ": cannot parse '" + cell + "' as a number");
  if (!std::isfinite(v)) throw Error(ErrorKind::Parse, where + ": non-finite value '" + cell + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& cell, const std::string& what) {
  const std::string t = trim(cell);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw Error(ErrorKind::Parse, "cannot parse '" + cell + "' as " + what);
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw Error(ErrorKind::Parse, "matrix entry count does not match its shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json terms_to_json(const TermSet& terms) {
  json inter = json::array();
  for (auto [m, n] : terms.inter) inter.push_back({m, n});
  return json{{"main", terms.main}, {"inter", std::move(inter)}};
}

TermSet terms_from_json(const json& j) {
  TermSet t;
  t.main = j.at("main").get<std::vector<int>>();
  for (const auto& p : j.at("inter")) t.inter.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  return t;
}

json basis_to_json(const BasisSystem& b) {
  return json{{"size", b.size()}, {"order", b.order()}, {"knots", vector_to_json(b.knots())},
              {"grid", vector_to_json(b.grid().points())}};
}

std::shared_ptr<const BasisSystem> basis_from_json(const json& j) {
  auto b = std::make_shared<const BasisSystem>(j.at("size").get<int>(), j.at("order").get<int>(),
                                               Grid(vector_from_json(j.at("grid"))));
  if (b->knots() != vector_from_json(j.at("knots")))
    throw Error(ErrorKind::Parse, "stored knots do not match the rebuilt basis");
  return b;
}

}  // namespace

CurveTable read_curves_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::string name = path.string();
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, name + ": empty file");
  auto header = split(line, ',');
  if (header.size() < 3 || trim(header[0]) != "id")
    throw Error(ErrorKind::Parse, name + ": header must be 'id' followed by at least two grid points");
  Eigen::VectorXd pts(static_cast<Eigen::Index>(header.size() - 1));
  for (std::size_t j = 1; j < header.size(); ++j)
    pts[static_cast<Eigen::Index>(j - 1)] = parse_double(header[j], name + ":1");
  Grid grid = [&] {
    try {
      return Grid(pts);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidGrid, name + ": " + e.what());
    }
  }();

  CurveTable table;
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = name + ":" + std::to_string(line_no);
    if (cells.size() != header.size())
      throw Error(ErrorKind::GridMismatch, where + ": expected " + std::to_string(header.size()) + " fields, found " +
                                               std::to_string(cells.size()));
    table.ids.push_back(cells[0]);
    std::vector<double> row;
    for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_double(cells[j], where));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::Parse, name + ": no curves");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index j = 0; j < grid.size(); ++j) values(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  table.sample = FunctionalSample{std::move(grid), std::move(values), path.stem().string()};
  return table;
}

std::string curves_to_csv(const CurveTable& table) {
  const auto& s = table.sample;
  if (static_cast<Eigen::Index>(table.ids.size()) != s.num_curves())
    throw Error(ErrorKind::ShapeMismatch, "id count does not match curve count");
  std::string out = "id";
  for (Eigen::Index j = 0; j < s.grid.size(); ++j) out += "," + format_double(s.grid[j]);
  out += "\n";
  for (Eigen::Index i = 0; i < s.num_curves(); ++i) {
    out += table.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) out += "," + format_double(s.values(i, j));
    out += "\n";
  }
  return out;
}

std::string curves_to_csv(const FunctionalSample& sample) {
  CurveTable t;
  for (Eigen::Index i = 0; i < sample.num_curves(); ++i) t.ids.push_back(std::to_string(i + 1));
  t.sample = sample;
  return curves_to_csv(t);
}

void write_curves_csv(const std::filesystem::path& path, const CurveTable& table) {
  atomic_write(path, curves_to_csv(table));
}

void write_curves_csv(const std::filesystem::path& path, const FunctionalSample& sample) {
  atomic_write(path, curves_to_csv(sample));
}

TermSet parse_terms(const std::string& text) {
  TermSet terms;
  bool seen_main = false, seen_inter = false;
  for (const auto& raw : split(text, ';')) {
    const std::string part = trim(raw);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Parse, "term group '" + part + "' lacks '='");
    const std::string key = trim(part.substr(0, eq));
    const std::string body = trim(part.substr(eq + 1));
    if (key == "main") {
      if (seen_main) throw Error(ErrorKind::Parse, "'main' given twice");
      seen_main = true;
      if (!body.empty())
        for (const auto& c : split(body, ',')) terms.main.push_back(parse_int(c, "a predictor index"));
    } else if (key == "inter") {
      if (seen_inter) throw Error(ErrorKind::Parse, "'inter' given twice");
      seen_inter = true;
      if (!body.empty())
        for (const auto& c : split(body, ',')) {
          const auto ab = split(c, ':');
          if (ab.size() != 2) throw Error(ErrorKind::Parse, "interaction '" + c + "' must look like m:n");
          int m = parse_int(ab[0], "a predictor index"), n = parse_int(ab[1], "a predictor index");
          if (m > n) std::swap(m, n);
          terms.inter.emplace_back(m, n);
        }
    } else {
      throw Error(ErrorKind::Parse, "unknown term group '" + key + "' (expected main or inter)");
    }
  }
  if (terms.empty()) throw Error(ErrorKind::InvalidTerm, "term set is empty");
  return terms;
}

std::string format_terms(const TermSet& terms) {
  std::string out = "main=";
  for (std::size_t i = 0; i < terms.main.size(); ++i) out += (i ? "," : "") + std::to_string(terms.main[i]);
  out += ";inter=";
  for (std::size_t i = 0; i < terms.inter.size(); ++i)
    out += (i ? "," : "") + std::to_string(terms.inter[i].first) + ":" + std::to_string(terms.inter[i].second);
  return out;
}

json model_to_json(const FittedModel& model) {
  const auto& d = model.design;
  json block_means = json::array();
  for (const auto& m : d.block_means) block_means.push_back(vector_to_json(m.transpose()));
  json x_means = json::array();
  for (const auto& m : d.x_means) x_means.push_back(vector_to_json(m.transpose()));
  return json{
      {"format_version", kArchiveFormatVersion},
      {"terms", terms_to_json(d.terms)},
      {"num_predictors", d.num_predictors},
      {"basis_x", basis_to_json(*d.basis_x)},
      {"basis_y", basis_to_json(*model.basis_y)},
      {"block_means", std::move(block_means)},
      {"x_means", std::move(x_means)},
      {"y_mean", vector_to_json(model.y_mean.transpose())},
      {"components", model.pls.h},
      {"weights", matrix_to_json(model.pls.weights)},
      {"x_loadings", matrix_to_json(model.pls.x_loadings)},
      {"y_loadings", matrix_to_json(model.pls.y_loadings)},
      {"theta", matrix_to_json(model.pls.theta)},
  };
}

FittedModel model_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kArchiveFormatVersion)
      throw Error(ErrorKind::Parse, "unsupported archive format_version " + std::to_string(version));
    FittedModel model;
    auto& d = model.design;
    d.terms = terms_from_json(doc.at("terms"));
    d.num_predictors = doc.at("num_predictors").get<int>();
    d.terms.validate(d.num_predictors);
    d.basis_x = basis_from_json(doc.at("basis_x"));
    model.basis_y = basis_from_json(doc.at("basis_y"));
    d.metric = make_block_metric(d.terms, *d.basis_x);
    for (const auto& m : doc.at("block_means")) d.block_means.push_back(vector_from_json(m).transpose());
    for (const auto& m : doc.at("x_means")) d.x_means.push_back(vector_from_json(m).transpose());
    if (d.block_means.size() != d.terms.size())
      throw Error(ErrorKind::Parse, "block mean count does not match the term set");
    for (std::size_t b = 0; b < d.block_means.size(); ++b)
      if (d.block_means[b].size() != (b + 1 < d.metric.num_blocks() ? d.metric.offset(b + 1) : d.metric.dim()) -
                                         d.metric.offset(b))
        throw Error(ErrorKind::Parse, "block mean length does not match the basis size");
    model.y_mean = vector_from_json(doc.at("y_mean")).transpose();
    model.pls.h = doc.at("components").get<int>();
    model.pls.weights = matrix_from_json(doc.at("weights"));
    model.pls.x_loadings = matrix_from_json(doc.at("x_loadings"));
    model.pls.y_loadings = matrix_from_json(doc.at("y_loadings"));
    model.pls.theta = matrix_from_json(doc.at("theta"));
    if (model.pls.theta.rows() != d.metric.dim() || model.pls.theta.cols() != model.basis_y->size() ||
        model.y_mean.size() != model.basis_y->grid().size())
      throw Error(ErrorKind::Parse, "archive matrices do not match the stored bases");
    model.spec = ModelSpec{d.basis_x->size(), model.basis_y->size(), d.basis_x->order(), model.pls.h};
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed model archive: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const FittedModel& model) {
  atomic_write(path, model_to_json(model).dump(1) + "\n");
}

FittedModel load_model(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

std::string surfaces_to_csv(const CoefficientSurfaces& surfaces, const TermSet& terms) {
  std::string out = "term,s,r,t,value\n";
  const auto& sg = surfaces.s_grid;
  const auto& rg = surfaces.r_grid;
  const auto& tg = surfaces.t_grid;
  for (std::size_t b = 0; b < surfaces.main.size(); ++b) {
    const std::string name = std::to_string(terms.main[b]);
    const auto& m = surfaces.main[b];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index q = 0; q < m.cols(); ++q)
        out += name + "," + format_double(sg[i]) + ",," + format_double(tg[q]) + "," + format_double(m(i, q)) + "\n";
  }
  for (std::size_t b = 0; b < surfaces.inter.size(); ++b) {
    const std::string name = std::to_string(terms.inter[b].first) + ":" + std::to_string(terms.inter[b].second);
    const auto& s3 = surfaces.inter[b];
    for (Eigen::Index i = 0; i < s3.ns(); ++i)
      for (Eigen::Index j = 0; j < s3.nr(); ++j)
        for (Eigen::Index q = 0; q < s3.nt(); ++q)
          out += name + "," + format_double(sg[i]) + "," + format_double(rg[j]) + "," + format_double(tg[q]) + "," +
                 format_double(s3(i, j, q)) + "\n";
  }
  return out;
}

json trace_to_json(const SelectionTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps)
    steps.push_back({{"term", s.candidate.to_string()}, {"mse", s.mse}, {"accepted", s.accepted}});
  return json{{"h_fixed", trace.h_fixed},
              {"baseline_mse", trace.baseline_mse},
              {"steps", std::move(steps)},
              {"mse_path", trace.mse_path},
              {"final_terms", format_terms(trace.final_terms)}};
}

std::string report_to_csv(const BenchmarkReport& report) {
  std::string out = "model,reps,mspe,mspe_se,rmspe,rmspe_se,mape,mape_se\n";
  for (const auto& r : report.rows)
    out += to_string(r.model) + "," + std::to_string(r.reps) + "," + format_double(r.mspe_mean) + "," +
           format_double(r.mspe_sd) + "," + format_double(r.rmspe_mean) + "," + format_double(r.rmspe_sd) + "," +
           format_double(r.mape_mean) + "," + format_double(r.mape_sd) + "\n";
  return out;
}

std::string replicates_to_csv(const BenchmarkReport& report) {
  std::string out = "replicate,model,terms,k_y,k_x,h,mspe,rmspe,mape\n";
  for (const auto& r : report.replicates)
    out += std::to_string(r.replicate) + "," + to_string(r.model) + ",\"" + format_terms(r.terms) + "\"," +
           std::to_string(r.k_y) + "," + std::to_string(r.k_x) + "," + std::to_string(r.h) + "," +
           format_double(r.mspe) + "," + format_double(r.rmspe) + "," + format_double(r.mape) + "\n";
  return out;
}

std::string report_to_text(const BenchmarkReport& report) {
  const auto& c = report.options.config;
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "setting %d, lag %d, %d replicates, %d train / %d test curves\n", c.setting, c.lag,
                report.options.mc_reps, report.options.n_train, c.n_curves - report.options.n_train);
  out += line;
  std::snprintf(line, sizeof line, "%-10s %18s %20s %18s\n", "model", "MSPE", "RMSPE", "MAPE");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-10s %8.3f (%7.3f) %9.3f (%8.3f) %8.3f (%7.3f)\n", to_string(r.model).c_str(),
                  r.mspe_mean, r.mspe_sd, r.rmspe_mean, r.rmspe_sd, r.mape_mean, r.mape_sd);
    out += line;
  }
  return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace fofpls
