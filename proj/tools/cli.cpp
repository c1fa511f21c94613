// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <CLI11.hpp>
#include "ptwise/errors.hpp"
#include "ptwise/newton.hpp"

namespace ptwise::cli
{

double Value::Number() const
{
  if (const double *d = std::get_if<double>(&v))
  {
    return *d;
  }
  if (const bool *b = std::get_if<bool>(&v))
  {
    return *b ? 1.0 : 0.0;
  }
  throw Error("expected a number");
}

const std::string &Value::String() const
{
  if (const std::string *s = std::get_if<std::string>(&v))
  {
    return *s;
  }
  throw Error("expected a string");
}

const std::vector<Value> &Value::Array() const
{
  if (const auto *a = std::get_if<std::vector<Value>>(&v))
  {
    return *a;
  }
  throw Error("expected an array");
}

Complex Value::AsComplex() const
{
  if (const auto *a = std::get_if<std::vector<Value>>(&v))
  {
    if (a->size() != 2)
    {
      throw Error("complex numbers are written [re, im]");
    }
    return {(*a)[0].Number(), (*a)[1].Number()};
  }
  return Number();
}

namespace
{

struct Reader
{
  const std::string &s;
  std::size_t pos = 0;

  void Skip()
  {
    while (pos < s.size())
    {
      if (std::isspace(static_cast<unsigned char>(s[pos])))
      {
        pos++;
      }
      else if (s[pos] == '#')
      {
        while (pos < s.size() && s[pos] != '\n')
        {
          pos++;
        }
      }
      else
      {
        break;
      }
    }
  }

  Value Parse()
  {
    Skip();
    if (pos >= s.size())
    {
      throw Error("missing value");
    }
    const char c = s[pos];
    if (c == '[')
    {
      pos++;
      std::vector<Value> items;
      Skip();
      if (pos < s.size() && s[pos] == ']')
      {
        pos++;
        return {items};
      }
      while (true)
      {
        items.push_back(Parse());
        Skip();
        if (pos >= s.size())
        {
          throw Error("unterminated array");
        }
        if (s[pos] == ',')
        {
          pos++;
          Skip();
          if (pos < s.size() && s[pos] == ']')  // trailing comma
          {
            pos++;
            return {items};
          }
          continue;
        }
        if (s[pos] == ']')
        {
          pos++;
          return {items};
        }
        throw Error(std::string("unexpected '") + s[pos] + "' in array");
      }
    }
    if (c == '"')
    {
      const std::size_t end = s.find('"', pos + 1);
      if (end == std::string::npos)
      {
        throw Error("unterminated string");
      }
      std::string out = s.substr(pos + 1, end - pos - 1);
      pos = end + 1;
      return {out};
    }
    if (s.compare(pos, 4, "true") == 0)
    {
      pos += 4;
      return {true};
    }
    if (s.compare(pos, 5, "false") == 0)
    {
      pos += 5;
      return {false};
    }
    const char *begin = s.c_str() + pos;
    char *end = nullptr;
    const double d = std::strtod(begin, &end);
    if (end == begin)
    {
      throw Error("cannot read a value at '" + s.substr(pos, 12) + "'");
    }
    pos += static_cast<std::size_t>(end - begin);
    return {d};
  }
};

int LineOf(const std::string &text, std::size_t pos)
{
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::string Trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
  {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

CMatrix MatrixFrom(const Value &v, Eigen::Index rows, Eigen::Index cols, const std::string &what)
{
  const auto &a = v.Array();
  if (static_cast<Eigen::Index>(a.size()) != rows * cols)
  {
    throw DimensionMismatch(what + ": expected " + std::to_string(rows * cols) + " entries");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; i++)
  {
    for (Eigen::Index j = 0; j < cols; j++)
    {
      m(i, j) = a[static_cast<std::size_t>(i * cols + j)].AsComplex();
    }
  }
  return m;
}

MatrixPencil PencilFrom(const Value &v, int n, Complex base, const std::string &what)
{
  std::vector<CMatrix> coeffs;
  for (const Value &order : v.Array())
  {
    coeffs.push_back(MatrixFrom(order, n, n, what));
  }
  if (coeffs.empty())
  {
    throw Error(what + ": no coefficients");
  }
  return MatrixPencil(base, coeffs);
}

double Sech(double x)
{
  return 1.0 / std::cosh(x);
}

struct Profile
{
  std::string kind;
  int row = 0, col = 0;
  double amplitude = 1.0, scale = 1.0, shift = 0.0;
  std::vector<double> coeffs;

  double operator()(double x) const
  {
    const double z = scale * (x - shift);
    if (kind == "sech2")
    {
      return amplitude * Sech(z) * Sech(z);
    }
    if (kind == "tanh2")
    {
      return amplitude * std::tanh(z) * std::tanh(z);
    }
    double p = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
    {
      p = p * z + *it;
    }
    return amplitude * p;
  }
};

}  // namespace

Document ParseDocument(const std::string &text)
{
  Document doc;
  std::size_t pos = 0;
  while (pos < text.size())
  {
    Reader r{text, pos};
    r.Skip();
    pos = r.pos;
    if (pos >= text.size())
    {
      break;
    }
    const std::size_t eq = text.find('=', pos);
    const std::size_t nl = text.find('\n', pos);
    if (eq == std::string::npos || (nl != std::string::npos && nl < eq))
    {
      throw Error("line " + std::to_string(LineOf(text, pos)) + ": expected key = value");
    }
    const std::string key = Trim(text.substr(pos, eq - pos));
    if (key.empty())
    {
      throw Error("line " + std::to_string(LineOf(text, pos)) + ": empty key");
    }
    r.pos = eq + 1;
    try
    {
      doc[key] = r.Parse();
    }
    catch (const Error &e)
    {
      throw Error("line " + std::to_string(LineOf(text, eq)) + ": " + e.what());
    }
    pos = r.pos;
  }
  return doc;
}

ProblemSpec ProblemFromDocument(const Document &doc, const Params &overrides)
{
  auto get = [&](const std::string &k) -> const Value *
  {
    auto it = doc.find(k);
    return it == doc.end() ? nullptr : &it->second;
  };
  if (const Value *name = get("problem"))
  {
    Params p;
    for (const auto &[k, v] : doc)
    {
      if (k != "problem")
      {
        p[k] = v.Number();
      }
    }
    for (const auto &[k, v] : overrides)
    {
      p[k] = v;
    }
    return MakeProblem(name->String(), p);
  }

  // Explicit pencils.
  const Value *nv = get("phase_dim");
  const Value *plus = get("a_plus");
  if (!nv || !plus)
  {
    throw Error("problem file needs either `problem` or `phase_dim` and `a_plus`");
  }
  const int n = static_cast<int>(nv->Number());
  const Complex base = get("base") ? get("base")->AsComplex() : Complex(0.0);
  ProblemSpec s;
  s.name = get("name") ? get("name")->String() : "explicit";
  s.phase_dim = n;
  s.a_plus = PencilFrom(*plus, n, base, "a_plus");
  s.a_minus = get("a_minus") ? PencilFrom(*get("a_minus"), n, base, "a_minus") : s.a_plus;
  if (const Value *k = get("unstable_dim"))
  {
    s.unstable_dim = static_cast<int>(k->Number());
  }
  if (const Value *sw = get("swap"))
  {
    s.swap_subspaces = sw->Number() != 0.0;
  }
  if (const Value *rp = get("reparam"))
  {
    std::vector<Complex> c;
    for (const Value &x : rp->Array())
    {
      c.push_back(x.AsComplex());
    }
    s.reparam = ScalarPoly(c);
  }
  if (const Value *lb = get("left_basis"))
  {
    const Value *cols = get("left_basis_cols");
    const int k = cols ? static_cast<int>(cols->Number()) : 1;
    s.left_basis = MatrixFrom(*lb, n, k, "left_basis");
  }

  std::vector<Profile> profiles;
  for (int i = 0;; i++)
  {
    const std::string pre = "profile." + std::to_string(i) + ".";
    const Value *kind = get(pre + "kind");
    if (!kind)
    {
      break;
    }
    Profile p;
    p.kind = kind->String();
    if (p.kind != "sech2" && p.kind != "tanh2" && p.kind != "polynomial")
    {
      throw Error(pre + "kind: unknown profile '" + p.kind + "' (sech2, tanh2, polynomial)");
    }
    auto num = [&](const char *k, double def)
    { return get(pre + k) ? get(pre + k)->Number() : def; };
    p.row = static_cast<int>(num("row", 0.0));
    p.col = static_cast<int>(num("col", 0.0));
    if (p.row < 0 || p.row >= n || p.col < 0 || p.col >= n)
    {
      throw DimensionMismatch(pre + "row/col outside the phase dimension");
    }
    p.amplitude = num("amplitude", 1.0);
    p.scale = num("scale", 1.0);
    p.shift = num("shift", 0.0);
    if (const Value *c = get(pre + "coeffs"))
    {
      for (const Value &x : c->Array())
      {
        p.coeffs.push_back(x.Number());
      }
    }
    profiles.push_back(p);
  }

  Params extra = overrides;
  auto take = [&](const char *k) -> std::optional<double>
  {
    auto it = extra.find(k);
    if (it == extra.end())
    {
      return std::nullopt;
    }
    const double v = it->second;
    extra.erase(it);
    return v;
  };
  const auto l_over = take("L"), n_over = take("n"), swap_over = take("swap");
  if (!extra.empty())
  {
    throw Error("parameter '" + extra.begin()->first + "' does not apply to an explicit problem");
  }
  if (swap_over)
  {
    s.swap_subspaces = *swap_over != 0.0;
  }
  const Value *hl = get("half_length");
  if (hl || l_over)
  {
    s.half_length = l_over ? *l_over : hl->Number();
    const Value *iv = get("intervals");
    s.intervals = n_over ? static_cast<int>(*n_over) : (iv ? static_cast<int>(iv->Number()) : 0);
    if (s.half_length <= 0.0 || s.intervals <= 0)
    {
      throw Error("half_length and intervals must be positive");
    }
    const MatrixPencil ap = s.a_plus;
    s.interior = [ap, profiles](double x)
    {
      std::vector<CMatrix> c = ap.Coeffs();
      for (const Profile &p : profiles)
      {
        c[0](p.row, p.col) += p(x);
      }
      return MatrixPencil(ap.BasePoint(), c);
    };
    const CMatrix left = s.interior(-s.half_length).Coeff(0) - s.a_minus.Coeff(0);
    const CMatrix right = s.interior(s.half_length).Coeff(0) - s.a_plus.Coeff(0);
    s.tail_mismatch = std::max(left.norm(), right.norm());
  }
  else if (!profiles.empty())
  {
    throw Error("interior profiles need half_length");
  }
  return s;
}

ProblemSpec LoadProblem(const std::string &name_or_path, const Params &overrides)
{
  std::ifstream in(name_or_path);
  if (!in)
  {
    return MakeProblem(name_or_path, overrides);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ProblemFromDocument(ParseDocument(ss.str()), overrides);
}

Complex ParseComplex(const std::string &s)
{
  const auto comma = s.find(',');
  try
  {
    std::size_t used = 0;
    if (comma == std::string::npos)
    {
      const double re = std::stod(s, &used);
      if (used != s.size())
      {
        throw Error("");
      }
      return re;
    }
    const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
    const double re = std::stod(a, &used);
    if (used != a.size())
    {
      throw Error("");
    }
    const double im = std::stod(b, &used);
    if (used != b.size())
    {
      throw Error("");
    }
    return {re, im};
  }
  catch (const std::exception &)
  {
    throw Error("cannot read complex number '" + s + "' (expected re,im)");
  }
}

nlohmann::json ToJson(Complex z)
{
  return nlohmann::json::array({z.real(), z.imag()});
}

Complex ComplexFromJson(const nlohmann::json &j)
{
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json ResultToJson(const SpectralResult &r, const std::string &problem, Complex start,
                            std::uint64_t seed, double runtime_s)
{
  ResultRecord rec;
  rec.problem = problem;
  rec.start = start;
  rec.value = r.value;
  rec.lambda = r.lambda;
  rec.gamma = r.gamma;
  rec.classification = ToString(r.classification);
  rec.tail = ToString(r.tail);
  rec.converged = r.converged;
  rec.restarts = r.restarts;
  rec.total_iterations = r.total_iterations;
  rec.unstable_dim = r.unstable_dim;
  rec.residual = r.residual;
  rec.kernel_residual = r.kernel_residual;
  rec.runtime_s = runtime_s;
  rec.seed = seed;
  if (r.branch)
  {
    rec.branch_lambda = r.branch->lambda;
    rec.branch_nu = r.branch->nu;
  }
  rec.notes = r.notes;
  return ToJson(rec);
}

nlohmann::json ToJson(const ResultRecord &r)
{
  nlohmann::json j;
  j["problem"] = r.problem;
  j["lambda0"] = ToJson(r.start);
  j["value"] = ToJson(r.value);
  j["lambda"] = ToJson(r.lambda);
  if (r.gamma)
  {
    j["gamma"] = ToJson(*r.gamma);
  }
  j["classification"] = r.classification;
  j["tail"] = r.tail;
  j["converged"] = r.converged;
  j["restarts"] = r.restarts;
  j["total_iterations"] = r.total_iterations;
  j["unstable_dim"] = r.unstable_dim;
  j["residual"] = r.residual;
  j["kernel_residual"] = r.kernel_residual;
  if (r.branch_lambda)
  {
    j["branch"] = {{"lambda", ToJson(*r.branch_lambda)}, {"nu", ToJson(*r.branch_nu)}};
  }
  j["notes"] = r.notes;
  j["seed"] = r.seed;
  j["runtime_s"] = r.runtime_s;
  return j;
}

ResultRecord ResultFromJson(const nlohmann::json &j)
{
  ResultRecord r;
  r.problem = j.at("problem").get<std::string>();
  r.start = ComplexFromJson(j.at("lambda0"));
  r.value = ComplexFromJson(j.at("value"));
  r.lambda = ComplexFromJson(j.at("lambda"));
  if (j.contains("gamma"))
  {
    r.gamma = ComplexFromJson(j.at("gamma"));
  }
  r.classification = j.at("classification").get<std::string>();
  r.tail = j.at("tail").get<std::string>();
  r.converged = j.at("converged").get<bool>();
  r.restarts = j.at("restarts").get<int>();
  r.total_iterations = j.at("total_iterations").get<int>();
  r.unstable_dim = j.at("unstable_dim").get<int>();
  r.residual = j.at("residual").get<double>();
  r.kernel_residual = j.at("kernel_residual").get<double>();
  if (j.contains("branch"))
  {
    r.branch_lambda = ComplexFromJson(j.at("branch").at("lambda"));
    r.branch_nu = ComplexFromJson(j.at("branch").at("nu"));
  }
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.runtime_s = j.at("runtime_s").get<double>();
  return r;
}

std::string FormatDouble(double x)
{
  char buf[32];
  for (int prec = 1; prec <= 17; prec++)
  {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x)
    {
      break;
    }
  }
  return buf;
}

std::string CsvField(const std::string &s)
{
  if (s.find_first_of(",\"\r\n") == std::string::npos)
  {
    return s;
  }
  std::string out = "\"";
  for (char c : s)
  {
    if (c == '"')
    {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

std::string ConvergenceCsv(const SpectralResult &r)
{
  std::string out = "k,restart_index,re_lambda,im_lambda,residual,log_scale\r\n";
  for (const PassSummary &p : r.passes)
  {
    const IterationRecord &rec = p.record;
    for (std::size_t k = 0; k < rec.predictions.size(); k++)
    {
      out += std::to_string(k + 1) + "," + std::to_string(p.restart_index) + "," +
             FormatDouble(rec.predictions[k].real()) + "," +
             FormatDouble(rec.predictions[k].imag()) + "," +
             FormatDouble(k < rec.residuals.size() ? rec.residuals[k] : 0.0) + "," +
             FormatDouble(k + 1 < rec.log_scales.size() ? rec.log_scales[k + 1] : 0.0) + "\r\n";
    }
  }
  return out;
}

std::vector<SweepPoint> RunSweep(const std::string &problem, const Params &params,
                                 Complex start, const std::string &param,
                                 const std::vector<double> &values, const RunOptions &opts,
                                 int threads)
{
  std::vector<SweepPoint> points(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]()
  {
    for (std::size_t i = next++; i < values.size(); i = next++)
    {
      SweepPoint &pt = points[i];
      pt.value = values[i];
      try
      {
        Params p = params;
        Complex z = start;
        ProblemSpec spec;
        if (param == "lambda0")
        {
          z = values[i];
          spec = LoadProblem(problem, p);
        }
        else if (param == "dx")
        {
          spec = LoadProblem(problem, p);
          if (!spec.IsBvp() || values[i] <= 0.0)
          {
            throw Error("dx sweeps need a boundary value problem and dx > 0");
          }
          p["n"] = std::round(2.0 * spec.half_length / values[i]);
          spec = LoadProblem(problem, p);
        }
        else
        {
          p[param] = values[i];
          spec = LoadProblem(problem, p);
        }
        RunOptions o = opts;
        o.seed = opts.seed + i;
        SpectralResult r = RunWithRestarts(spec, z, o);
        r.passes.clear();
        r.kernel_vector.resize(0);
        pt.result = std::move(r);
      }
      catch (const std::exception &e)
      {
        pt.error = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; t++)
  {
    pool.emplace_back(worker);
  }
  worker();
  for (auto &t : pool)
  {
    t.join();
  }
  return points;
}

std::string SweepCsv(const std::string &param, const std::vector<SweepPoint> &points)
{
  std::string out =
      "index,param,value,re,im,re_lambda,im_lambda,classification,converged,iterations,"
      "restarts,residual,error\r\n";
  for (std::size_t i = 0; i < points.size(); i++)
  {
    const SweepPoint &p = points[i];
    out += std::to_string(i) + "," + CsvField(param) + "," + FormatDouble(p.value) + ",";
    if (p.result)
    {
      const SpectralResult &r = *p.result;
      out += FormatDouble(r.value.real()) + "," + FormatDouble(r.value.imag()) + "," +
             FormatDouble(r.lambda.real()) + "," + FormatDouble(r.lambda.imag()) + "," +
             ToString(r.classification) + "," + (r.converged ? "1" : "0") + "," +
             std::to_string(r.total_iterations) + "," + std::to_string(r.restarts) + "," +
             FormatDouble(r.residual) + ",";
    }
    else
    {
      out += ",,,,error,0,0,0,,";
    }
    out += CsvField(p.error) + "\r\n";
  }
  return out;
}

int ThreadsFromEnvironment()
{
  if (const char *env = std::getenv("PTWISE_THREADS"))
  {
    const int n = std::atoi(env);
    if (n > 0)
    {
      return n;
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace
{

void WriteFile(const std::string &path, const std::string &content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot write " + path);
  }
  out << content;
}

// `--key value` / `--key=value` pairs left over by the option parser become problem
// parameters.
Params ExtraParams(const std::vector<std::string> &extras)
{
  Params p;
  for (std::size_t i = 0; i < extras.size(); i++)
  {
    std::string a = extras[i];
    if (a.rfind("--", 0) != 0)
    {
      throw Error("unexpected argument '" + a + "'");
    }
    a = a.substr(2);
    std::string val;
    const auto eq = a.find('=');
    if (eq != std::string::npos)
    {
      val = a.substr(eq + 1);
      a = a.substr(0, eq);
    }
    else if (i + 1 < extras.size())
    {
      val = extras[++i];
    }
    else
    {
      throw Error("parameter --" + a + " needs a value");
    }
    try
    {
      std::size_t used = 0;
      p[a] = std::stod(val, &used);
      if (used != val.size())
      {
        throw Error("");
      }
    }
    catch (const std::exception &)
    {
      throw Error("parameter --" + a + ": '" + val + "' is not a number");
    }
  }
  return p;
}

std::vector<double> ParseList(const std::string &s)
{
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    out.push_back(std::stod(item));
  }
  return out;
}

int ExitCode(const SpectralResult &r)
{
  return r.classification == Classification::Unresolved ? 2 : 0;
}

void Report(const SpectralResult &r)
{
  std::printf("%s at %s%+.12gi", ToString(r.classification).c_str(),
              FormatDouble(r.lambda.real()).c_str(), r.lambda.imag());
  if (r.gamma)
  {
    std::printf(" (gamma %s%+.12gi)", FormatDouble(r.gamma->real()).c_str(), r.gamma->imag());
  }
  std::printf(", %d iterations, %d restarts, residual %.3g\n", r.total_iterations,
              r.restarts, r.residual);
  for (const auto &n : r.notes)
  {
    std::printf("  note: %s\n", n.c_str());
  }
}

}  // namespace

int Main(int argc, char **argv)
{
  CLI::App app{"Nearest pointwise spectral value by the inverse power method"};
  app.require_subcommand(1);

  std::string problem, lambda0 = "", output = "ptwise";
  std::uint64_t seed = 1;
  RunOptions opts;
  bool no_restarts = false, no_newton = false;
  std::string sweep_param, sweep_values, nu0;

  auto common = [&](CLI::App *sub, bool needs_start)
  {
    sub->add_option("--problem", problem, "catalog name or problem file")->required();
    auto *l0 = sub->add_option("--lambda0", lambda0, "starting point re,im");
    if (needs_start)
    {
      l0->required();
    }
    sub->add_option("--output", output, "output path prefix");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--m", opts.m, "first pass order");
    sub->add_option("--m-fine", opts.m_fine, "restart pass order");
    sub->add_option("--tau", opts.tau, "anchor step fraction");
    sub->add_option("--coarse-tol", opts.coarse_tol);
    sub->add_option("--fine-tol", opts.fine_tol);
    sub->add_option("--max-restarts", opts.max_restarts);
    sub->add_option("--first-pass-iters", opts.first_pass_iters);
    sub->add_flag("--no-restarts", no_restarts);
    sub->add_flag("--no-newton", no_newton);
    sub->allow_extras();
  };
  CLI::App *solve = app.add_subcommand("solve", "nearest spectral value to lambda0");
  common(solve, true);
  CLI::App *branch = app.add_subcommand("branch-point", "Newton for a double root near lambda0");
  common(branch, true);
  branch->add_option("--nu0", nu0, "spatial exponent guess re,im (selects the double root)");
  CLI::App *speed = app.add_subcommand("spreading-speed", "linear spreading speed");
  common(speed, false);
  CLI::App *sweep = app.add_subcommand("sweep", "one solve per parameter value");
  common(sweep, true);
  sweep->add_option("--param", sweep_param, "parameter, lambda0 or dx")->required();
  sweep->add_option("--values", sweep_values, "comma separated values")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try
  {
    CLI::App *sub = app.get_subcommands().front();
    const Params params = ExtraParams(sub->remaining());
    opts.seed = seed;
    opts.restarts = !no_restarts;
    opts.newton_handoff = !no_newton;

    if (sub == sweep)
    {
      const Complex start = ParseComplex(lambda0);
      const auto points = RunSweep(problem, params, start, sweep_param, ParseList(sweep_values),
                                   opts, ThreadsFromEnvironment());
      WriteFile(output + ".sweep.csv", SweepCsv(sweep_param, points));
      int code = 0;
      for (const auto &p : points)
      {
        if (!p.result || p.result->classification == Classification::Unresolved)
        {
          code = 2;
        }
      }
      std::printf("%zu points written to %s.sweep.csv\n", points.size(), output.c_str());
      return code;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&]
    { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    if (sub == branch)
    {
      const ProblemSpec spec = LoadProblem(problem, params);
      if (spec.IsBvp())
      {
        throw Error("branch-point needs a constant-coefficient problem");
      }
      const Complex start = ParseComplex(lambda0);
      SpectralResult r;
      r.value = start;
      r.lambda = spec.ToLambda(start);
      try
      {
        BranchNewtonOptions no;
        if (!nu0.empty())
        {
          no.nu_guess = ParseComplex(nu0);
        }
        const BranchPoint bp = BranchPointNewton(spec.WorkingPlus(), start, no);
        r.branch = bp;
        r.value = bp.lambda;
        r.lambda = spec.ToLambda(bp.lambda);
        r.classification = Classification::BranchPoint;
        r.converged = true;
        r.residual = bp.residual;
        r.total_iterations = bp.steps;
      }
      catch (const SingularJacobian &e)
      {
        r.value = Complex(e.best_re, e.best_im);
        r.lambda = spec.ToLambda(r.value);
        r.notes.push_back(e.what());
      }
      WriteFile(output + ".result.json", ResultToJson(r, problem, start, seed, elapsed()).dump(2) + "\n");
      Report(r);
      return ExitCode(r);
    }

    SpectralResult r;
    Complex start;
    if (sub == speed)
    {
      start = lambda0.empty() ? Complex(3.0) : ParseComplex(lambda0);
      r = SpreadingSpeed(problem, params, start, opts);
    }
    else
    {
      start = ParseComplex(lambda0);
      r = RunWithRestarts(LoadProblem(problem, params), start, opts);
    }
    const double runtime = elapsed();
    WriteFile(output + ".result.json", ResultToJson(r, problem, start, seed, runtime).dump(2) + "\n");
    WriteFile(output + ".convergence.csv", ConvergenceCsv(r));
    Report(r);
    return ExitCode(r);
  }
  catch (const std::exception &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace ptwise::cli
