// jlt: command-line front end.
//
// Exit codes: 0 success, 1 an inequality check failed, 2 usage or input error,
// 3 numerical failure (non-convergence and friends).

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jlt/jlt.hpp"
#include "jlt/report.hpp"

namespace {

using namespace jlt;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

SpectrumOptions spectrum_options(double tol, const std::string& method, Index max_truncation) {
  SpectrumOptions opt;
  opt.tol = tol;
  opt.max_truncation = max_truncation;
  if (method == "exact") {
    opt.method = SpectrumMethod::exact_tail;
  } else if (method == "truncation") {
    opt.method = SpectrumMethod::truncation;
  } else {
    throw InputError("unknown method '" + method + "'");
  }
  return opt;
}

std::vector<InequalityName> parse_names(const std::vector<std::string>& raw) {
  std::vector<InequalityName> out;
  for (const auto& s : raw) out.push_back(inequality_from_string(s));
  return out;
}

// key=value pairs from --param.
std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const auto& p : raw) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw InputError("--param expects key=value, got '" + p + "'");
    try {
      out[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("--param value is not a number: '" + p + "'");
    }
  }
  return out;
}

Potential make_potential(const std::string& name, const std::map<std::string, double>& params,
                         const std::string& table_path) {
  auto get = [&](const std::string& key, double def) {
    const auto it = params.find(key);
    return it == params.end() ? def : it->second;
  };
  for (const auto& [key, value] : params) {
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"poschl_teller", {"s"}}, {"square_well", {"depth", "width"}}, {"gaussian", {"depth", "sigma"}}, {"tabulated", {}}};
    const auto it = allowed.find(name);
    if (it != allowed.end() && std::find(it->second.begin(), it->second.end(), key) == it->second.end())
      throw InputError("parameter '" + key + "' does not apply to " + name);
  }
  if (name == "poschl_teller") return Potential::poschl_teller(get("s", 1.0));
  if (name == "square_well") return Potential::square_well(get("depth", 4.0), get("width", 2.0));
  if (name == "gaussian") return Potential::gaussian(get("depth", 1.0), get("sigma", 1.0));
  if (name == "tabulated") {
    if (table_path.empty()) throw InputError("tabulated potential needs --table");
    std::ifstream in(table_path);
    if (!in) throw InputError("cannot open " + table_path);
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double x, v;
      if (ls >> x >> v) {
        xs.push_back(x);
        vs.push_back(v);
      }
    }
    return Potential::tabulated(std::move(xs), std::move(vs));
  }
  throw InputError("unknown potential '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jacobi-operator spectral inequalities: eigenvalues, commutation chains, checks"};
  app.require_subcommand(1);

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues outside [-2, 2]");
  std::string sp_input, sp_output, sp_method = "exact";
  double sp_tol = 1e-9, sp_margin = 1e-9;
  Index sp_max = Index{1} << 16;
  spectrum->add_option("--input", sp_input, "operator JSON")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--output", sp_output, "write JSON here instead of stdout");
  spectrum->add_option("--tol", sp_tol, "spectral tolerance")->check(CLI::PositiveNumber);
  spectrum->add_option("--band-margin", sp_margin, "discard eigenvalues with |lambda| - 2 below this");
  spectrum->add_option("--method", sp_method, "exact | truncation")->check(CLI::IsMember({"exact", "truncation"}));
  spectrum->add_option("--max-truncation", sp_max, "largest truncation padding (truncation method)");

  // commute
  auto* commute = app.add_subcommand("commute", "run the elimination chain and report identities");
  std::string cm_input, cm_output;
  double cm_tol = 1e-11;
  commute->add_option("--input", cm_input, "operator JSON")->required()->check(CLI::ExistingFile);
  commute->add_option("--output", cm_output, "write JSON here instead of stdout");
  commute->add_option("--tol", cm_tol, "spectral tolerance")->check(CLI::PositiveNumber);

  // verify
  auto* verify = app.add_subcommand("verify", "evaluate named inequalities");
  std::string vf_input, vf_output, vf_method = "exact";
  std::vector<std::string> vf_names;
  bool vf_random = false, vf_free_constants = false;
  std::size_t vf_trials = 100;
  std::uint64_t vf_seed = 1;
  double vf_gamma = 1.0, vf_tol = 1e-9, vf_scale = 1.0, vf_jitter = 0.3;
  Index vf_half_width = 4, vf_max = Index{1} << 16;
  int vf_block_dim = 1;
  auto* vf_in = verify->add_option("--input", vf_input, "operator JSON")->check(CLI::ExistingFile);
  auto* vf_rand = verify->add_flag("--random", vf_random, "fuzz random operators instead");
  vf_in->excludes(vf_rand);
  verify->add_option("--output", vf_output, "write JSON here instead of stdout");
  verify->add_option("--names", vf_names, "comma-separated inequality names")->delimiter(',');
  verify->add_option("--gamma", vf_gamma, "exponent for hs1, hs2, orderalpha, hsfree, hsfree2");
  verify->add_option("--tol", vf_tol, "spectral tolerance")->check(CLI::PositiveNumber);
  verify->add_option("--method", vf_method, "exact | truncation")->check(CLI::IsMember({"exact", "truncation"}));
  verify->add_option("--max-truncation", vf_max, "largest truncation padding (truncation method)");
  verify->add_flag("--free-constants", vf_free_constants, "hs1/hs2 constants for a == -1");
  verify->add_option("--trials", vf_trials, "random trials")->check(CLI::PositiveNumber);
  verify->add_option("--seed", vf_seed, "random seed");
  verify->add_option("--half-width", vf_half_width, "random window half width")->check(CLI::NonNegativeNumber);
  verify->add_option("--scale", vf_scale, "random potential scale");
  verify->add_option("--jitter", vf_jitter, "random off-diagonal jitter in [0, 0.9)");
  verify->add_option("--block-dim", vf_block_dim, "block size of random operators")->check(CLI::PositiveNumber);

  // gfun
  auto* gfun = app.add_subcommand("gfun", "tabulate G_gamma and its power bound ratios");
  std::string gf_output;
  double gf_gamma = 1.0, gf_min = 2.001, gf_max = 1000.0;
  int gf_points = 200;
  gfun->add_option("--gamma", gf_gamma, "exponent > 1/2");
  gfun->add_option("--lambda-min", gf_min, "smallest lambda (> 2)");
  gfun->add_option("--lambda-max", gf_max, "largest lambda");
  gfun->add_option("--points", gf_points, "grid points (geometric in lambda - 2)")->check(CLI::PositiveNumber);
  gfun->add_option("--output", gf_output, "write CSV here instead of stdout");

  // continuum
  auto* continuum = app.add_subcommand("continuum", "discretized Schroedinger operators and LT ratios");
  std::string ct_potential = "poschl_teller", ct_table, ct_output;
  std::vector<std::string> ct_params;
  double ct_domain = 12.0;
  std::vector<double> ct_gammas{1.5}, ct_cs{0.5};
  std::vector<Index> ct_ks{16, 32, 64};
  continuum->add_option("--potential", ct_potential, "poschl_teller | square_well | gaussian | tabulated");
  continuum->add_option("--param", ct_params, "key=value (s; depth, width; depth, sigma)");
  continuum->add_option("--table", ct_table, "x,v samples for the tabulated potential");
  continuum->add_option("--domain", ct_domain, "grid half width X")->check(CLI::PositiveNumber);
  continuum->add_option("--gamma", ct_gammas, "exponents")->delimiter(',');
  continuum->add_option("--c", ct_cs, "scheme constants in [0, 1]")->delimiter(',');
  continuum->add_option("--k", ct_ks, "increasing grid densities")->delimiter(',');
  continuum->add_option("--output", ct_output, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (spectrum->parsed()) {
      SpectrumOptions opt = spectrum_options(sp_tol, sp_method, sp_max);
      opt.band_margin = sp_margin;
      const AnyOperator op = load_operator(sp_input);
      const SpectrumResult s = std::visit([&](const auto& o) { return eigenvalues_outside_band(o, opt); }, op);
      json j = to_json(s);
      j["kind"] = std::holds_alternative<JacobiOperator>(op) ? "scalar" : "block";
      emit(dump(j), sp_output);
      return kOk;
    }

    if (commute->parsed()) {
      const AnyOperator op = load_operator(cm_input);
      json j = std::visit([&](const auto& o) { return to_json(eliminate_all(o, cm_tol)); }, op);
      emit(dump(j), cm_output);
      return kOk;
    }

    if (verify->parsed()) {
      CheckOptions opt;
      opt.spectral_tol = vf_tol;
      opt.free_constants = vf_free_constants;
      const SpectrumOptions sopt = spectrum_options(vf_tol, vf_method, vf_max);
      std::vector<InequalityName> names = parse_names(vf_names);
      if (vf_random) {
        if (names.empty()) names = {InequalityName::final, InequalityName::hsmain};
        RandomOperatorSpec spec{vf_seed, vf_half_width, vf_scale, vf_jitter, vf_block_dim};
        const FuzzSummary s = fuzz(spec, names, vf_trials, vf_gamma, opt);
        emit(dump(to_json(s)), vf_output);
        for (const auto& st : s.stats)
          if (st.failures > 0) return kFailed;
        if (!s.error_messages.empty()) {
          std::cerr << "jlt: " << s.error_messages.front() << "\n";
          return kNumerical;
        }
        return kOk;
      }
      if (vf_input.empty()) throw InputError("verify needs --input or --random");
      const AnyOperator op = load_operator(vf_input);
      json out = json::array();
      bool ok = true;
      std::visit(
          [&](const auto& o) {
            using Op = std::decay_t<decltype(o)>;
            constexpr bool block = std::is_same_v<Op, BlockJacobiOperator>;
            const bool free = is_discrete_schroedinger(o);
            std::vector<InequalityName> todo = names;
            if (todo.empty()) {
              for (InequalityName n : {InequalityName::final, InequalityName::hsmain, InequalityName::hs1,
                                       InequalityName::hs2, InequalityName::orderalpha, InequalityName::hsfree,
                                       InequalityName::hsfree2})
                if (applicable(n, block, free)) todo.push_back(n);
            }
            // Solve once; every check reuses the spectrum.
            const SpectrumResult s = eigenvalues_outside_band(o, sopt);
            for (InequalityName n : todo) {
              if (!applicable(n, block, free))
                throw InputError(std::string(to_string(n)) + " does not apply to this operator");
              InequalityReport r;
              r.name = n;
              if constexpr (block) {
                if (r.name == InequalityName::final) r.name = InequalityName::finalmatrix;
                r.rhs_breakdown = rhs_block(o, r.name, RhsOptions{.gamma = vf_gamma});
              } else {
                if (r.name == InequalityName::finalmatrix) r.name = InequalityName::final;
                r.rhs_breakdown =
                    rhs_scalar(o, r.name, RhsOptions{.gamma = vf_gamma, .free_constants = vf_free_constants});
              }
              r.gamma = needs_gamma(r.name) ? vf_gamma : 0.0;
              r.spectrum = s;
              r.rhs = r.rhs_breakdown.total;
              r.lhs = lhs_sum(r.name, s.points, vf_gamma);
              detail::finish(r, opt);
              ok = ok && r.passed;
              out.push_back(to_json(r));
            }
          },
          op);
      emit(dump(out), vf_output);
      return ok ? kOk : kFailed;
    }

    if (gfun->parsed()) {
      emit(gfun_csv(gf_gamma, gf_min, gf_max, gf_points), gf_output);
      return kOk;
    }

    if (continuum->parsed()) {
      const Potential pot = make_potential(ct_potential, parse_params(ct_params), ct_table);
      std::vector<ConvergenceRow> rows;
      for (double c : ct_cs) {
        ContinuumProblem p{pot, ct_domain, ct_gammas.front(), c};
        const auto part = constant_sweep(p, ct_gammas, ct_ks);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      std::stable_sort(rows.begin(), rows.end(),
                       [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.gamma < b.gamma; });
      emit(continuum_csv(rows), ct_output);
      return kOk;
    }
  } catch (const NumericalError& e) {
    std::cerr << "jlt: " << e.what() << "\n";
    return kNumerical;
  } catch (const InputError& e) {
    std::cerr << "jlt: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "jlt: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
