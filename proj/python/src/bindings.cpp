#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "recembed/ann.hpp"
#include "recembed/beta.hpp"
#include "recembed/dataset.hpp"
#include "recembed/error.hpp"
#include "recembed/l2embed.hpp"
#include "recembed/lipschitz.hpp"
#include "recembed/mazur.hpp"

namespace py = pybind11;
using namespace recembed;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

NormExponent to_norm(const py::object& p) {
  if (py::isinstance<py::str>(p)) return NormExponent::parse(p.cast<std::string>());
  return NormExponent(p.cast<double>());
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw DomainError("expected a 1-d array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

PointSet to_points(const Array& a, const py::object& p) {
  if (a.ndim() != 2) throw DomainError("expected an (n, d) array");
  std::vector<double> data(a.data(), a.data() + a.size());
  return PointSet(std::move(data), static_cast<std::size_t>(a.shape(1)), to_norm(p));
}

Array to_array(const PointSet& s) {
  Array out({s.size(), s.dim()});
  std::copy(s.data().begin(), s.data().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SamplerPtr make_sampler(const PointSet& s, const std::string& name, RandomSeed seed,
                        std::optional<LipschitzSampler>& holder) {
  const BetaEstimates est = BetaEstimates::defaults(s.size(), s.dim());
  if (name == "ckr") return std::make_shared<CkrSampler>(est.beta0);
  if (name == "l2-grid") return std::make_shared<L2BaseSampler>(L2Strategy::grid, est.beta_star(2));
  if (name == "l2-ballcarve") {
    return std::make_shared<L2BaseSampler>(L2Strategy::ballcarve, est.beta_star(2));
  }
  if (name == "recursive") {
    const DecompositionPlan plan = DecompositionPlan::for_exponent(s.norm().value(), est);
    holder.emplace(build_decomposer(s, plan, est, seed));
    return holder->sampler_ptr();
  }
  throw DomainError("unknown sampler '" + name + "'");
}

py::dict cert_dict(const EmbeddingCertificate& c) {
  py::dict d;
  d["lip_hat"] = c.lip_hat;
  d["min_sep_image"] = c.min_sep_image;
  d["achieved_D"] = c.achieved_D;
  d["D"] = c.D;
  d["delta"] = c.delta;
  d["separated_pairs"] = c.separated_pairs;
  d["vacuous"] = c.vacuous;
  d["pass"] = c.pass;
  d["reason"] = c.reason;
  return d;
}

py::dict exponent_dict(const ExponentBound& b) {
  py::dict d;
  d["p"] = b.p;
  d["k"] = b.k;
  d["value"] = b.value;
  d["limit"] = b.limit;
  d["nr25"] = b.nr25;
  d["bg14"] = b.bg14;
  return d;
}

}  // namespace

PYBIND11_MODULE(_recembed, m) {
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("lp_distance", [](const Array& x, const Array& y, const py::object& p) {
    return lp_distance(to_vector(x), to_vector(y), to_norm(p));
  }, py::arg("x"), py::arg("y"), py::arg("p"));

  m.def("mazur_apply", [](const Array& x, double p, double q, double c0, const Array& z) {
    return to_array(mazur_apply(MazurSpec(p, q, c0, to_vector(z)), to_vector(x)));
  }, py::arg("x"), py::arg("p"), py::arg("q"), py::arg("c0"), py::arg("z"));

  m.def("mazur_bounds", [](const Array& x, const Array& y, double p, double q, double c0,
                           const Array& z) {
    const MazurBounds b = mazur_bounds(MazurSpec(p, q, c0, to_vector(z)), to_vector(x), to_vector(y));
    return py::make_tuple(b.lower, b.actual, b.upper);
  }, py::arg("x"), py::arg("y"), py::arg("p"), py::arg("q"), py::arg("c0"), py::arg("z"),
     "(lower, actual, upper) of the Mazur sandwich");

  m.def("generate_dataset", [](const std::string& kind, std::size_t n, std::size_t d,
                               const py::object& p, std::uint64_t seed, std::size_t queries) {
    PlantedOptions opt;
    opt.queries = queries;
    const Dataset ds = generate_dataset(parse_dataset_kind(kind), n, d, to_norm(p), RandomSeed{seed}, opt);
    py::dict out;
    out["points"] = to_array(ds.points);
    if (ds.planted) out["queries"] = to_array(ds.planted->queries);
    return out;
  }, py::arg("kind"), py::arg("n"), py::arg("d"), py::arg("p"), py::arg("seed"),
     py::arg("queries") = 200);

  m.def("estimate_beta", [](const Array& points, const py::object& p, double delta,
                            const std::string& sampler, std::size_t draws, std::size_t pairs,
                            std::uint64_t seed, std::uint64_t decomposer_seed) {
    const PointSet s = to_points(points, p);
    std::optional<LipschitzSampler> holder;
    const SamplerPtr ptr = make_sampler(s, sampler, RandomSeed{decomposer_seed}, holder);
    BetaOptions opt;
    opt.with_series = holder.has_value();
    const BetaReport r = holder ? estimate_beta(*holder, delta, draws, pairs, RandomSeed{seed}, opt)
                                : estimate_beta(*ptr, s, delta, draws, pairs, RandomSeed{seed}, opt);
    py::dict out;
    out["beta_hat"] = r.beta_hat;
    out["pairs"] = r.pairs_tested;
    out["draws"] = r.draws;
    out["delta"] = r.delta;
    out["worst_pair"] = py::make_tuple(r.worst_pair.first, r.worst_pair.second);
    out["series"] = r.series;
    return out;
  }, py::arg("points"), py::arg("p"), py::arg("delta"), py::arg("sampler") = "recursive",
     py::arg("draws") = 200, py::arg("pairs") = 1u << 20, py::arg("seed") = 0,
     py::arg("decomposer_seed") = 0);

  m.def("median_pairwise_distance", [](const Array& points, const py::object& p) {
    return median_pairwise_distance(to_points(points, p));
  }, py::arg("points"), py::arg("p"));

  m.def("ann_bench", [](const Array& points, const Array& queries, double p, std::uint64_t seed,
                        double r, const std::string& base, std::optional<int> inner_k) {
    const PointSet v = to_points(points, py::float_(p));
    const PointSet q = to_points(queries, py::float_(p));
    AnnConfig cfg;
    cfg.p = p;
    cfg.r = r;
    cfg.base = parse_ann_base(base);
    cfg.inner_k = inner_k;
    const auto structure = build_recursive_ann(v, cfg, RandomSeed{seed});
    const AnnBenchReport report = ann_bench(*structure, q, r, RandomSeed{seed});
    std::vector<double> ratios, base_dist;
    for (const auto& row : report.rows) {
      ratios.push_back(row.ratio);
      base_dist.push_back(row.base_dist);
    }
    py::dict out = py::module_::import("json").attr("loads")(report.summary().dump());
    out["ratios"] = to_array(ratios);
    out["base_dist"] = to_array(base_dist);
    out["c_schedule"] = structure->c_schedule();
    out["stored_points"] = structure->stored_points();
    return out;
  }, py::arg("points"), py::arg("queries"), py::arg("p"), py::arg("seed"), py::arg("r") = 1.0,
     py::arg("base") = "crude-grid", py::arg("inner_k") = py::none());

  m.def("predict_c", &predict_c, py::arg("p"), py::arg("t"), py::arg("c_p"), py::arg("c_t"));
  m.def("predict_fixpoint", &predict_fixpoint, py::arg("p"), py::arg("q"), py::arg("beta_star_q"),
        py::arg("constant") = kRefineConstant);
  m.def("refined_beta", &refined_beta, py::arg("p"), py::arg("q"), py::arg("beta"),
        py::arg("beta_star_q"), py::arg("constant") = kRefineConstant);

  m.def("localized_certificate", [](const Array& points, double p, double K, double delta,
                                    double q, std::optional<double> c) {
    const PointSet s = to_points(points, py::float_(p));
    const LocalizedMap f = localized_map(s, K, delta, q);
    const double D = c.value_or(localized_distortion_constant(p, q)) * std::pow(K, p / q - 1.0);
    py::dict out = cert_dict(verify_localized(s, f.images, delta, D));
    out["images"] = to_array(f.images);
    return out;
  }, py::arg("points"), py::arg("p"), py::arg("K"), py::arg("delta"), py::arg("q") = 2.0,
     py::arg("c") = py::none());

  m.def("theorem_exponent", [](double p, int k) { return exponent_dict(theorem_exponent(p, k)); },
        py::arg("p"), py::arg("k"));
  m.def("exponent_table", [](const std::vector<double>& grid, int k, double eps) {
    py::list out;
    for (const auto& b : exponent_table(grid, k, eps)) out.append(exponent_dict(b));
    return out;
  }, py::arg("p_grid"), py::arg("k") = 50, py::arg("eps") = 0.0);
}
