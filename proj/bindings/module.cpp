// Python bindings for the pooling/matching core.  Configs and reports cross
// the boundary as plain dicts (converted to/from JSON); vectors and matrices
// as numpy arrays.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "poolmatch/embedding_io.hpp"
#include "poolmatch/evaluation.hpp"
#include "poolmatch/flow.hpp"
#include "poolmatch/harness.hpp"
#include "poolmatch/metric.hpp"
#include "poolmatch/pooling.hpp"
#include "poolmatch/sphere.hpp"

namespace py = pybind11;
using namespace poolmatch;

namespace {

nlohmann::json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& item : obj) arr.push_back(py_to_json(item));
        return arr;
    }
    if (py::isinstance<py::dict>(obj)) {
        nlohmann::json map = nlohmann::json::object();
        for (const auto& item : obj.cast<py::dict>())
            map[item.first.cast<std::string>()] = py_to_json(item.second);
        return map;
    }
    throw std::invalid_argument("unsupported value in config dict");
}

py::object json_to_py(const nlohmann::ordered_json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<long long>());
        case nlohmann::json::value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: return py::none();
    }
}

RunConfig config_from_dict(const py::dict& doc) {
    return RunConfig::from_json(py_to_json(doc));
}

py::dict table_to_dict(const ResultTable& table) {
    std::ostringstream buffer;
    emit_json(table, buffer);
    return json_to_py(nlohmann::ordered_json::parse(buffer.str())).cast<py::dict>();
}

PatchTensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3) throw std::invalid_argument("patches must have shape (B, N, D)");
    PatchTensor t(arr.shape(0), arr.shape(1), arr.shape(2));
    std::copy(arr.data(), arr.data() + arr.size(), t.data.begin());
    return t;
}

py::array_t<double> tensor_to_array(const PatchTensor& t) {
    py::array_t<double> arr({t.batch, t.patches, t.channels});
    std::copy(t.data.begin(), t.data.end(), arr.mutable_data());
    return arr;
}

}  // namespace

PYBIND11_MODULE(_poolmatch, m) {
    m.doc() = "dataset pooling strategies: naive pooling, uniform subsampling, and "
              "centroid matching, with hyperspherical and flow-transport tooling";

    // --- metric -----------------------------------------------------------
    py::class_<MetricSpec>(m, "MetricSpec")
        .def_static("euclidean", &MetricSpec::Euclidean)
        .def_static("scaled", &MetricSpec::Scaled, py::arg("factor"))
        .def_static("geodesic_chord", &MetricSpec::GeodesicChord)
        .def_readonly("m", &MetricSpec::m)
        .def_readonly("L", &MetricSpec::L)
        .def_property_readonly("kind", &MetricSpec::kind_name)
        .def("__repr__", [](const MetricSpec& s) {
            return std::string("MetricSpec(") + s.kind_name() + ")";
        });
    m.def("metric_eval", &metric_eval, py::arg("metric"), py::arg("v"));
    m.def(
        "tau_bands",
        [](const MetricSpec& metric, double eps_K, double tau) {
            const TauBands b = tau_bands(metric, eps_K, tau);
            py::dict out;
            out["exclusion_radius"] = b.exclusion_radius;
            out["inclusion_radius"] =
                b.inclusion_radius ? py::object(py::float_(*b.inclusion_radius)) : py::none();
            return out;
        },
        py::arg("metric"), py::arg("eps_k"), py::arg("tau"));

    // --- meta-distributions and domains ------------------------------------
    py::class_<MetaSpec>(m, "MetaSpec")
        .def_static("symmetric", &MetaSpec::Symmetric, py::arg("mu_star"), py::arg("gamma"))
        .def_static("asymmetric", &MetaSpec::Asymmetric, py::arg("mu_star"), py::arg("alpha"),
                    py::arg("direction"))
        .def_static("two_point", &MetaSpec::TwoPoint, py::arg("mu_star"), py::arg("offset"),
                    py::arg("prob"))
        .def_static("outlier_sequence", &MetaSpec::OutlierSequence, py::arg("base"),
                    py::arg("outlier_distance"), py::arg("every"))
        .def_property_readonly("kind", &MetaSpec::kind_name)
        .def_property_readonly("dim", &MetaSpec::dim)
        .def("mean_of_means", &MetaSpec::mean_of_means)
        .def("has_closed_form_sigma_mu", &MetaSpec::has_closed_form_sigma_mu)
        .def("sigma_mu", &MetaSpec::sigma_mu);

    py::class_<Domain>(m, "Domain")
        .def_readonly("index", &Domain::index)
        .def_readonly("mean", &Domain::mean)
        .def_readonly("sigma", &Domain::sigma)
        .def_readonly("samples", &Domain::samples)
        .def("empirical_mean", &Domain::empirical_mean)
        .def_property_readonly("count", &Domain::count);

    m.def("sample_domain_means", &sample_domain_means, py::arg("spec"), py::arg("k"),
          py::arg("seed"));
    m.def("outlier_sequence_means", &outlier_sequence_means, py::arg("base"),
          py::arg("outlier_distance"), py::arg("every"), py::arg("k"), py::arg("seed"));
    m.def("sample_domain", &sample_domain, py::arg("mean"), py::arg("sigma"), py::arg("n"),
          py::arg("seed"), py::arg("index") = 0);
    m.def("sample_domains", &sample_domains, py::arg("spec"), py::arg("k"), py::arg("sigma"),
          py::arg("n"), py::arg("seed"));

    // --- pooling strategies -------------------------------------------------
    py::enum_<Strategy>(m, "Strategy")
        .value("naive", Strategy::naive)
        .value("subsample", Strategy::subsample)
        .value("matching", Strategy::matching);

    py::enum_<CentroidInit>(m, "CentroidInit")
        .value("median", CentroidInit::median)
        .value("target_oracle", CentroidInit::target_oracle)
        .value("zero", CentroidInit::zero);

    py::class_<PooledResult>(m, "PooledResult")
        .def_readonly("strategy", &PooledResult::strategy)
        .def_readonly("mean_estimate", &PooledResult::mean_estimate)
        .def_readonly("covariance_estimate", &PooledResult::covariance_estimate)
        .def_readonly("included_domains", &PooledResult::included_domains)
        .def_readonly("total_samples", &PooledResult::total_samples);

    py::class_<MatchState>(m, "MatchState")
        .def_readonly("centroid", &MatchState::centroid)
        .def_readonly("tau", &MatchState::tau)
        .def_readonly("matched", &MatchState::matched)
        .def_readonly("matched_samples", &MatchState::matched_samples)
        .def_readonly("iterations", &MatchState::iterations)
        .def_readonly("converged", &MatchState::converged)
        .def_readonly("degenerate", &MatchState::degenerate)
        .def_readonly("trace", &MatchState::trace);

    py::class_<MatchOutcome>(m, "MatchOutcome")
        .def_readonly("state", &MatchOutcome::state)
        .def_readonly("pooled", &MatchOutcome::pooled);

    py::class_<AddStepResult>(m, "AddStepResult")
        .def_readonly("admitted", &AddStepResult::admitted)
        .def_readonly("delta_epsilon", &AddStepResult::delta_epsilon)
        .def_readonly("epsilon", &AddStepResult::epsilon);

    m.def("naive_pool", &naive_pool, py::arg("domains"));
    m.def("uniform_subsample", &uniform_subsample, py::arg("domains"), py::arg("m"), py::arg("n"),
          py::arg("seed"));
    m.def(
        "match_domains",
        [](const std::vector<Domain>& domains, double tau, const MetricSpec& metric,
           const std::string& init, double tol, int max_iter, bool use_true_means,
           std::optional<Eigen::VectorXd> oracle_target) {
            MatchOptions options;
            options.tau = tau;
            options.metric = metric;
            if (init == "median") options.init = CentroidInit::median;
            else if (init == "target_oracle") options.init = CentroidInit::target_oracle;
            else if (init == "zero") options.init = CentroidInit::zero;
            else throw std::invalid_argument("init must be median|target_oracle|zero");
            options.tol = tol;
            options.max_iter = max_iter;
            options.use_true_means = use_true_means;
            options.oracle_target = std::move(oracle_target);
            return match_domains(domains, options);
        },
        py::arg("domains"), py::arg("tau"), py::arg("metric") = MetricSpec::Euclidean(),
        py::arg("init") = "median", py::arg("tol") = 1e-4, py::arg("max_iter") = 100,
        py::arg("use_true_means") = false, py::arg("oracle_target") = std::nullopt);
    m.def("add_domain_step_naive", &add_domain_step_naive, py::arg("aggregate"),
          py::arg("domain"), py::arg("mu_star"));
    m.def("add_domain_step_matching", &add_domain_step_matching, py::arg("state"),
          py::arg("domain"), py::arg("mu_star"), py::arg("use_true_means") = false);

    // --- hypersphere ---------------------------------------------------------
    py::enum_<Label>(m, "Label").value("normal", Label::normal).value("anomaly", Label::anomaly);
    py::enum_<AssignDecision>(m, "AssignDecision")
        .value("update_plus", AssignDecision::update_plus)
        .value("update_minus", AssignDecision::update_minus)
        .value("skip", AssignDecision::skip);

    py::class_<SphereState>(m, "SphereState")
        .def(py::init<>())
        .def_readwrite("alpha", &SphereState::alpha)
        .def_property_readonly("c_plus",
                               [](const SphereState& s) {
                                   return s.c_plus ? py::cast(*s.c_plus) : py::none().cast<py::object>();
                               })
        .def_property_readonly("c_minus",
                               [](const SphereState& s) {
                                   return s.c_minus ? py::cast(*s.c_minus) : py::none().cast<py::object>();
                               })
        .def_readonly("s_plus", &SphereState::s_plus)
        .def_readonly("s_minus", &SphereState::s_minus);

    py::class_<AssignResult>(m, "AssignResult")
        .def_readonly("decision", &AssignResult::decision)
        .def_readonly("d_plus", &AssignResult::d_plus)
        .def_readonly("d_minus", &AssignResult::d_minus)
        .def_readonly("tau", &AssignResult::tau);

    m.def("geodesic_distance", &geodesic_distance, py::arg("f1"), py::arg("f2"));
    m.def("ema_centroid_update", &ema_centroid_update, py::arg("c"), py::arg("f"),
          py::arg("alpha"));
    m.def("adaptive_assign", &adaptive_assign, py::arg("f"), py::arg("label"), py::arg("state"));
    m.def(
        "geodesic_losses",
        [](const SphereState& state, double lambda1, double lambda2) {
            const GeodesicLosses l = geodesic_losses(state, lambda1, lambda2);
            py::dict out;
            out["intra"] = l.intra;
            out["inter"] = l.inter;
            out["total"] = l.total;
            out["notice"] = l.notice;
            return out;
        },
        py::arg("state"), py::arg("lambda1"), py::arg("lambda2"));
    m.def(
        "vaca_reweight",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& patches,
           const Eigen::MatrixXd& class_embeddings, double gamma,
           std::optional<GainMap> gain_map) {
            const VacaResult r =
                vaca_reweight(tensor_from_array(patches), class_embeddings,
                              gain_map ? *gain_map : GainMap(softplus_gain), gamma);
            py::dict out;
            out["delta"] = r.delta;
            out["weights"] = r.weights;
            out["reweighted"] = tensor_to_array(r.reweighted);
            out["var_disc"] = r.var_disc;
            return out;
        },
        py::arg("patches"), py::arg("class_embeddings"), py::arg("gamma"),
        py::arg("gain_map") = std::nullopt);

    py::class_<ModeBank>(m, "ModeBank")
        .def(py::init([](std::vector<Eigen::VectorXd> centroids, std::vector<double> taus,
                         const MetricSpec& metric) {
                 ModeBank bank;
                 bank.centroids = std::move(centroids);
                 bank.taus = std::move(taus);
                 bank.metric = metric;
                 return bank;
             }),
             py::arg("centroids"), py::arg("taus"), py::arg("metric") = MetricSpec::Euclidean())
        .def_readonly("centroids", &ModeBank::centroids)
        .def_readonly("taus", &ModeBank::taus);

    m.def("multimodal_assign", &multimodal_assign, py::arg("x"), py::arg("bank"));
    m.def("check_mode_separation", &check_mode_separation, py::arg("true_modes"), py::arg("bank"),
          py::arg("r_max"), py::arg("eps_max"));

    m.def("load_embeddings_binary", &load_embeddings_binary, py::arg("path"));
    m.def("save_embeddings_binary", &save_embeddings_binary, py::arg("path"), py::arg("rows"));
    m.def("load_embeddings_csv", &load_embeddings_csv, py::arg("path"));
    m.def("save_embeddings_csv", &save_embeddings_csv, py::arg("path"), py::arg("rows"));

    // --- flows ----------------------------------------------------------------
    py::class_<FlowMap>(m, "FlowMap")
        .def_readonly("dim", &FlowMap::dim)
        .def_readonly("lipschitz_bound", &FlowMap::lipschitz_bound)
        .def("forward", &FlowMap::forward, py::arg("z"))
        .def("inverse", &FlowMap::inverse, py::arg("x"));

    m.def(
        "build_flow",
        [](int dim, const py::list& layers) {
            std::vector<LayerSpec> specs;
            for (const auto& item : layers) {
                const py::dict layer = item.cast<py::dict>();
                const std::string kind = layer["kind"].cast<std::string>();
                if (kind == "diagonal_affine") {
                    DiagonalAffineLayer spec;
                    spec.scale = layer["scale"].cast<Eigen::VectorXd>();
                    spec.shift = layer.contains("shift")
                                     ? layer["shift"].cast<Eigen::VectorXd>()
                                     : Eigen::VectorXd::Zero(spec.scale.size()).eval();
                    specs.emplace_back(std::move(spec));
                } else if (kind == "additive_coupling") {
                    AdditiveCouplingLayer spec;
                    spec.weights = layer["weights"].cast<Eigen::MatrixXd>();
                    spec.bias = layer.contains("bias")
                                    ? layer["bias"].cast<Eigen::VectorXd>()
                                    : Eigen::VectorXd::Zero(spec.weights.rows()).eval();
                    spec.scale = layer.contains("scale") ? layer["scale"].cast<double>() : 1.0;
                    specs.emplace_back(std::move(spec));
                } else {
                    throw std::invalid_argument("layer kind must be diagonal_affine or additive_coupling");
                }
            }
            return build_flow(dim, specs);
        },
        py::arg("dim"), py::arg("layers"));
    m.def(
        "verify_transport",
        [](const FlowMap& flow, const Eigen::VectorXd& c_z, double tau, int sample_count,
           std::uint64_t seed) {
            const TransportReport r = verify_transport(flow, c_z, tau, sample_count, seed);
            py::dict out;
            out["variance_lhs"] = r.variance_lhs;
            out["variance_bound"] = r.variance_bound;
            out["mean_shift"] = r.mean_shift;
            out["mean_bound"] = r.mean_bound;
            out["passed"] = r.passed;
            return out;
        },
        py::arg("flow"), py::arg("c_z"), py::arg("tau"), py::arg("sample_count"), py::arg("seed"));

    // --- evaluation -------------------------------------------------------------
    m.def("error_norm", &error_norm, py::arg("estimate"), py::arg("mu_star"));
    m.def(
        "da_score",
        [](const std::vector<double>& y, std::optional<std::vector<double>> weights) {
            if (y.size() != 5) throw std::invalid_argument("da_score: y must have 5 values");
            DaInput input;
            std::copy(y.begin(), y.end(), input.y.begin());
            if (weights) {
                if (weights->size() != 4)
                    throw std::invalid_argument("da_score: weights must have 4 values");
                std::copy(weights->begin(), weights->end(), input.s.begin());
            }
            return da_score(input);
        },
        py::arg("y"), py::arg("weights") = std::nullopt);

    // --- harness -----------------------------------------------------------------
    m.def("default_config", [](const std::string& regime) {
        return json_to_py(RunConfig::defaults_for(regime_from_name(regime)).to_json());
    });
    m.def("run_regime",
          [](const py::dict& config) { return table_to_dict(run_regime(config_from_dict(config))); });
    m.def("run_regime_to_file",
          [](const py::dict& config, const std::string& format, const std::string& path) {
              const RunConfig cfg = config_from_dict(config);
              emit(run_regime(cfg), format, path);
          });
    m.def("audit_properties",
          [](const py::dict& config) { return json_to_py(audit_properties(config_from_dict(config))); });
    m.def("audit_transport",
          [](const py::dict& config) { return json_to_py(audit_transport(config_from_dict(config))); });
}
