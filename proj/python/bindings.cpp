#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nextedit/lcs.hpp"
#include "nextedit/lsp/services.hpp"
#include "nextedit/serialize.hpp"
#include "nextedit/server.hpp"
#include "nextedit/simulation.hpp"

namespace py = pybind11;
using namespace nextedit;

namespace {

// Structured values cross the boundary as JSON text; the Python package
// decodes them.

std::string represent(const std::string& diff, const std::string& language) {
  const Language lang = language_from_string(language);
  json out = json::array();
  for (const auto& h : parse_unified_diff(diff)) {
    const auto e = enrich(h, lang);
    json row = {{"file", h.file}, {"old_span", h.old_span}, {"new_span", h.new_span}, {"encoding", render_enriched(e)}};
    row["inline"] = json::array();
    row["inter"] = json::array();
    for (auto l : e.inline_labels) row["inline"].push_back(tag(l));
    for (auto l : e.inter_labels) row["inter"].push_back(tag(l));
    row["reconstructed"] = reconstruct(e);
    out.push_back(std::move(row));
  }
  return out.dump();
}

std::vector<MatchPair> lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return longest_common_subsequence<std::string>(a, b);
}

std::string classify(const std::string& last_json, const std::string& priors_json, const std::string& language,
                     const std::string& backend, std::uint64_t seed, const std::string& project_root) {
  const Language lang = language_from_string(language);
  const Edit last = json::parse(last_json).get<Edit>();
  std::vector<Edit> priors;
  for (const auto& e : json::parse(priors_json)) priors.push_back(e.get<Edit>());
  std::optional<Project> project;
  InvokerContext ctx;
  if (!project_root.empty()) {
    project = Project::load(project_root, lang);
    ctx.project = &*project;
  }
  auto invoker = make_invoker(backend, lang, seed);
  return json(invoker->classify(last, priors, ctx)).dump();
}

std::string simulate(const std::string& repo, const std::vector<std::string>& commits, const std::string& language,
                     std::uint64_t seed, const std::string& invoker_name, const std::string& locator_name,
                     const std::string& generator_name) {
  const Language lang = language_from_string(language);
  std::vector<CommitReport> reports;
  for (std::size_t i = 0; i < commits.size(); ++i) {
    auto invoker = invoker_name == "none" ? nullptr : make_invoker(invoker_name, lang, seed + i);
    auto locator = locator_name == "none" ? nullptr : make_locator(locator_name);
    auto generator = generator_name == "none" ? nullptr : make_generator(generator_name);
    LexicalToolServices tools;
    Engine engine{invoker.get(), &tools, locator.get(), generator.get()};
    SimConfig cfg;
    cfg.seed = seed + i;
    py::gil_scoped_release release;
    reports.push_back(simulate_commit(repo, commits[i], lang, engine, cfg));
  }
  return report_json(aggregate(std::move(reports), seed)).dump();
}

class PySession {
 public:
  PySession(const std::string& options_json) {
    const json o = json::parse(options_json);
    ServerOptions opts;
    opts.invoker = o.value("invoker", opts.invoker);
    opts.locator = o.value("locator", opts.locator);
    opts.generator = o.value("generator", opts.generator);
    opts.lsp = o.value("lsp", opts.lsp);
    opts.seed = o.value("seed", opts.seed);
    if (o.contains("lsp_config")) opts.lsp_config = o["lsp_config"];
    server_ = std::make_unique<SessionServer>(std::move(opts));
  }

  std::string handle(const std::string& message) {
    json reply;
    {
      py::gil_scoped_release release;
      reply = server_->handle(json::parse(message));
    }
    return reply.is_null() ? std::string() : reply.dump();
  }

  long revision() const { return server_->revision(); }

 private:
  std::unique_ptr<SessionServer> server_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Next-edit prediction engine";

  static py::exception<Error> engine_error(m, "EngineError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(engine_error)(e.what());
      err.attr("kind") = std::string(to_string(e.code()));
      PyErr_SetObject(engine_error.ptr(), err.ptr());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("represent", &represent, py::arg("diff"), py::arg("language") = "python");
  m.def("bleu4", py::overload_cast<std::string_view, std::string_view>(&bleu4), py::arg("candidate"),
        py::arg("reference"));
  m.def("exact_match", &exact_match, py::arg("a"), py::arg("b"));
  m.def("lcs", &lcs, py::arg("a"), py::arg("b"), "Longest common subsequence as (i, j) index pairs.");
  m.def("classify", &classify, py::arg("last"), py::arg("priors"), py::arg("language"), py::arg("backend"),
        py::arg("seed") = 0, py::arg("project_root") = "");
  m.def("simulate", &simulate, py::arg("repo"), py::arg("commits"), py::arg("language"), py::arg("seed"),
        py::arg("invoker"), py::arg("locator"), py::arg("generator"));

  py::class_<PySession>(m, "Session")
      .def(py::init<const std::string&>(), py::arg("options") = "{}")
      .def("handle", &PySession::handle, py::arg("message"))
      .def_property_readonly("revision", &PySession::revision);
}
