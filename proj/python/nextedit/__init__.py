"""Python front end of the next-edit engine.

The extension speaks JSON text; this layer turns it into plain dicts.
"""
import json

from . import _core
from ._core import EngineError, bleu4, exact_match, lcs

__all__ = ["EngineError", "Session", "bleu4", "classify", "exact_match", "lcs", "represent", "simulate"]


def represent(diff, language="python"):
    """Six-label enrichment of every hunk in a unified diff."""
    return json.loads(_core.represent(diff, language))


def classify(last, priors=(), language="python", backend="heuristic", seed=0, project_root=None):
    """Which edit compositions the latest edit invokes."""
    return json.loads(_core.classify(json.dumps(last), json.dumps(list(priors)), language, backend, seed,
                                     str(project_root or "")))


def simulate(repo, commits, language="python", seed=0, invoker="heuristic", locator="clone_baseline",
             generator="template"):
    """Replays commits against the engine (lexical tools) and returns the report."""
    return json.loads(_core.simulate(str(repo), list(commits), language, seed, invoker, locator, generator))


class Session:
    """In-process equivalent of `nextedit serve`."""

    def __init__(self, root, language="python", **options):
        options.setdefault("lsp", False)
        self._core = _core.Session(json.dumps(options))
        self._next_id = 0
        self.call("initialize", root=str(root), language=language)

    def call(self, method, **params):
        self._next_id += 1
        reply = json.loads(self._core.handle(json.dumps(
            {"jsonrpc": "2.0", "id": self._next_id, "method": method, "params": params})))
        if "error" in reply:
            err = reply["error"]
            kind = err.get("data", {}).get("kind", "")
            raise EngineError(f"{err['message']} ({err['code']}{', ' + kind if kind else ''})")
        return reply["result"]

    def append(self, edit):
        return self.call("append", edit=edit)["revision"]

    def step(self):
        return self.call("step")["recommendations"]

    def accept(self, index=0, candidate=0):
        return self.call("accept", index=index, candidate=candidate, revision=self.revision)

    def reject(self, index=0):
        return self.call("reject", index=index)

    @property
    def revision(self):
        return self._core.revision
