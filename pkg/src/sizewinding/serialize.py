"""CSV and JSON emission with embedded, round-trippable run metadata.

All JSON documents carry {"schema_version": 1} and the fully resolved
parameter set that produced them.  Files are byte-deterministic for fixed
seeds: volatile quantities (wall time) are reported on the console, never
embedded.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dist import ContinuousDistribution
from .ed import EnsembleResult, SizeDistribution
from .largeq import LargeQParams
from .teleport import TeleportResult

SCHEMA_VERSION = 1

DIST_CSV_COLUMNS = "s,P,ReQ,ImQ,absQ,argQ"
ED_CSV_COLUMNS = "t,n,meanP,ReMeanQ,ImMeanQ,absMeanQ,argMeanQ,stderrP,stderrAbsQ"
TELEPORT_CSV_COLUMNS = "t,g,ReF,ImF,absF"


def params_dict(params: LargeQParams) -> dict:
    return {
        "delta": params.delta,
        "v": params.v,
        "beta": params.beta,
        "coupling_beta_j": params.coupling_beta_j,
        "prefactor_c": params.prefactor_c,
    }


def _write(path, text: str):
    Path(path).write_text(text)


def distribution_csv(dist: ContinuousDistribution, path,
                     extra_meta: dict | None = None):
    meta = {"schema_version": SCHEMA_VERSION, "mode": dist.mode,
            "lambda0": dist.lambda0, "t": dist.t, "n": dist.n,
            "params": params_dict(dist.params)}
    if extra_meta:
        meta.update(extra_meta)
    lines = [f"# {json.dumps(meta, sort_keys=True)}", DIST_CSV_COLUMNS]
    arg_q = np.angle(dist.q)
    for i, s in enumerate(dist.s_grid):
        row = (float(s), float(dist.p[i]), float(dist.q[i].real),
               float(dist.q[i].imag), float(abs(dist.q[i])), float(arg_q[i]))
        lines.append(",".join(repr(x) for x in row))
    _write(path, "\n".join(lines) + "\n")


def distribution_json(dist: ContinuousDistribution, path,
                      extra_meta: dict | None = None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "distribution",
        "mode": dist.mode,
        "lambda0": dist.lambda0,
        "t": dist.t,
        "n": dist.n,
        "params": params_dict(dist.params),
        "s": dist.s_grid.tolist(),
        "p": dist.p.tolist(),
        "q_re": dist.q.real.tolist(),
        "q_im": dist.q.imag.tolist(),
    }
    if extra_meta:
        doc.update(extra_meta)
    _write(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


def ensemble_json(result: EnsembleResult, path, config: dict | None = None):
    p = result.params
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "ed_ensemble",
        "params": {
            "n_majorana": p.n_majorana, "q": p.q, "script_j": p.script_j,
            "beta": p.beta, "base_seed": p.base_seed,
        },
        "k_probe": result.k_probe,
        "t_list": list(result.t_list),
        "realization_seeds": list(result.realization_seeds),
        "v_expectations": result.v_expectations.tolist(),
        "mean_v_expectation": result.mean_v_expectation,
        "mean_p": result.mean_p.tolist(),
        "mean_q_re": result.mean_q.real.tolist(),
        "mean_q_im": result.mean_q.imag.tolist(),
        "stderr_p": result.stderr_p.tolist(),
        "stderr_abs_q": result.stderr_abs_q.tolist(),
        "realizations": [
            {
                "seed_key": list(dists[0].seed_key),
                "times": [
                    {"t": d.t, "p": d.p.tolist(),
                     "q_re": d.q.real.tolist(), "q_im": d.q.imag.tolist()}
                    for d in dists
                ],
            }
            for dists in result.realizations
        ],
    }
    if config:
        doc["config"] = config
    _write(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


def ensemble_csv(result: EnsembleResult, path, config: dict | None = None):
    p = result.params
    meta = {"schema_version": SCHEMA_VERSION,
            "params": {"n_majorana": p.n_majorana, "q": p.q,
                       "script_j": p.script_j, "beta": p.beta,
                       "base_seed": p.base_seed},
            "k_probe": result.k_probe, "t_list": list(result.t_list)}
    if config:
        meta["config"] = config
    lines = [f"# {json.dumps(meta, sort_keys=True)}", ED_CSV_COLUMNS]
    for ti, t in enumerate(result.t_list):
        mq = result.mean_q[ti]
        for n in range(result.params.n_majorana + 1):
            row = (float(t), n, float(result.mean_p[ti, n]),
                   float(mq[n].real), float(mq[n].imag), float(abs(mq[n])),
                   float(np.angle(mq[n])), float(result.stderr_p[ti, n]),
                   float(result.stderr_abs_q[ti, n]))
            lines.append(",".join(repr(x) for x in row))
    _write(path, "\n".join(lines) + "\n")


def load_ensemble_json(path) -> dict:
    """Load and schema-check an ensemble document; raises ValueError on mismatch."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("kind") != "ed_ensemble":
        raise ValueError(f"{path}: expected an ed_ensemble document")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: schema_version "
                         f"{doc.get('schema_version')!r} != {SCHEMA_VERSION}")
    for key in ("params", "t_list", "mean_p", "mean_q_re", "mean_q_im",
                "mean_v_expectation"):
        if key not in doc:
            raise ValueError(f"{path}: missing key {key!r}")
    return doc


def mean_distributions_from_doc(doc: dict) -> list[SizeDistribution]:
    n = int(doc["params"]["n_majorana"])
    out = []
    for ti, t in enumerate(doc["t_list"]):
        q = np.asarray(doc["mean_q_re"][ti]) + 1j * np.asarray(doc["mean_q_im"][ti])
        out.append(SizeDistribution(
            n_values=np.arange(n + 1), p=np.asarray(doc["mean_p"][ti]),
            q=q, t=float(t), beta=float(doc["params"]["beta"])))
    return out


def teleport_csv(results: list[TeleportResult], path,
                 config: dict | None = None):
    meta = {"schema_version": SCHEMA_VERSION}
    if results:
        meta["v_expectation"] = results[0].v_expectation
        meta["n"] = results[0].n
        meta["method"] = results[0].method
    if config:
        meta["config"] = config
    lines = [f"# {json.dumps(meta, sort_keys=True)}", TELEPORT_CSV_COLUMNS]
    for r in results:
        row = (float(r.t), float(r.g), float(r.f_value.real),
               float(r.f_value.imag), float(abs(r.f_value)))
        lines.append(",".join(repr(x) for x in row))
    _write(path, "\n".join(lines) + "\n")


def teleport_json(results: list[TeleportResult], path,
                  config: dict | None = None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "teleport",
        "results": [
            {"t": r.t, "g": r.g, "f_re": r.f_value.real, "f_im": r.f_value.imag,
             "abs_f": abs(r.f_value), "v_expectation": r.v_expectation,
             "n": r.n, "method": r.method}
            for r in results
        ],
    }
    if config:
        doc["config"] = config
    _write(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")
