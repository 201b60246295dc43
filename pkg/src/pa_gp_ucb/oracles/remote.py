"""JSON-over-HTTP prediction oracle driven by fixed prompt templates.

Request body: ``{"prompt": "<rendered template>"}``.
Response body: ``{"pred_visits": <number>}``, nothing else.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
import urllib.error
import urllib.request
from importlib import resources
from pathlib import Path
from typing import Callable

from ..errors import InputError, RemoteOracleError

TEMPLATES = ("k_shot", "scale_only")
_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)(?::([^{}]*))?\}")


def load_template(name: str) -> str:
    if name not in TEMPLATES:
        raise InputError(f"unknown template {name!r}; choose from {TEMPLATES}")
    return (resources.files("pa_gp_ucb.oracles") / "templates" / f"{name}.txt").read_text(encoding="utf-8")


def _expand_examples(text: str, n: int) -> str:
    """Replace the schematic ``1) .. 2) .. ... K)`` block with ``n`` numbered lines."""
    lines = text.split("\n")
    start = next(i for i, ln in enumerate(lines) if ln.startswith('1) "{cond_1}"'))
    stop = next(i for i, ln in enumerate(lines) if ln.startswith('K) "{cond_K}"'))
    pattern = lines[start]
    block = [pattern.replace("1", str(j)) for j in range(1, n + 1)]
    return "\n".join(lines[:start] + block + lines[stop + 1:])


def render_prompt(template: str, fill: dict) -> str:
    """Render a template; ``k_shot`` takes ``examples`` as a list of ``(condition, value)``."""
    text = load_template(template)
    values = dict(fill)
    if template == "k_shot":
        examples = values.pop("examples", None)
        if not examples:
            raise InputError("k_shot fill needs a nonempty 'examples' list")
        text = _expand_examples(text, len(examples))
        for j, (cond, y) in enumerate(examples, start=1):
            values[f"cond_{j}"] = cond
            values[f"y_{j}"] = float(y)

    def sub(m):
        name, spec = m.group(1), m.group(2)
        if name not in values:
            raise InputError(f"template placeholder {{{name}}} not provided")
        return format(values[name], spec or "")

    return _PLACEHOLDER.sub(sub, text)


def parse_response(body) -> float:
    """Validate a response body and return its ``pred_visits`` value."""
    try:
        data = json.loads(body)
    except (TypeError, ValueError) as exc:
        raise RemoteOracleError(f"response is not JSON: {exc}") from None
    if not isinstance(data, dict) or set(data) != {"pred_visits"}:
        raise RemoteOracleError(f"expected exactly {{'pred_visits': number}}, got {data!r}")
    value = data["pred_visits"]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RemoteOracleError(f"pred_visits is not a number: {value!r}")
    if not math.isfinite(value):
        raise RemoteOracleError("pred_visits is not finite")
    return float(value)


def http_post(endpoint: str, body: bytes, timeout: float) -> bytes:
    req = urllib.request.Request(endpoint, data=body, method="POST", headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.read()


class PredictionCache:
    """Responses keyed by ``(template, hash of fill)``, persisted as a JSON object."""

    def __init__(self, path):
        self.path = Path(path)
        self._data = json.loads(self.path.read_text(encoding="utf-8")) if self.path.exists() else {}

    @staticmethod
    def key(template: str, fill: dict) -> str:
        digest = hashlib.sha256(json.dumps(fill, sort_keys=True, default=str).encode()).hexdigest()
        return f"{template}:{digest}"

    def get(self, template, fill):
        return self._data.get(self.key(template, fill))

    def put(self, template, fill, value):
        self._data[self.key(template, fill)] = value
        self.path.write_text(json.dumps(self._data, indent=1, sort_keys=True), encoding="utf-8")


def remote_prediction(
    endpoint: str,
    template: str,
    fill: dict,
    timeout: float = 30.0,
    cache: PredictionCache | None = None,
    transport: Callable[[str, bytes, float], bytes] = http_post,
) -> float:
    """One deterministic prediction query; every failure surfaces as ``RemoteOracleError``."""
    if cache is not None:
        hit = cache.get(template, fill)
        if hit is not None:
            return float(hit)
    prompt = render_prompt(template, fill)
    body = json.dumps({"prompt": prompt}).encode("utf-8")
    try:
        raw = transport(endpoint, body, timeout)
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise RemoteOracleError(f"transport failure: {exc}") from None
    value = parse_response(raw)
    if cache is not None:
        cache.put(template, fill, value)
    return value
