"""
Config Manager - Load, merge and validate run configurations
"""
import copy
import json
import logging
import math
import os
from typing import Any, Dict, List, Optional

from core.averages import FORMULA_IDS
from core.errors import ConfigError, InputError
from core.measure import WeightSpec
from core.oracle import OracleConfig
from core.transforms import SpectralShift
from interfaces.weight_interface import WeightRegistry

logger = logging.getLogger(__name__)

FORMULAS = FORMULA_IDS
OUTPUT_FORMATS = ("csv", "structured-text")
SUITES = ("none", "transforms", "averages", "darboux", "all")


def parse_complex(text: Any, field: Optional[str] = None) -> complex:
    """
    Parse "re+imi" notation: "4+1i", "-2i", "3", "1e-3-2.5i", "i".

    JSON numbers are accepted as they are.

    Raises:
        ConfigError: malformed or non-finite value
    """
    if isinstance(text, bool):
        raise ConfigError(f"expected a number, got {text!r}", field)
    if isinstance(text, (int, float)):
        value = complex(text)
    elif isinstance(text, str):
        value = _parse_complex_text(text.replace(" ", ""), field)
    else:
        raise ConfigError(f"expected a number, got {text!r}", field)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ConfigError(f"value must be finite, got {text!r}", field)
    return value


def _parse_complex_text(s: str, field: Optional[str]) -> complex:
    try:
        if not s.endswith("i"):
            return complex(float(s), 0.0)
        body = s[:-1]
        split = 0
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                split = pos
                break
        real_part, imag_part = body[:split], body[split:]
        if imag_part in ("", "+", "-"):
            imag_part += "1"
        return complex(float(real_part) if real_part else 0.0, float(imag_part))
    except ValueError:
        raise ConfigError(f"cannot parse complex number {s!r} (use re+imi, e.g. 4+1i)", field)


def format_complex(value: complex) -> str:
    """Inverse of parse_complex; uses repr so values round-trip exactly."""
    value = complex(value)
    if value.imag == 0.0:
        return repr(value.real)
    imag = f"{value.imag!r}i"
    if value.real == 0.0:
        return imag
    sign = "" if imag.startswith("-") else "+"
    return f"{value.real!r}{sign}{imag}"


class ConfigManager:
    """Manage a run configuration (weight, shift, formula, output, oracle)."""

    DEFAULT_CONFIG = {
        "weight": {
            "family": "legendre",
            "params": [],
            "support": None,
            "nodes": 128,
        },
        "recurrence": {
            "n_max": 12,
        },
        "shift": {
            "mu": [],
            "lambda": [],
            "eps": [],
        },
        "average": {
            "formula": "ratio",
            "N": 1,
            "K": None,
            "M": None,
            "refine": True,
        },
        "output": {
            "path": None,
            "format": "csv",
        },
        "oracle": {
            "nodes_per_dim": 24,
            "N": 2,
            "mc_samples": 100000,
            "seed": 0,
            "budget": 10 ** 7,
            "refine_tol": 1e-8,
        },
        "verify": {
            "suite": "none",
        },
    }

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path
        self.config = copy.deepcopy(self.DEFAULT_CONFIG)
        self._raw_text = ""
        if config_path:
            self.load()

    def load(self) -> bool:
        """
        Load configuration from file.

        Raises:
            ConfigError: unreadable file or invalid JSON (with line number)
        """
        if not os.path.exists(self.config_path):
            raise ConfigError(f"config file not found: {self.config_path}")
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                self._raw_text = f.read()
            loaded = json.loads(self._raw_text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg}", line=e.lineno)
        except IOError as e:
            raise ConfigError(f"cannot read config: {e}")
        if not isinstance(loaded, dict):
            raise ConfigError("config root must be an object", line=1)
        self._merge_config(loaded)
        logger.debug("loaded config from %s", self.config_path)
        return True

    def _merge_config(self, loaded: dict):
        """Merge loaded config with defaults; unknown keys are errors."""
        for key, value in loaded.items():
            if key not in self.config:
                raise ConfigError(f"unknown section '{key}'", key, self._line_of(key))
            if isinstance(self.config[key], dict):
                if not isinstance(value, dict):
                    raise ConfigError("section must be an object", key, self._line_of(key))
                for sub in value:
                    if sub not in self.config[key]:
                        raise ConfigError(f"unknown key '{sub}'", f"{key}.{sub}",
                                          self._line_of(sub))
                self.config[key].update(value)
            else:
                self.config[key] = value

    def _line_of(self, key: str) -> Optional[int]:
        needle = f'"{key}"'
        for number, line in enumerate(self._raw_text.splitlines(), start=1):
            if needle in line:
                return number
        return None

    def _error(self, message: str, field: str) -> ConfigError:
        return ConfigError(message, field, self._line_of(field.split(".")[-1].split("[")[0]))

    def save(self, path: str) -> bool:
        """Save configuration to file."""
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2, ensure_ascii=False)
            return True
        except IOError as e:
            logger.error("error saving config: %s", e)
        return False

    def get(self, section: str, key: str, default: Any = None) -> Any:
        return self.config.get(section, {}).get(key, default)

    def apply_overrides(self, overrides: Dict[str, Any]):
        """
        Apply command-line values; keys are dotted ("weight.family").
        None values are ignored.
        """
        for dotted, value in overrides.items():
            if value is None:
                continue
            section, key = dotted.split(".", 1)
            if section not in self.config or key not in self.config[section]:
                raise ConfigError("unknown override", dotted)
            self.config[section][key] = value

    # Weight
    def get_weight_spec(self) -> WeightSpec:
        weight = self.config["weight"]
        family = weight.get("family")
        if not isinstance(family, str) or not WeightRegistry.is_registered(family):
            raise self._error(
                f"unknown weight family {family!r} "
                f"(available: {', '.join(WeightRegistry.get_available())})",
                "weight.family",
            )
        params = weight.get("params") or []
        if not isinstance(params, list):
            raise self._error("params must be a list of numbers", "weight.params")
        for i, p in enumerate(params):
            if isinstance(p, bool) or not isinstance(p, (int, float)) or not math.isfinite(p):
                raise self._error(f"params[{i}] must be a finite number", f"weight.params[{i}]")
        support = weight.get("support")
        if support is not None:
            if (not isinstance(support, list) or len(support) != 2
                    or not all(isinstance(s, (int, float)) for s in support)):
                raise self._error("support must be [lo, hi]", "weight.support")
        try:
            spec = WeightSpec.create(family, params, support)
        except InputError as e:
            raise self._error(str(e), "weight.support")
        problems = spec.validate()
        if problems:
            raise self._error("; ".join(problems), "weight.params")
        return spec

    def get_node_count(self) -> int:
        nodes = self.config["weight"].get("nodes")
        if isinstance(nodes, bool) or not isinstance(nodes, int) or nodes < 2:
            raise self._error(f"nodes must be an integer >= 2, got {nodes!r}", "weight.nodes")
        return nodes

    def get_n_max(self) -> int:
        n_max = self.config["recurrence"].get("n_max")
        if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
            raise self._error(f"n_max must be an integer >= 1, got {n_max!r}", "recurrence.n_max")
        # row n_max of the recurrence output carries a_{n_max+1}
        nodes = self.get_node_count()
        if n_max > nodes - 2:
            raise self._error(
                f"n_max={n_max} needs at least {n_max + 2} nodes, got {nodes}", "recurrence.n_max"
            )
        return n_max

    # Shift
    def _points(self, key: str) -> List[complex]:
        values = self.config["shift"].get(key) or []
        if not isinstance(values, list):
            values = [values]
        return [parse_complex(v, f"shift.{key}[{i}]") for i, v in enumerate(values)]

    def get_shift(self) -> SpectralShift:
        return SpectralShift(mu=tuple(self._points("mu")), eps=tuple(self._points("eps")))

    def get_lambda(self) -> List[complex]:
        return self._points("lambda")

    # Average
    def get_formula(self) -> str:
        formula = self.config["average"].get("formula")
        if formula not in FORMULAS:
            raise self._error(
                f"unknown formula {formula!r} (choose from {', '.join(FORMULAS)})",
                "average.formula",
            )
        return formula

    def get_N(self) -> int:
        N = self.config["average"].get("N")
        if isinstance(N, bool) or not isinstance(N, int) or N < 0:
            raise self._error(f"N must be a non-negative integer, got {N!r}", "average.N")
        return N

    def get_refine(self) -> bool:
        return bool(self.config["average"].get("refine"))

    def check_counts(self):
        """
        Reconcile the declared K and M with the mu and eps lists.

        M is checked against N first, so "M exceeds N" is reported even when
        the pole list is missing.
        """
        N = self.get_N()
        K = self.config["average"].get("K")
        M = self.config["average"].get("M")
        for name, value in (("K", K), ("M", M)):
            if value is not None and (isinstance(value, bool) or not isinstance(value, int)
                                      or value < 0):
                raise self._error(f"{name} must be a non-negative integer", f"average.{name}")
        if M is not None and M > N:
            raise self._error(f"M exceeds N ({M} > {N})", "average.M")
        shift = self.get_shift()
        if M is not None and M != shift.m:
            raise self._error(f"M={M} but {shift.m} eps values given", "shift.eps")
        if K is not None and K != shift.ell:
            raise self._error(f"K={K} but {shift.ell} mu values given", "shift.mu")
        if shift.m > N:
            raise self._error(f"M exceeds N ({shift.m} > {N})", "shift.eps")

    # Output
    def get_output(self) -> Dict[str, Any]:
        output = self.config["output"]
        if output.get("format") not in OUTPUT_FORMATS:
            raise self._error(
                f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {output.get('format')!r}",
                "output.format",
            )
        return {"path": output.get("path"), "format": output["format"]}

    # Oracle
    def get_oracle_config(self, workers: Optional[int] = None) -> OracleConfig:
        oracle = self.config["oracle"]
        for key in ("nodes_per_dim", "N", "mc_samples", "seed", "budget"):
            value = oracle.get(key)
            minimum = 0 if key == "seed" else 1
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
                raise self._error(f"{key} must be an integer >= {minimum}", f"oracle.{key}")
            oracle[key] = value
        tol = oracle.get("refine_tol")
        if not isinstance(tol, (int, float)) or not tol > 0:
            raise self._error("refine_tol must be positive", "oracle.refine_tol")
        return OracleConfig(
            nodes_per_dim=oracle["nodes_per_dim"],
            N=oracle["N"],
            mc_samples=oracle["mc_samples"],
            rng_seed=oracle["seed"],
            budget=oracle["budget"],
            refine_tol=float(tol),
            workers=workers,
        )

    # Verify
    def get_suite(self) -> str:
        suite = self.config["verify"].get("suite")
        if suite not in SUITES:
            raise self._error(
                f"suite must be one of {', '.join(SUITES)}, got {suite!r}", "verify.suite"
            )
        return suite


def create_example_config(path: str):
    """Create an example config file."""
    example = {
        "weight": {
            "family": "gaussian-truncated",
            "params": [6.0],
            "support": None,
            "nodes": 128,
        },
        "recurrence": {
            "n_max": 12,
        },
        "shift": {
            "mu": ["5"],
            "lambda": [],
            "eps": ["4+3i"],
        },
        "average": {
            "formula": "ratio",
            "N": 2,
            "K": 1,
            "M": 1,
            "refine": True,
        },
        "output": {
            "path": None,
            "format": "csv",
        },
        "oracle": {
            "nodes_per_dim": 24,
            "N": 2,
            "mc_samples": 100000,
            "seed": 0,
            "budget": 10 ** 7,
            "refine_tol": 1e-8,
        },
        "verify": {
            "suite": "none",
        },
    }

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(example, f, indent=2, ensure_ascii=False)
        f.write("\n")
