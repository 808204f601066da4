import configparser
import logging
import numbers
import re

from ..errors import ConfigError
from ..model import ConstantBeta, BetaSignal, Params, SinusoidalBeta
from ..stochastic import CountState


__all__ = ["POLICY_KINDS", "scenarioproperty", "Scenario", "load_scenario"]


logger = logging.getLogger(__name__)


POLICY_KINDS = ("theorem1", "switching", "constant", "receding-closed-loop")

REQUIRED = object()


class scenarioproperty:
    """Typed attribute of a :class:`Scenario`.

    Reading it before it is set raises :exn:`NotImplementedError`; assigning a value
    of the wrong type raises :exn:`TypeError`.
    """
    def __init__(self, cls, optional=False):
        self.cls      = cls
        self.optional = optional

    def __set_name__(self, owner, name):
        self.name = name
        self.attr = "_{}".format(name)

    def __get__(self, obj, owner=None):
        if obj is None:
            return self
        if not hasattr(obj, self.attr):
            raise NotImplementedError("Scenario {!r} does not have a {}"
                                      .format(obj, self.name))
        return getattr(obj, self.attr)

    def __set__(self, obj, value):
        if not (self.optional and value is None) and not isinstance(value, self.cls):
            raise TypeError("{} must be an instance of {}, not {!r}"
                            .format(self.name, self.cls.__name__, value))
        setattr(obj, self.attr, value)


def _real(text):
    # accepts plain numbers and ratios such as 1/14
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return float(num) / float(den)
        except ArithmeticError as e:
            raise ValueError(str(e)) from e
    return float(text)


def _integer(text):
    return int(text, 0)


def _boolean(text):
    lowered = text.strip().lower()
    if lowered in ("1", "yes", "true", "on"):
        return True
    if lowered in ("0", "no", "false", "off"):
        return False
    raise ValueError("not a boolean: {!r}".format(text))


def _reals(text):
    return tuple(_real(item) for item in text.replace(",", " ").split())


def _choice(*choices):
    def parse(text):
        if text not in choices:
            raise ValueError("must be one of {}".format(", ".join(choices)))
        return text
    return parse


def _text(text):
    return text


SECTIONS = {
    "model": {
        "beta":           (_real, 0.3),
        "gamma":          (_real, 1 / 14),
        "kappa":          (_real, 0.04),
        "eta":            (_real, 0.9),
        "eta_bi":         (_real, 0.6),
        "eta_br":         (_real, 0.8),
        "theta_b":        (_real, 0.0),
        "theta_max":      (_real, 2 / 7),
        "c_ser":          (_real, 0.4),
        "beta_mode":      (_choice("constant", "sinusoidal"), "constant"),
        "beta_amplitude": (_real, 0.1),
        "beta_period":    (_real, 365.0),
    },
    "population": {
        "n":              (_integer, REQUIRED),
        "i_u0":           (_integer, REQUIRED),
        "i_d0":           (_integer, 0),
        "r_u0":           (_integer, 0),
        "i_max":          (_real, None),
        "i_max_count":    (_integer, None),
    },
    "policy": {
        "kind":           (_choice(*POLICY_KINDS), REQUIRED),
    },
    "simulation": {
        "horizon":        (_real, 365.0),
        "step":           (_real, 0.01),
        "epoch":          (_real, 1.0),
        "replicates":     (_integer, 1),
        "seed":           (_integer, 0),
        "jobs":           (_integer, 1),
    },
    "estimator": {
        "filter_step":    (_real, 0.1),
        "track_beta":     (_boolean, False),
        "beta_window":    (_integer, 7),
    },
    "controller": {
        "horizon":        (_real, 3.0),
        "t_a":            (_real, None),
        "always_on":      (_boolean, False),
    },
    "output": {
        "dir":            (_text, "build/optitest"),
        "name":           (_text, "scenario"),
    },
    "sweep": {
        "theta_b":        (_reals, (1 / 14,)),
    },
    "observability": {
        "s0":             (_real, 0.9),
        "s0_shadow":      (_real, 0.8),
        "i0":             (_real, 0.05),
        "theta":          (_real, 0.1),
        "horizon":        (_real, 60.0),
        "step":           (_real, 0.01),
    },
}


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE     = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


def _line_numbers(text):
    lines, section = {}, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        match = _SECTION_RE.match(line)
        if match:
            section = match.group(1).strip()
            lines.setdefault((section, None), lineno)
            continue
        match = _KEY_RE.match(line)
        if match and section is not None:
            lines.setdefault((section, match.group(1).strip().lower()), lineno)
    return lines


def _format(value):
    if isinstance(value, tuple):
        return " ".join(_format(item) for item in value)
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value).lower() if isinstance(value, bool) else str(value)


class Scenario:
    """A fully resolved and validated run configuration.

    Attributes
    ----------
    params : :class:`Params`
        Model constants.
    initial : :class:`CountState`
        Initial counts.
    beta : :class:`BetaSignal`
        True contact rate.
    i_max : float
        Ceiling on the infected fraction.
    policy : str
        One of :data:`POLICY_KINDS`.
    values : dict
        ``{section: {key: value}}`` of every entry after defaults were applied.
    """
    params  = scenarioproperty(Params)
    initial = scenarioproperty(CountState)
    beta    = scenarioproperty(BetaSignal)
    i_max   = scenarioproperty(numbers.Real)
    policy  = scenarioproperty(str)

    def __init__(self, values, origin="<scenario>"):
        self.values = values
        self.origin = origin

    def __getitem__(self, section):
        return self.values[section]

    @property
    def seed(self):
        return self.values["simulation"]["seed"]

    @property
    def jobs(self):
        return self.values["simulation"]["jobs"]

    @property
    def horizon(self):
        return self.values["simulation"]["horizon"]

    @property
    def out_dir(self):
        return self.values["output"]["dir"]

    def override(self, *, seed=None, jobs=None, out_dir=None):
        """Apply command-line overrides."""
        if seed is not None:
            if seed < 0:
                raise ConfigError("Seed must be non-negative, not {!r}".format(seed),
                                  section="simulation", key="seed")
            self.values["simulation"]["seed"] = seed
        if jobs is not None:
            self.values["simulation"]["jobs"] = jobs
        if out_dir is not None:
            self.values["output"]["dir"] = out_dir

    def resolved(self):
        """``(section, key, text)`` for every entry, in table order."""
        return [(section, key, _format(self.values[section][key]))
                for section, table in SECTIONS.items() for key in table]

    def __repr__(self):
        return "Scenario({!r})".format(self.origin)


def _parse(text, origin):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as e:
        lineno = getattr(e, "lineno", None)
        raise ConfigError("Malformed configuration: {}".format(e.message), lineno=lineno)
    lines  = _line_numbers(text)
    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError("Unknown section [{}]".format(section), section=section,
                              lineno=lines.get((section, None)))
        for key in parser[section]:
            if key not in SECTIONS[section]:
                raise ConfigError("Unknown key {!r} in section [{}]".format(key, section),
                                  section=section, key=key,
                                  lineno=lines.get((section, key)))
    for section, table in SECTIONS.items():
        values[section] = {}
        for key, (parse, default) in table.items():
            if parser.has_option(section, key):
                raw = parser.get(section, key)
                try:
                    values[section][key] = parse(raw)
                except ValueError as e:
                    raise ConfigError("Invalid value {!r} for {}: {}".format(raw, key, e),
                                      section=section, key=key,
                                      lineno=lines.get((section, key)))
            elif default is REQUIRED:
                raise ConfigError("Missing required key {!r} in section [{}]"
                                  .format(key, section), section=section, key=key,
                                  lineno=lines.get((section, None)))
            else:
                values[section][key] = default
    return values, lines


def _build(values, lines, origin):
    def fail(message, section, key=None):
        return ConfigError(message, section=section, key=key,
                           lineno=lines.get((section, key), lines.get((section, None))))

    scenario = Scenario(values, origin)
    model    = values["model"]
    try:
        scenario.params = Params(**{key: model[key] for key in (
            "beta", "gamma", "kappa", "eta", "eta_bi", "eta_br", "theta_b", "theta_max",
            "c_ser")})
    except (TypeError, ValueError) as e:
        raise fail(str(e), "model")
    if model["beta_mode"] == "sinusoidal":
        try:
            scenario.beta = SinusoidalBeta(model["beta"], model["beta_amplitude"],
                                           model["beta_period"])
        except ValueError as e:
            raise fail(str(e), "model", "beta_amplitude")
    else:
        scenario.beta = ConstantBeta(model["beta"])

    population = values["population"]
    n = population["n"]
    if n < 1:
        raise fail("Population size must be at least 1, not {!r}".format(n), "population", "n")
    if population["i_u0"] + population["i_d0"] + population["r_u0"] > n:
        raise fail("Initial counts exceed the population size {}".format(n), "population")
    try:
        s = n - population["i_u0"] - population["i_d0"] - population["r_u0"]
        scenario.initial = CountState(s, population["i_u0"], population["i_d0"],
                                      population["r_u0"], n)
    except (TypeError, ValueError) as e:
        raise fail(str(e), "population")
    i_max, count = population["i_max"], population["i_max_count"]
    if i_max is None and count is None:
        raise fail("Either i_max or i_max_count must be given", "population")
    if i_max is not None and count is not None and count != round(i_max * n):
        raise fail("i_max {!r} and i_max_count {!r} disagree for n={}"
                   .format(i_max, count, n), "population", "i_max_count")
    if i_max is None:
        i_max = count / n
        population["i_max"] = i_max
    if count is None:
        population["i_max_count"] = round(i_max * n)
    if not 0 < i_max < 1:
        raise fail("Infection ceiling must be within (0, 1), not {!r}".format(i_max),
                   "population", "i_max")
    scenario.i_max  = i_max
    scenario.policy = values["policy"]["kind"]

    simulation = values["simulation"]
    for key in ("horizon", "step", "epoch"):
        if not simulation[key] > 0:
            raise fail("{} must be positive, not {!r}".format(key, simulation[key]),
                       "simulation", key)
    for key in ("replicates", "jobs"):
        if simulation[key] < 1 and not (key == "jobs" and simulation[key] == -1):
            raise fail("{} must be at least 1, not {!r}".format(key, simulation[key]),
                       "simulation", key)
    if simulation["seed"] < 0:
        raise fail("seed must be non-negative, not {!r}".format(simulation["seed"]),
                   "simulation", "seed")
    if not values["sweep"]["theta_b"]:
        raise fail("theta_b grid must not be empty", "sweep", "theta_b")
    return scenario


def load_scenario(source, *, origin=None):
    """Read and validate a scenario.

    Parameters
    ----------
    source : str or path-like or file object
        Path to an INI file, or an open file.

    Exceptions
    ----------
    Raises :exn:`ConfigError` naming the section, key and line of the first problem.
    """
    if hasattr(source, "read"):
        text   = source.read()
        origin = origin or getattr(source, "name", "<stream>")
    else:
        origin = origin or str(source)
        try:
            with open(source) as f:
                text = f.read()
        except OSError as e:
            raise ConfigError("Cannot read scenario {!r}: {}".format(origin, e.strerror))
    values, lines = _parse(text, origin)
    scenario = _build(values, lines, origin)
    logger.info("Loaded scenario %s (policy %s)", origin, scenario.policy)
    return scenario
