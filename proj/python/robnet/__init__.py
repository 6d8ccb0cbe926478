"""Robust expansion of potential-based networks.

Instances, uncertainty configs, decisions and scenarios use the same JSON
shapes as the robnet command-line tool; here they are plain dicts and lists.
"""

import json

from . import _robnet
from ._robnet import RobnetError

__all__ = ["RobnetError", "generate", "solve", "check", "operate"]


def _text(doc):
    if doc is None:
        return ""
    return doc if isinstance(doc, str) else json.dumps(doc)


def generate(n, variant="original"):
    """Star example with n sinks, uncertainty block embedded."""
    return json.loads(_robnet.generate(n, variant))


def solve(instance, uncertainty=None, relax="reduced", initial=None, pairs="auto", max_iterations=1000, threads=1):
    """Run the scenario generation loop.

    initial is "base", "zero", a scenario dict or a list of them; None uses
    the instance's "initial" entry, else "base".
    """
    if initial is None:
        init = ""
    elif initial in ("base", "zero"):
        init = initial
    else:
        init = json.dumps(initial)
    return json.loads(
        _robnet.solve(_text(instance), _text(uncertainty), relax, init, pairs, max_iterations, threads)
    )


def check(instance, decision, uncertainty=None, pairs="auto", threads=1):
    """Certificate for a fixed list of built arc ids."""
    return json.loads(_robnet.check(_text(instance), json.dumps(list(decision)), _text(uncertainty), pairs, threads))


def operate(instance, decision, scenario):
    """Operational feasibility of one scenario (dict node id -> load)."""
    return json.loads(_robnet.operate(_text(instance), json.dumps(list(decision)), json.dumps(scenario)))
