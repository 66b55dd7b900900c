"""Instrumented interpreter for a small closure language, with a cost meter
and an empirical polynomiality probe."""

from .errors import LispError
from .evaluator import Interpreter
from .model import print_value
from .reader import read_all

__all__ = ["Interpreter", "LispError", "print_value", "read_all"]
__version__ = "0.1.0"
