"""Self-similar groups acting on rooted trees: word problem, congruence
quotients, subgroup calculus and finite verification checks."""

from .core import RIGHT_TO_LEFT, Word, parse_word, section
from .presets import ggs, grigorchuk, group_from_spec, gupta_sidki
from .wordproblem import canonical, element_order, equal, is_trivial

__all__ = ["RIGHT_TO_LEFT", "Word", "parse_word", "section", "ggs", "grigorchuk", "group_from_spec",
           "gupta_sidki", "canonical", "element_order", "equal", "is_trivial"]
__version__ = "0.1.0"
