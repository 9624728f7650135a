"""Linear temporal logic over qualitative atoms."""

from .ast import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Const,
    Equiv,
    Eventually,
    Exists,
    Forall,
    Formula,
    Implies,
    Next,
    Not,
    ObjEq,
    Or,
    Until,
    Vocabulary,
    children,
    contains,
    depth,
    pretty,
    subformulas,
)
from .parser import FormulaSyntaxError, parse, tokenize
from .semantics import (
    LassoPath,
    PathEvaluator,
    evaluate_on_lasso,
    expand_quantifiers,
    is_nnf,
    to_nnf,
)

__all__ = [
    "FALSE", "TRUE", "Always", "And", "Atom", "Const", "Equiv", "Eventually", "Exists", "Forall",
    "Formula", "FormulaSyntaxError", "Implies", "LassoPath", "Next", "Not", "ObjEq", "Or",
    "PathEvaluator", "Until", "Vocabulary", "children", "contains", "depth", "evaluate_on_lasso",
    "expand_quantifiers", "is_nnf", "parse", "pretty", "subformulas", "to_nnf", "tokenize",
]
