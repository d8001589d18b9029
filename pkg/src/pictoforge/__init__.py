"""pictoforge: a multi-notation design workbench.

Parse `.use` specifications into an immutable design model, check it for
consistency, keep it in a versioned multi-user record store, generate
artifacts (SQL DDL, data dictionaries, code skeletons, documents), and run
dialogue diagrams interactively as rapid prototypes. Tools coordinate through
the store and an append-only event log; a local HTTP service exposes the same
operations for UIs.
"""

from .checker import Finding, Severity, check_all, check_cross, check_er, check_sc, check_std
from .errors import (
    BusError,
    GenError,
    ModelError,
    PictoforgeError,
    RepoError,
    SessionError,
)
from .generators import DictionaryEntry, gen_dictionary, gen_doc, gen_skeleton, gen_sql
from .model import (
    ActionDef,
    DesignModel,
    ErSchema,
    NameIndex,
    ScChart,
    SourceSpan,
    StdArc,
    StdDiagram,
    StdNode,
    build_index,
    model_equal,
)
from .parser import ParseError, ParseFailure, parse, parse_file
from .printer import pretty_print
from .prototyper import (
    Limits,
    ScriptResult,
    Session,
    TranscriptEvent,
    session_input,
    session_run_script,
    session_start,
)
from .repository import Lock, RepoStore, Revision

__version__ = "0.1.0"

__all__ = [
    "ActionDef",
    "BusError",
    "DesignModel",
    "DictionaryEntry",
    "ErSchema",
    "Finding",
    "GenError",
    "Limits",
    "Lock",
    "ModelError",
    "NameIndex",
    "ParseError",
    "ParseFailure",
    "PictoforgeError",
    "RepoError",
    "RepoStore",
    "Revision",
    "ScChart",
    "ScriptResult",
    "Session",
    "SessionError",
    "Severity",
    "SourceSpan",
    "StdArc",
    "StdDiagram",
    "StdNode",
    "TranscriptEvent",
    "build_index",
    "check_all",
    "check_cross",
    "check_er",
    "check_sc",
    "check_std",
    "gen_dictionary",
    "gen_doc",
    "gen_skeleton",
    "gen_sql",
    "model_equal",
    "parse",
    "parse_file",
    "pretty_print",
    "session_input",
    "session_run_script",
    "session_start",
]
