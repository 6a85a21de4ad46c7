"""Python bindings for the dialogue-shaping engine and trainer."""

from ._core import (
    ContractError,
    Game,
    GameSpec,
    InvalidActionError,
    LoadError,
    OracleError,
    ParseError,
    filter_you_edges,
    load_game,
    loads_game,
    metrics_header,
    oracle,
    parse_kg,
    scripted_dialogue,
    serialize_kg,
    train,
)

__all__ = [
    "ContractError",
    "Game",
    "GameSpec",
    "InvalidActionError",
    "LoadError",
    "OracleError",
    "ParseError",
    "filter_you_edges",
    "load_game",
    "loads_game",
    "metrics_header",
    "oracle",
    "parse_kg",
    "scripted_dialogue",
    "serialize_kg",
    "train",
]
