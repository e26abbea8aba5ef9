"""Table, edge-stream and vertex-set persistence."""

from __future__ import annotations

import io
import struct
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np
import orjson
import pandas as pd
from pydantic import BaseModel

from rrgraph import __version__
from rrgraph.cayley import VertexSet
from rrgraph.errors import InvalidParameterError
from rrgraph.random_graph import SampleConfig, SampledSubgraph
from rrgraph.signed_perm import GeneratorSet, parse, rank

EDGE_MAGIC = b"RRGE"

TRIAL_COLUMNS = ["n", "c", "lambda", "method", "trial", "largest", "second", "vertex_count", "seed"]


def to_frame(rows: Iterable[Any], columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    records = [r.model_dump(by_alias=True) if isinstance(r, BaseModel) else dict(r) for r in rows]
    return pd.DataFrame.from_records(records, columns=columns)


def render_table(frame: pd.DataFrame, fmt: str = "csv") -> str:
    if fmt == "csv":
        return frame.to_csv(index=False, lineterminator="\n")
    if fmt == "json":
        records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
        return orjson.dumps(records, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY).decode() + "\n"
    raise InvalidParameterError(f"unknown format: {fmt}")


def write_table(frame: pd.DataFrame, path: str, fmt: str = "csv") -> str:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(render_table(frame, fmt))
    return path


def save_subgraph(g: SampledSubgraph, path: str) -> str:
    """Write the magic, a uint32 header length, an orjson header, then uint64 (lo, hi) pairs."""
    header = orjson.dumps({
        "n": g.config.n,
        "lambda": g.config.lambda_,
        "seed": g.config.seed,
        "gens": g.config.gens.kind.value,
        "version": __version__,
    })
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(EDGE_MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(g.edges.astype("<u8").tobytes())
    return path


def load_subgraph(path: str) -> SampledSubgraph:
    with open(path, "rb") as f:
        if f.read(4) != EDGE_MAGIC:
            raise InvalidParameterError(f"{path} is not an edge stream")
        (length,) = struct.unpack("<I", f.read(4))
        header = orjson.loads(f.read(length))
        edges = np.frombuffer(f.read(), dtype="<u8").astype(np.int64).reshape(-1, 2)
    n = header["n"]
    config = SampleConfig(
        n=n, gens=GeneratorSet(header["gens"], n), seed=header["seed"], lam=header["lambda"]
    )
    return SampledSubgraph(config=config, edges=edges)


def read_vertex_set(text: str, n: int) -> VertexSet:
    """Newline-delimited ranks or rendered permutations; blank lines and ``#`` comments skipped."""
    members: List[int] = []
    for line in io.StringIO(text):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("("):
            v = parse(line)
            if v.n != n:
                raise InvalidParameterError(f"permutation {line} does not have n={n}")
            members.append(rank(v))
        else:
            try:
                members.append(int(line))
            except ValueError as e:
                raise InvalidParameterError(f"not a rank or permutation: {line!r}") from e
    return VertexSet(frozenset(members), n)


def format_vertex_set(vs: VertexSet) -> str:
    return "".join(f"{r}\n" for r in sorted(vs.members))
