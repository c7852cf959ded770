"""Layer-graph model: parsing, validation, shape inference, topological order.

A model document is YAML (JSON works too) with the shape

    name: alexnet            # optional
    input: {channels: 3, h: 224, w: 224}
    layers:
      - {name: data, kind: input}
      - {name: conv1, kind: conv, inputs: [data], out_channels: 96,
         kernel_h: 11, kernel_w: 11, stride_h: 4, stride_w: 4, pad_h: 2, pad_w: 2}
      - {name: relu1, kind: relu, inputs: [conv1]}

Exactly one layer has kind "input"; its shape comes from the top-level
`input` mapping. Edges are implied by each layer's `inputs` list.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

import yaml

from .errors import InputError


class ModelError(InputError):
    """Any invalid model document or graph."""


class ModelSyntaxError(ModelError):
    """Document is not well-formed YAML/JSON or not the expected structure."""


class UnknownKindError(ModelError):
    """Layer kind outside the supported set."""


class DuplicateNameError(ModelError):
    """Two layers share a name."""


class DanglingInputError(ModelError):
    """A layer references a producer that does not exist."""


class CycleError(ModelError):
    """The layer graph is not acyclic."""


class ShapeError(ModelError):
    """Shape inference produced a non-positive or inconsistent dimension."""


LAYER_KINDS = ("input", "conv", "fc", "pool", "relu", "batchnorm", "add", "concat")

# Parameter schema per kind: {param: (required, default, minimum)}.
_CONV_PARAMS = {
    "out_channels": (True, None, 1),
    "kernel_h": (True, None, 1),
    "kernel_w": (True, None, 1),
    "stride_h": (False, 1, 1),
    "stride_w": (False, 1, 1),
    "pad_h": (False, 0, 0),
    "pad_w": (False, 0, 0),
    "groups": (False, 1, 1),
}
_POOL_PARAMS = {k: v for k, v in _CONV_PARAMS.items() if k not in ("out_channels", "groups")}
_PARAM_SCHEMA = {
    "input": {},
    "conv": _CONV_PARAMS,
    "fc": {"out_features": (True, None, 1)},
    "pool": _POOL_PARAMS,
    "relu": {},
    "batchnorm": {},
    "add": {},
    "concat": {},
}


@dataclass(frozen=True)
class TensorShape:
    """Channels x height x width extent of one feature-map tensor."""

    channels: int
    height: int
    width: int

    def __post_init__(self):
        for dim in (self.channels, self.height, self.width):
            if not isinstance(dim, int) or dim < 1:
                raise ShapeError(f"tensor dimensions must be integers >= 1, got {self!r}")

    def element_count(self) -> int:
        return self.channels * self.height * self.width


@dataclass(frozen=True)
class LayerSpec:
    """One node of the layer graph, as written in the document."""

    name: str
    kind: str
    inputs: tuple[str, ...] = ()
    params: dict = field(default_factory=dict)
    in_place: bool = False


@dataclass(frozen=True)
class ModelGraph:
    """Ordered layers plus the network input shape.

    `shapes` maps layer name to output TensorShape and is empty until
    infer_shapes() has run.
    """

    name: str
    input_shape: TensorShape
    layers: tuple[LayerSpec, ...]
    shapes: dict = field(default_factory=dict)

    def layer(self, name: str) -> LayerSpec:
        for spec in self.layers:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def output_shape(self, name: str) -> TensorShape:
        if name not in self.shapes:
            raise ShapeError(f"no inferred shape for layer {name!r}; run infer_shapes first")
        return self.shapes[name]


def _expect_mapping(value, what):
    if not isinstance(value, dict):
        raise ModelSyntaxError(f"{what} must be a mapping, got {type(value).__name__}")
    return value


def _positive_int(value, what, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ModelSyntaxError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return value


def _parse_input_shape(doc) -> TensorShape:
    raw = _expect_mapping(doc.get("input"), "top-level `input`")
    extra = set(raw) - {"channels", "h", "w"}
    if extra:
        raise ModelSyntaxError(f"unknown input fields: {sorted(extra)}")
    return TensorShape(
        _positive_int(raw.get("channels"), "input.channels"),
        _positive_int(raw.get("h"), "input.h"),
        _positive_int(raw.get("w"), "input.w"),
    )


def _parse_layer(raw, position) -> LayerSpec:
    raw = _expect_mapping(raw, f"layers[{position}]")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise ModelSyntaxError(f"layers[{position}] needs a non-empty string `name`")
    kind = raw.get("kind")
    if kind not in LAYER_KINDS:
        raise UnknownKindError(f"layer {name!r}: unknown kind {kind!r} (expected one of {', '.join(LAYER_KINDS)})")

    inputs = raw.get("inputs", [])
    if not isinstance(inputs, list) or not all(isinstance(i, str) for i in inputs):
        raise ModelSyntaxError(f"layer {name!r}: `inputs` must be a list of layer names")

    schema = _PARAM_SCHEMA[kind]
    known = {"name", "kind", "inputs", "in_place"} | set(schema)
    extra = set(raw) - known
    if extra:
        raise ModelSyntaxError(f"layer {name!r}: unknown fields for kind {kind}: {sorted(extra)}")

    params = {}
    for key, (required, default, minimum) in schema.items():
        if key in raw:
            params[key] = _positive_int(raw[key], f"layer {name!r}: {key}", minimum)
        elif required:
            raise ModelSyntaxError(f"layer {name!r}: kind {kind} requires `{key}`")
        else:
            params[key] = default

    in_place = raw.get("in_place")
    if in_place is not None:
        if kind not in ("relu", "batchnorm"):
            raise ModelSyntaxError(f"layer {name!r}: in_place only applies to relu/batchnorm")
        if not isinstance(in_place, bool):
            raise ModelSyntaxError(f"layer {name!r}: in_place must be a boolean")
    else:
        in_place = kind in ("relu", "batchnorm")

    return LayerSpec(name=name, kind=kind, inputs=tuple(inputs), params=params, in_place=in_place)


# Arity of the `inputs` list per kind: (min, max).
_ARITY = {
    "input": (0, 0),
    "conv": (1, 1),
    "fc": (1, 1),
    "pool": (1, 1),
    "relu": (1, 1),
    "batchnorm": (1, 1),
    "add": (2, None),
    "concat": (2, None),
}


def parse_model(text: str, name: str | None = None) -> ModelGraph:
    """Parse and validate a model document; returns an unannotated graph.

    The optional `name` is a fallback used when the document carries no
    top-level name (the CLI passes the file stem).
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ModelSyntaxError(f"syntax error at {where}: {exc.problem or exc}") from exc
    except yaml.YAMLError as exc:
        raise ModelSyntaxError(f"syntax error: {exc}") from exc

    doc = _expect_mapping(doc, "model document")
    extra = set(doc) - {"name", "input", "layers"}
    if extra:
        raise ModelSyntaxError(f"unknown top-level fields: {sorted(extra)}")
    if "name" in doc and (not isinstance(doc["name"], str) or not doc["name"]):
        raise ModelSyntaxError("top-level `name` must be a non-empty string")

    input_shape = _parse_input_shape(doc)
    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ModelSyntaxError("top-level `layers` must be a non-empty list")

    layers = tuple(_parse_layer(raw, i) for i, raw in enumerate(raw_layers))

    seen = set()
    for spec in layers:
        if spec.name in seen:
            raise DuplicateNameError(f"duplicate layer name {spec.name!r}")
        seen.add(spec.name)

    input_nodes = [spec for spec in layers if spec.kind == "input"]
    if len(input_nodes) != 1:
        raise ModelSyntaxError(f"exactly one kind=input layer required, found {len(input_nodes)}")

    for spec in layers:
        lo, hi = _ARITY[spec.kind]
        n = len(spec.inputs)
        if n < lo or (hi is not None and n > hi):
            want = f"exactly {lo}" if lo == hi else f"at least {lo}"
            raise ModelSyntaxError(f"layer {spec.name!r}: kind {spec.kind} takes {want} input(s), got {n}")
        for ref in spec.inputs:
            if ref not in seen:
                raise DanglingInputError(f"layer {spec.name!r}: input {ref!r} does not exist")

    graph = ModelGraph(
        name=doc.get("name") or name or "model",
        input_shape=input_shape,
        layers=layers,
    )
    topo_order(graph)  # raises CycleError on cyclic documents
    return graph


def serialize_model(graph: ModelGraph) -> str:
    """Render a graph back to document text; parse(serialize(g)) == g."""
    layers = []
    for spec in graph.layers:
        entry = {"name": spec.name, "kind": spec.kind}
        if spec.inputs:
            entry["inputs"] = list(spec.inputs)
        entry.update(spec.params)
        if spec.kind in ("relu", "batchnorm"):
            entry["in_place"] = spec.in_place
        layers.append(entry)
    doc = {
        "name": graph.name,
        "input": {
            "channels": graph.input_shape.channels,
            "h": graph.input_shape.height,
            "w": graph.input_shape.width,
        },
        "layers": layers,
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def topo_order(graph: ModelGraph) -> list[LayerSpec]:
    """Layers ordered so producers precede consumers.

    Ties are broken by declaration order, which keeps every report and
    golden file deterministic.
    """
    position = {spec.name: i for i, spec in enumerate(graph.layers)}
    indegree = {spec.name: len(spec.inputs) for spec in graph.layers}
    consumers: dict[str, list[str]] = {spec.name: [] for spec in graph.layers}
    for spec in graph.layers:
        for ref in spec.inputs:
            consumers[ref].append(spec.name)

    ready = [(position[n], n) for n, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    ordered = []
    while ready:
        _, name = heapq.heappop(ready)
        ordered.append(graph.layer(name))
        for consumer in consumers[name]:
            indegree[consumer] -= 1
            if indegree[consumer] == 0:
                heapq.heappush(ready, (position[consumer], consumer))

    if len(ordered) != len(graph.layers):
        stuck = sorted(n for n, d in indegree.items() if d > 0)
        raise CycleError(f"cycle detected involving layers: {', '.join(stuck)}")
    return ordered


def _conv_like_shape(spec: LayerSpec, in_shape: TensorShape, channels: int) -> TensorShape:
    p = spec.params
    span_h = in_shape.height + 2 * p["pad_h"] - p["kernel_h"]
    span_w = in_shape.width + 2 * p["pad_w"] - p["kernel_w"]
    if span_h < 0 or span_w < 0:
        raise ShapeError(
            f"layer {spec.name!r}: kernel {p['kernel_h']}x{p['kernel_w']} exceeds padded input "
            f"{in_shape.height}x{in_shape.width}"
        )
    return TensorShape(channels, span_h // p["stride_h"] + 1, span_w // p["stride_w"] + 1)


def infer_shapes(graph: ModelGraph) -> ModelGraph:
    """Annotate every layer with its output shape; returns a new graph."""
    shapes: dict[str, TensorShape] = {}
    for spec in topo_order(graph):
        ins = [shapes[ref] for ref in spec.inputs]
        if spec.kind == "input":
            out = graph.input_shape
        elif spec.kind == "conv":
            m, n, g = ins[0].channels, spec.params["out_channels"], spec.params["groups"]
            if m % g or n % g:
                raise ShapeError(
                    f"layer {spec.name!r}: groups {g} must divide input channels {m} and out_channels {n}"
                )
            out = _conv_like_shape(spec, ins[0], n)
        elif spec.kind == "pool":
            out = _conv_like_shape(spec, ins[0], ins[0].channels)
        elif spec.kind == "fc":
            out = TensorShape(spec.params["out_features"], 1, 1)
        elif spec.kind in ("relu", "batchnorm"):
            out = ins[0]
        elif spec.kind == "add":
            if any(s != ins[0] for s in ins[1:]):
                raise ShapeError(f"layer {spec.name!r}: add operands disagree: {[tuple((s.channels, s.height, s.width)) for s in ins]}")
            out = ins[0]
        elif spec.kind == "concat":
            if any((s.height, s.width) != (ins[0].height, ins[0].width) for s in ins[1:]):
                raise ShapeError(f"layer {spec.name!r}: concat operands disagree on spatial dims")
            out = TensorShape(sum(s.channels for s in ins), ins[0].height, ins[0].width)
        else:  # pragma: no cover - kinds are validated at parse
            raise UnknownKindError(spec.kind)
        shapes[spec.name] = out
    return replace(graph, shapes=shapes)
