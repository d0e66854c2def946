from llpm.definitions.graph import DataflowGraph, Edge, GraphBuilder, Node
from llpm.definitions.module import DataflowBody, Direction, ExternBody, Module, Port, SignalNames
from llpm.definitions.ops import OpKind, evaluate, infer_type
from llpm.definitions.schemas import GraphSchema, NodeSchema, PortSchema, graph_from_json, graph_to_json
