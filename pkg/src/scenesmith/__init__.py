"""scenesmith: chat-driven 3D scene authoring with ray-tracer-ready export.

Natural-language commands become validated structured actions; a scene
graph resolves relative placements into absolute geometry; scenes export
as per-object PLY meshes plus an XML description. The package also
contains the synthetic-dataset pipeline and evaluation metrics used to
distill a small command parser, and an HTTP service exposing all of it.
"""

__version__ = "0.1.0"
