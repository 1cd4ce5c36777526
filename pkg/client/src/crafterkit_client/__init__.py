"""Client for crafterkit environments and datasets.

Implements the wire protocol (docs/wire.md) and the episode container,
caption, goal, and manifest formats (docs/formats.md) from their
specifications alone; it never imports the server implementation.
"""

from .formats import (MalformedContainer, read_caption_dataset, read_episode,
                      read_goal_dataset, read_manifest)
from .net import ProtocolError, RemoteEnv, connect

__version__ = "0.1.0"
