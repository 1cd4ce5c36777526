"""crafterkit: a fast deterministic Crafter-style survival environment with
dataset generation toolkits, an evaluation harness, and a wire bridge."""

from .errors import (BenchmarkError, CrafterKitError, EmptyEpisode, EmptyInput,
                     IoFailure, LengthMismatch, MalformedContainer,
                     MalformedTable, MismatchedInputs, MissingBinding,
                     NotReset, OutOfBounds, RetryExhausted, SteppedTerminal,
                     UnknownCaption, UnknownTask)
from .mechanics import (ACHIEVEMENTS, ACTION_NAMES, ITEMS, Action, EnvConfig,
                        EnvState, MobState, PlayerState, StepResult,
                        compute_reward, legal_effective_action,
                        list_achievements, make_state, reset, step)
from .rng import Seed, Stream
from .world import TileKind, WorldGrid, generate_world, tile_at

__version__ = "0.1.0"
