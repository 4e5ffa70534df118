"""
fastpaxos.protocol.messages
---------------------------

The messages exchanged by Fast Paxos agents. Every message carries an
envelope with the identifiers of its sender and recipient. Values are opaque
:code:`bytes` inside the protocol and printable strings in files; the
:code:`to_dict`/:func:`from_dict` pair does the conversion.
"""
from dataclasses import dataclass, fields
from typing import ClassVar, Optional

from fastpaxos.errors import ScenarioError


def encode_value(value):
    """Convert a value from its file representation to :code:`bytes`."""
    if value is None or isinstance(value, bytes):
        return value
    return str(value).encode("utf-8")


def decode_value(value):
    """Convert a value to its printable file representation."""
    if isinstance(value, bytes):
        return value.decode("utf-8", errors="backslashreplace")
    return value


@dataclass(frozen=True)
class Message:
    sender: str
    recipient: str

    kind: ClassVar[str] = "message"

    def to_dict(self):
        d = {"kind": self.kind}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = decode_value(v) if "value" in f.name else v
        return d

    def with_recipient(self, recipient):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["recipient"] = recipient
        return type(self)(**d)


@dataclass(frozen=True)
class Propose(Message):
    """
    A proposed value. Without a round it is a proposal submitted to a
    proposer or announced to a coordinator; with a round it is a proposer's
    request to an acceptor to vote for the value in a fast round.
    """
    value: bytes
    round: Optional[int] = None

    kind: ClassVar[str] = "propose"


@dataclass(frozen=True)
class Phase1a(Message):
    round: int

    kind: ClassVar[str] = "phase1a"


@dataclass(frozen=True)
class Phase1b(Message):
    round: int
    voted_round: int = 0
    voted_value: Optional[bytes] = None

    kind: ClassVar[str] = "phase1b"

    def __post_init__(self):
        if (self.voted_round == 0) != (self.voted_value is None):
            raise ValueError("Phase1b with voted round {} and value {!r}."
                             .format(self.voted_round, self.voted_value))


@dataclass(frozen=True)
class Phase2a(Message):
    round: int
    value: bytes

    kind: ClassVar[str] = "phase2a"


@dataclass(frozen=True)
class Any(Message):
    """Tells proposers that any value may be voted in a fast round."""
    round: int

    kind: ClassVar[str] = "any"


@dataclass(frozen=True)
class Phase2b(Message):
    round: int
    value: bytes

    kind: ClassVar[str] = "phase2b"

    def __post_init__(self):
        if self.value is None:
            raise ValueError("Phase2b messages must carry a value.")


MESSAGE_TYPES = {cls.kind: cls for cls in (Propose, Phase1a, Phase1b,
                                           Phase2a, Any, Phase2b)}


def from_dict(d):
    """
    Build a message from its dictionary representation.

    Raises:

        ScenarioError: If the dictionary describes no known message.
    """
    d = dict(d)
    try:
        cls = MESSAGE_TYPES[d.pop("kind")]
    except KeyError:
        raise ScenarioError("Not a message: {!r}.".format(d))
    names = {f.name for f in fields(cls)}
    kwargs = {k: (encode_value(v) if "value" in k else v)
              for k, v in d.items() if k in names}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ScenarioError("Malformed {} message {!r}: {}".format(cls.kind, d, e))
