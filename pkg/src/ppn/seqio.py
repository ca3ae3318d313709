"""FASTA reading/writing and deterministic sequence simulation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import EncodedSequence, _from_codes, encode
from .errors import DuplicateIdError, MalformedFastaError, ValidationError

__all__ = ["SimulationSpec", "read_fasta", "write_fasta", "simulate"]

FASTA_LINE_WIDTH = 60


@dataclass(frozen=True)
class SimulationSpec:
    """Shape and seed of a simulated dataset.

    Sequences are i.i.d. uniform over A/C/G/T; there is no evolutionary
    model.  Output is byte-identical for a given spec.
    """

    species_count: int
    length: int
    seed: int

    def __post_init__(self):
        if self.species_count < 1:
            raise ValidationError(
                f"species_count must be >= 1, got {self.species_count}"
            )
        if self.length < 1:
            raise ValidationError(f"length must be >= 1, got {self.length}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must fit in 64 bits, got {self.seed}")


def _lines(source):
    """Iterate text lines from a path, text stream, or byte stream."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from (line.decode("latin-1") for line in fh)
        return
    for line in source:
        yield line.decode("latin-1") if isinstance(line, bytes) else line


def read_fasta(source, policy: str = "drop") -> list[EncodedSequence]:
    """Parse FASTA into encoded sequences, preserving record order.

    ``source`` may be a path or an open text/byte stream; CRLF and LF
    line endings are both accepted.  Record ids are the first
    whitespace-delimited token of the header.  Per-record dropped
    character counts end up on the records themselves.

    Raises :class:`MalformedFastaError` for data before the first
    header, an empty header, or an input with no records at all;
    :class:`DuplicateIdError` for repeated ids; and propagates
    :class:`EmptySequenceError` for records with no usable nucleotides.
    """
    records: list[EncodedSequence] = []
    seen: set[str] = set()
    current_id = None
    chunks: list[str] = []

    def finish():
        if current_id is not None:
            records.append(encode("".join(chunks), policy=policy, seq_id=current_id))

    for lineno, line in enumerate(_lines(source), start=1):
        line = line.rstrip("\r\n")
        if line.startswith(">"):
            finish()
            header = line[1:].strip()
            if not header:
                raise MalformedFastaError(f"line {lineno}: empty FASTA header")
            current_id = header.split()[0]
            if current_id in seen:
                raise DuplicateIdError(f"duplicate record id {current_id!r}")
            seen.add(current_id)
            chunks = []
        elif line.strip():
            if current_id is None:
                raise MalformedFastaError(
                    f"line {lineno}: sequence data before the first '>' header"
                )
            chunks.append(line)
    finish()
    if not records:
        raise MalformedFastaError("input contains no FASTA records")
    return records


def write_fasta(seqs: list[EncodedSequence], dest, width: int = FASTA_LINE_WIDTH) -> None:
    """Write sequences as FASTA with ``width``-column wrapped lines."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w") if own else dest
    try:
        for seq in seqs:
            fh.write(f">{seq.id}\n")
            text = seq.bases()
            for i in range(0, len(text), width):
                fh.write(text[i : i + width])
                fh.write("\n")
    finally:
        if own:
            fh.close()


def simulate(spec: SimulationSpec) -> list[EncodedSequence]:
    """Generate ``species_count`` uniform random sequences of ``length``.

    Randomness comes from numpy's PCG64 generator seeded with
    ``spec.seed``, so the output is reproducible across platforms and
    runs.  Record ids are ``sim_001``-style, zero-padded to the count
    width.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    pad = max(3, len(str(spec.species_count)))
    return [
        _from_codes(
            f"sim_{i + 1:0{pad}d}",
            rng.integers(0, 4, size=spec.length, dtype=np.int8),
        )
        for i in range(spec.species_count)
    ]
