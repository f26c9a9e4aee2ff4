"""
Beam Hopping Service
Index modulation through the choice of beam subset on one RF chain
"""
import itertools
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ValidationError
from app.core.logging import logger
from app.schemas.aoa import PathSet
from app.schemas.array import ArrayConfig
from app.schemas.bh import BerRow, BhChannel, BhCodebook
from app.services.array_core import array_engine, complex_noise, noise_variance

MAX_BEAMS = 12
DEFAULT_MIN_DISTANCE = 1e-6

Subset = Tuple[int, ...]


class BeamHoppingModem:
    """
    Maps b-bit words onto beam subsets and back.

    A symbol is one complex sample at a single-antenna receiver; the transmitter
    splits power evenly over the active beams, so subset S is received as
    sum(channel gains over S) / sqrt(|S|).
    """

    @staticmethod
    def enumerate_subsets(beams: Sequence[int]) -> List[Subset]:
        """All non-empty subsets, ordered by size and then lexicographically."""
        if not beams:
            raise ValidationError("no beams to enumerate")
        if len(set(beams)) != len(beams):
            raise ValidationError(f"beam list {list(beams)} has duplicates")
        if len(beams) > MAX_BEAMS:
            raise ValidationError(f"at most {MAX_BEAMS} beams are supported, got {len(beams)}")
        ordered = sorted(int(b) for b in beams)
        return [
            subset
            for size in range(1, len(ordered) + 1)
            for subset in itertools.combinations(ordered, size)
        ]

    @staticmethod
    def expected_point(subset: Subset, channel: BhChannel) -> complex:
        total = sum(channel.gain_of(beam) for beam in subset)
        return complex(total / math.sqrt(len(subset)))

    def constellation(self, codebook: BhCodebook, channel: BhChannel) -> np.ndarray:
        return np.array(
            [self.expected_point(subset, channel) for subset in codebook.subsets], dtype=complex
        )

    @staticmethod
    def channel_from_paths(config: ArrayConfig, beams: Sequence[int], scene: PathSet) -> BhChannel:
        """Effective gain of each beam: sum over paths of amplitude x beam gain at the path angle."""
        if not scene.paths:
            raise ValidationError("scene has no incident path")
        for beam in beams:
            array_engine.check_beam(config, beam)
        gains = array_engine.beam_gain_grid(config, scene.angles)  # P x N
        effective = scene.amplitudes @ gains[:, list(beams)]
        return BhChannel(beams=tuple(int(b) for b in beams), gains=effective)

    def select_codebook(
        self,
        subsets: Sequence[Subset],
        channel: BhChannel,
        bits: int,
        min_distance: float = DEFAULT_MIN_DISTANCE,
    ) -> BhCodebook:
        """
        Strongest subsets first, skipping any whose received point lies within
        min_distance of one already accepted, until 2^bits are chosen.
        """
        if bits < 0:
            raise ValidationError(f"bits per symbol must be non-negative, got {bits}")
        size = 2 ** bits
        if size > len(subsets):
            raise ValidationError(f"{size} codewords requested from {len(subsets)} subsets")

        # sorted() is stable: equal powers keep the enumeration order
        ranked = sorted(subsets, key=lambda s: -abs(self.expected_point(s, channel)) ** 2)
        chosen: List[Subset] = []
        points: List[complex] = []
        for subset in ranked:
            point = self.expected_point(subset, channel)
            if all(abs(point - other) >= min_distance for other in points):
                chosen.append(tuple(subset))
                points.append(point)
                logger.debug(f"Codebook accepts {subset} (|s|^2={abs(point) ** 2:.4f})")
                if len(chosen) == size:
                    break

        if len(chosen) < size:
            raise ValidationError(
                f"only {len(chosen)} subsets are separated by {min_distance}; {size} needed"
            )
        return BhCodebook(available_beams=channel.beams, subsets=tuple(chosen), bits_per_symbol=bits)

    @staticmethod
    def min_distance(points: np.ndarray) -> float:
        if points.size < 2:
            return math.inf
        diff = np.abs(points[:, None] - points[None, :])
        return float(diff[~np.eye(points.size, dtype=bool)].min())

    @staticmethod
    def modulate(word: int, codebook: BhCodebook) -> Subset:
        if not 0 <= word < codebook.size:
            raise ValidationError(f"word {word} outside [0, {codebook.size})")
        return codebook.subsets[word]

    def demodulate(
        self,
        received: complex,
        codebook: BhCodebook,
        channel: BhChannel,
        noise_var: Optional[float] = None,
    ) -> int:
        """
        Maximum-likelihood word: nearest expected point.

        With equal-variance Gaussian noise the decision does not depend on noise_var.
        """
        if noise_var is not None and noise_var < 0:
            raise ValidationError(f"noise variance must be non-negative, got {noise_var}")
        return int(self.demodulate_batch(np.array([received]), codebook, channel)[0])

    def demodulate_batch(
        self, received: np.ndarray, codebook: BhCodebook, channel: BhChannel
    ) -> np.ndarray:
        points = self.constellation(codebook, channel)
        distance = np.abs(np.asarray(received)[:, None] - points[None, :]) ** 2
        return np.argmin(distance, axis=1)

    @staticmethod
    def bit_errors(sent: np.ndarray, detected: np.ndarray, bits: int) -> int:
        """Hamming distance between natural-binary labels, summed."""
        diff = np.bitwise_xor(sent, detected)
        return int(sum(np.sum((diff >> k) & 1) for k in range(bits)))

    def ber_sweep(
        self,
        codebook: BhCodebook,
        channel: BhChannel,
        snr_list: Sequence[float],
        symbols: int,
        seed: int,
    ) -> List[BerRow]:
        """Monte Carlo BER; every SNR point reuses the same words and unit noise."""
        if symbols < 1:
            raise ValidationError(f"symbols must be positive, got {symbols}")
        rng = np.random.default_rng(seed)
        words = rng.integers(0, codebook.size, size=symbols)
        unit_noise = complex_noise(rng, 1.0, symbols)
        clean = self.constellation(codebook, channel)[words]
        bits = codebook.bits_per_symbol

        rows = []
        for snr_db in snr_list:
            received = clean + math.sqrt(noise_variance(snr_db)) * unit_noise
            detected = self.demodulate_batch(received, codebook, channel)
            errors = self.bit_errors(words, detected, bits)
            rows.append(BerRow(
                snr_db=snr_db,
                symbols=symbols,
                bit_errors=errors,
                ber=errors / (symbols * bits) if bits else 0.0,
            ))

        logger.info(
            f"BER sweep over {len(rows)} SNR points, {codebook.size} codewords",
            extra={"seed": seed},
        )
        return rows


bh_modem = BeamHoppingModem()
