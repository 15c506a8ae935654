"""Tabular softmax policy over token sequences.

Parameters are per-context logit rows created lazily; the context is the last
`context_order` generated tokens. Small enough to differentiate analytically
and cheap enough to verify against finite differences.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

Context = tuple[int, ...]


class ToyPolicy:
    """Softmax n-gram policy with analytic gradients.

    Rows initialize to zeros (the uniform policy) unless init_scale is
    positive, in which case each row gets Gaussian noise from a context-keyed
    stream so lazy creation order cannot change the policy.

    Sampling uses one uniform draw per token: u = rng.random(), and the token
    is the first index whose cumulative softmax probability exceeds u. With
    the context rule above, a recorded seed fully determines the rollout.
    """

    def __init__(
        self,
        vocab_size: int,
        context_order: int = 1,
        seed: int = 0,
        init_scale: float = 0.0,
    ) -> None:
        if vocab_size < 2:
            raise ValueError("vocab_size must be at least 2")
        if context_order < 0:
            raise ValueError("context_order must be non-negative")
        self.vocab_size = vocab_size
        self.context_order = context_order
        self.seed = seed
        self.init_scale = init_scale
        self._table: dict[Context, np.ndarray] = {}

    def context_key(self, prefix: Sequence[int]) -> Context:
        if self.context_order == 0:
            return ()
        return tuple(prefix[-self.context_order :])

    def _row(self, key: Context) -> np.ndarray:
        row = self._table.get(key)
        if row is None:
            if self.init_scale > 0.0:
                rng = np.random.default_rng(
                    np.random.SeedSequence([self.seed, len(key), *key])
                )
                row = rng.normal(0.0, self.init_scale, self.vocab_size)
            else:
                row = np.zeros(self.vocab_size)
            self._table[key] = row
        return row

    def logits(self, prefix: Sequence[int]) -> np.ndarray:
        return self._row(self.context_key(prefix))

    def log_probs(self, prefix: Sequence[int]) -> np.ndarray:
        logits = self.logits(prefix)
        shifted = logits - logits.max()
        return shifted - np.log(np.exp(shifted).sum())

    def probs(self, prefix: Sequence[int]) -> np.ndarray:
        return np.exp(self.log_probs(prefix))

    def sample_sequence(
        self, prompt: Sequence[int], max_len: int, rng: np.random.Generator
    ) -> tuple[list[int], np.ndarray]:
        """Draw a fixed-length sequence; returns (tokens, per-token log probs)."""
        prefix = list(prompt)
        tokens: list[int] = []
        logps = np.empty(max_len)
        for t in range(max_len):
            lp = self.log_probs(prefix)
            u = rng.random()
            cdf = np.cumsum(np.exp(lp))
            token = int(np.searchsorted(cdf, u, side="right"))
            token = min(token, self.vocab_size - 1)
            tokens.append(token)
            logps[t] = lp[token]
            prefix.append(token)
        return tokens, logps

    def sequence_log_probs(
        self, prompt: Sequence[int], tokens: Sequence[int]
    ) -> np.ndarray:
        """Per-token log probabilities of an existing sequence under this policy."""
        prefix = list(prompt)
        out = np.empty(len(tokens))
        for t, token in enumerate(tokens):
            out[t] = self.log_probs(prefix)[token]
            prefix.append(token)
        return out

    def sequence_contexts(
        self, prompt: Sequence[int], tokens: Sequence[int]
    ) -> list[Context]:
        """Context key in effect at each position of a sequence."""
        prefix = list(prompt)
        keys = []
        for token in tokens:
            keys.append(self.context_key(prefix))
            prefix.append(token)
        return keys

    def set_logits(self, prefix: Sequence[int], values: Iterable[float]) -> None:
        row = np.asarray(list(values), dtype=float)
        if row.shape != (self.vocab_size,):
            raise ValueError(f"expected {self.vocab_size} logits, got {row.shape}")
        self._table[self.context_key(prefix)] = row.copy()

    def add_to_logits(self, updates: dict[Context, np.ndarray]) -> None:
        """Apply an additive update (a scaled gradient) to the logit table."""
        for key, delta in updates.items():
            self._row(key)
            self._table[key] = self._table[key] + delta

    def contexts(self) -> list[Context]:
        return list(self._table)

    def clone(self) -> ToyPolicy:
        copy = ToyPolicy(
            vocab_size=self.vocab_size,
            context_order=self.context_order,
            seed=self.seed,
            init_scale=self.init_scale,
        )
        copy._table = {k: v.copy() for k, v in self._table.items()}
        return copy
