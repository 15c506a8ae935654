"""Group-relative policy optimization on the toy policy.

Sequence-level rewards are normalized within a sampled group into per-token
advantages; the clipped importance-ratio surrogate minus a KL penalty against
a frozen reference is ascended by plain gradient ascent. Losses for language
model pretraining and prompt-masked fine-tuning live here too, sharing the
policy.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .reward import RewardConfig
from .toy_policy import Context, ToyPolicy

STD_GUARD = 1e-8


def lm_cross_entropy(
    policy: ToyPolicy,
    windows: Sequence[Sequence[int]],
    prompt_lengths: Sequence[int] | None = None,
) -> float:
    """Mean per-token negative log likelihood over token windows.

    With `prompt_lengths`, the first L_k tokens of window k condition the
    model but contribute no loss (the fine-tuning variant); otherwise every
    token is scored. Windows must be non-empty and contain at least one
    scored token overall.
    """
    if not windows:
        raise ValueError("no windows to score")
    if prompt_lengths is not None and len(prompt_lengths) != len(windows):
        raise ValueError("prompt_lengths must align with windows")
    total = 0.0
    count = 0
    for k, window in enumerate(windows):
        prompt_len = prompt_lengths[k] if prompt_lengths is not None else 0
        if not 0 <= prompt_len <= len(window):
            raise ValueError(f"window {k}: prompt length {prompt_len} out of range")
        prefix: list[int] = []
        for j, token in enumerate(window):
            if not 0 <= token < policy.vocab_size:
                raise ValueError(f"window {k}: token {token} outside vocabulary")
            if j >= prompt_len:
                total += policy.log_probs(prefix)[token]
                count += 1
            prefix.append(token)
    if count == 0:
        raise ValueError("no scored tokens (all windows fully masked)")
    return -total / count


@dataclass(frozen=True)
class RolloutGroup:
    """G sequences sampled for one prompt, with per-token log-prob records.

    `logp_current` is recorded at sample time; `logp_old` is the behavior
    policy snapshot used in importance ratios (equal to `logp_current` for
    fresh rollouts); `logp_ref` comes from the frozen reference policy.
    """

    prompt_id: str
    prompt: tuple[int, ...]
    sequences: tuple[tuple[int, ...], ...]
    logp_current: tuple[np.ndarray, ...]
    logp_old: tuple[np.ndarray, ...]
    logp_ref: tuple[np.ndarray, ...] | None = None
    rewards: tuple[float, ...] | None = None
    advantages: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.sequences)
        for name in ("logp_current", "logp_old", "logp_ref", "advantages"):
            arrays = getattr(self, name)
            if arrays is None:
                continue
            if len(arrays) != n:
                raise ValueError(f"{name} must have one array per sequence")
            for seq, arr in zip(self.sequences, arrays):
                if len(arr) != len(seq):
                    raise ValueError(f"{name} arrays must align with sequence lengths")
        if self.rewards is not None and len(self.rewards) != n:
            raise ValueError("rewards must align with sequences")

    @property
    def group_size(self) -> int:
        return len(self.sequences)


@dataclass(frozen=True)
class GrpoHyperparams:
    epsilon: float = 0.2
    beta: float = 0.001
    group_size: int = 8
    learning_rate: float = 0.5

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.group_size < 2:
            raise ValueError("group_size must be at least 2")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def rollout_group(
    policy: ToyPolicy,
    prompt: Sequence[int],
    group_size: int,
    max_len: int,
    seed: int | np.random.SeedSequence,
    prompt_id: str | None = None,
) -> RolloutGroup:
    """Sample a group of sequences for one prompt.

    Sequences are drawn one after another from a single generator seeded with
    `seed`, using the policy's documented inverse-CDF sampler, so the group is
    reproducible from (policy parameters, prompt, group_size, max_len, seed).
    Rewards are left unset.
    """
    if group_size < 2:
        raise ValueError("group_size must be at least 2")
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    rng = np.random.default_rng(seed)
    sequences = []
    logps = []
    for _ in range(group_size):
        tokens, token_logps = policy.sample_sequence(prompt, max_len, rng)
        sequences.append(tuple(tokens))
        logps.append(token_logps)
    return RolloutGroup(
        prompt_id=prompt_id if prompt_id is not None else f"prompt{tuple(prompt)}",
        prompt=tuple(prompt),
        sequences=tuple(sequences),
        logp_current=tuple(logps),
        logp_old=tuple(lp.copy() for lp in logps),
    )


def with_reference(group: RolloutGroup, reference: ToyPolicy) -> RolloutGroup:
    """Attach frozen-reference log probs for the group's sequences."""
    ref = tuple(
        reference.sequence_log_probs(group.prompt, seq) for seq in group.sequences
    )
    return replace(group, logp_ref=ref)


def with_rewards(group: RolloutGroup, rewards: Sequence[float]) -> RolloutGroup:
    return replace(group, rewards=tuple(float(r) for r in rewards))


def normalize_advantages(group: RolloutGroup, std_guard: float = STD_GUARD) -> RolloutGroup:
    """Group-normalize rewards into per-token advantages.

    Each sequence's advantage is (reward - group mean) / population std,
    broadcast over its tokens; a degenerate group (std below the guard) gets
    all-zero advantages.
    """
    if group.rewards is None:
        raise ValueError("rewards must be set before normalizing advantages")
    rewards = np.asarray(group.rewards, dtype=float)
    std = float(rewards.std())
    if std < std_guard:
        scaled = np.zeros_like(rewards)
    else:
        scaled = (rewards - rewards.mean()) / std
    advantages = tuple(
        np.full(len(seq), a) for seq, a in zip(group.sequences, scaled)
    )
    return replace(group, advantages=advantages)


def _sequence_surrogate(
    logp_new: np.ndarray, logp_old: np.ndarray, adv: np.ndarray, epsilon: float
) -> float:
    ratio = np.exp(logp_new - logp_old)
    clipped = np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon)
    return float(np.minimum(ratio * adv, clipped * adv).mean())


def clipped_surrogate(group: RolloutGroup, epsilon: float) -> float:
    """Token-mean, sequence-mean clipped surrogate from the recorded log probs."""
    if group.advantages is None:
        raise ValueError("advantages must be set; call normalize_advantages first")
    terms = [
        _sequence_surrogate(new, old, adv, epsilon)
        for new, old, adv in zip(group.logp_current, group.logp_old, group.advantages)
    ]
    return float(np.mean(terms))


def kl_penalty(logp_current: np.ndarray, logp_ref: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-token KL estimates r - 1 - log r with r = exp(ref - current).

    The estimator is non-negative and zero exactly when the two log-prob
    vectors agree; tiny negative rounding is clamped to zero.
    """
    if logp_current.shape != logp_ref.shape:
        raise ValueError("log-prob arrays must have the same shape")
    log_ratio = logp_ref - logp_current
    estimates = np.maximum(np.exp(log_ratio) - log_ratio - 1.0, 0.0)
    return estimates, float(estimates.mean()) if estimates.size else 0.0


@dataclass(frozen=True)
class ObjectiveParts:
    objective: float
    surrogate: float
    kl: float


@dataclass(frozen=True)
class StepReport:
    objective: float
    surrogate: float
    kl: float
    mean_reward: float


def _require_ready(groups: Sequence[RolloutGroup], beta: float) -> None:
    if not groups:
        raise ValueError("no rollout groups")
    for group in groups:
        if group.advantages is None:
            raise ValueError("advantages must be set; call normalize_advantages first")
        if beta > 0 and group.logp_ref is None:
            raise ValueError("logp_ref must be set when beta > 0; call with_reference")


def grpo_objective(
    policy: ToyPolicy, groups: Sequence[RolloutGroup], hp: GrpoHyperparams
) -> ObjectiveParts:
    """Objective for the current policy: clipped surrogate minus beta * KL.

    Per-token log probs are recomputed from the live policy (the stored
    `logp_current` arrays are the sampling-time snapshot, kept as `logp_old`),
    so this is a true function of the policy parameters.
    """
    _require_ready(groups, hp.beta)
    surrogate_terms = []
    kl_terms = []
    for group in groups:
        seq_surr = []
        seq_kl = []
        for i, seq in enumerate(group.sequences):
            logp_new = policy.sequence_log_probs(group.prompt, seq)
            seq_surr.append(
                _sequence_surrogate(logp_new, group.logp_old[i], group.advantages[i], hp.epsilon)
            )
            if hp.beta > 0:
                _, mean_kl = kl_penalty(logp_new, group.logp_ref[i])
                seq_kl.append(mean_kl)
        surrogate_terms.append(float(np.mean(seq_surr)))
        kl_terms.append(float(np.mean(seq_kl)) if seq_kl else 0.0)
    surrogate = float(np.mean(surrogate_terms))
    kl = float(np.mean(kl_terms))
    return ObjectiveParts(objective=surrogate - hp.beta * kl, surrogate=surrogate, kl=kl)


def grpo_gradients(
    policy: ToyPolicy, groups: Sequence[RolloutGroup], hp: GrpoHyperparams
) -> dict[Context, np.ndarray]:
    """Analytic gradient of the objective with respect to the logit table.

    Per token, d(objective)/d(logp) is ratio * advantage unless the clip
    saturates (ratio beyond the clip range on the profitable side), plus
    beta * (r - 1) from the KL term; the softmax Jacobian maps that onto the
    context's logit row.
    """
    _require_ready(groups, hp.beta)
    grads: dict[Context, np.ndarray] = {}
    n_groups = len(groups)
    for group in groups:
        group_scale = 1.0 / (n_groups * group.group_size)
        for i, seq in enumerate(group.sequences):
            adv = group.advantages[i]
            logp_new = policy.sequence_log_probs(group.prompt, seq)
            ratio = np.exp(logp_new - group.logp_old[i])
            saturated = ((ratio > 1.0 + hp.epsilon) & (adv > 0)) | (
                (ratio < 1.0 - hp.epsilon) & (adv < 0)
            )
            weights = np.where(saturated, 0.0, ratio * adv)
            if hp.beta > 0:
                r = np.exp(group.logp_ref[i] - logp_new)
                weights = weights + hp.beta * (r - 1.0)
            weights = weights * (group_scale / len(seq))
            prefix = list(group.prompt)
            for t, token in enumerate(seq):
                key = policy.context_key(prefix)
                row = grads.get(key)
                if row is None:
                    row = np.zeros(policy.vocab_size)
                    grads[key] = row
                row -= weights[t] * policy.probs(prefix)
                row[token] += weights[t]
                prefix.append(token)
    return grads


def grpo_step(
    policy: ToyPolicy, groups: Sequence[RolloutGroup], hp: GrpoHyperparams
) -> StepReport:
    """One ascent step on the objective; mutates the policy in place.

    Returns the pre-step objective decomposition and the mean sampled reward.
    """
    _require_ready(groups, hp.beta)
    if any(group.rewards is None for group in groups):
        raise ValueError("rewards must be set on every group")
    parts = grpo_objective(policy, groups, hp)
    grads = grpo_gradients(policy, groups, hp)
    policy.add_to_logits({k: hp.learning_rate * g for k, g in grads.items()})
    all_rewards = [r for group in groups for r in group.rewards]
    return StepReport(
        objective=parts.objective,
        surrogate=parts.surrogate,
        kl=parts.kl,
        mean_reward=float(np.mean(all_rewards)),
    )


@dataclass(frozen=True)
class ToyTask:
    """Synthetic sequence task with a reward shaped like the code reward.

    Three binary predicates stand in for the compile, security, and format
    components: the sequence produces an effect at all, every effect is
    preceded by a guard (the checks-effects discipline in miniature), and the
    sequence opens with a plan token. The task's RewardConfig weights them.
    """

    vocab_size: int = 5
    plan_token: int = 0
    guard_token: int = 1
    effect_token: int = 2
    max_len: int = 6
    context_order: int = 1
    prompts: tuple[tuple[int, ...], ...] = ((),)
    config: RewardConfig = RewardConfig()

    def components(self, tokens: Sequence[int]) -> tuple[int, int, int]:
        has_effect = 1 if self.effect_token in tokens else 0
        if has_effect:
            first_effect = list(tokens).index(self.effect_token)
            guarded = 1 if self.guard_token in tokens[:first_effect] else 0
        else:
            guarded = 1
        planned = 1 if tokens and tokens[0] == self.plan_token else 0
        return has_effect, guarded, planned

    def reward(self, tokens: Sequence[int]) -> float:
        return self.config.total(*self.components(tokens))


def cei_toy_task(config: RewardConfig | None = None) -> ToyTask:
    """Default guard-before-effect task over a five-token vocabulary."""
    return ToyTask(config=config if config is not None else RewardConfig())


@dataclass(frozen=True)
class CurvePoint:
    epoch: int
    mean_reward: float
    objective: float
    mean_kl: float


def train_toy(
    task: ToyTask,
    hp: GrpoHyperparams,
    steps: int,
    seed: int,
    reward_fn: Callable[[Sequence[int]], float] | None = None,
) -> list[CurvePoint]:
    """Train a fresh policy on the task; returns the per-step learning curve.

    One step = sample a group per prompt from the live policy, score, group-
    normalize, and take one ascent step. The reference policy is frozen at
    initialization. Deterministic for a fixed seed: step and prompt seeds are
    spawned from a single root seed sequence.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    reward = reward_fn if reward_fn is not None else task.reward
    policy = ToyPolicy(task.vocab_size, task.context_order, seed=seed)
    reference = policy.clone()
    step_seeds = np.random.SeedSequence(seed).spawn(steps)
    curve = []
    for epoch, step_seed in enumerate(step_seeds):
        prompt_seeds = step_seed.spawn(len(task.prompts))
        groups = []
        for p_idx, prompt in enumerate(task.prompts):
            group = rollout_group(
                policy,
                prompt,
                hp.group_size,
                task.max_len,
                seed=prompt_seeds[p_idx],
                prompt_id=f"p{p_idx}",
            )
            group = with_reference(group, reference)
            group = with_rewards(group, [reward(seq) for seq in group.sequences])
            group = normalize_advantages(group)
            groups.append(group)
        report = grpo_step(policy, groups, hp)
        curve.append(
            CurvePoint(
                epoch=epoch,
                mean_reward=report.mean_reward,
                objective=report.objective,
                mean_kl=report.kl,
            )
        )
    return curve


def curve_to_csv(curve: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epoch", "mean_reward", "objective", "mean_kl"])
    for point in curve:
        writer.writerow(
            [point.epoch, repr(point.mean_reward), repr(point.objective), repr(point.mean_kl)]
        )
    return buf.getvalue()


def curve_to_json(curve: Sequence[CurvePoint]) -> str:
    return json.dumps(
        [
            {
                "epoch": p.epoch,
                "mean_reward": p.mean_reward,
                "objective": p.objective,
                "mean_kl": p.mean_kl,
            }
            for p in curve
        ],
        indent=2,
    )
