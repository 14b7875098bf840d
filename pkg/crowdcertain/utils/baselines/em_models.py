"""Latent-truth models fit by expectation maximization: Dawid-Skene, GLAD and MACE.

All three work on binary crowd labels with every class handled as an
independent binary task, vectorized over the class axis. Each run records
its objective after every E-step in ``log_likelihoods``: the marginal
log-likelihood of the crowd labels plus the log prior of the parameters
where the M-step is a MAP estimate.
"""

import logging

import numpy as np
from scipy.special import expit, log_expit, logsumexp

from crowdcertain.models.domain import BaselineResult
from crowdcertain.utils.error_handler import ValidationError
from crowdcertain.utils.random_state import make_rng
from crowdcertain.utils.validation_service import ValidationService
from .constants import BaselineConstants
from .voting import _as_votes

logger = logging.getLogger(__name__)

PRIOR_FLOOR = 1e-6


def _posterior_labels(post_one: np.ndarray) -> np.ndarray:
    return (post_one > 0.5).astype(np.int8)


def _log_marginal(log_joint_one: np.ndarray, log_joint_zero: np.ndarray):
    """Posterior of label 1 and total log evidence from per-instance log joints."""
    stacked = np.stack([log_joint_zero, log_joint_one])
    evidence = logsumexp(stacked, axis=0)
    return np.exp(log_joint_one - evidence), float(evidence.sum())


# Dawid-Skene

def _ds_m_step(z: np.ndarray, post_one: np.ndarray, pseudo: float):
    weight_one = post_one[:, None, :]
    weight_zero = 1.0 - weight_one
    # P(z = 1 | y = 1) and P(z = 1 | y = 0) per worker and class
    hit_one = ((weight_one * z).sum(axis=0) + pseudo) / (weight_one.sum(axis=0) + 2 * pseudo)
    hit_zero = ((weight_zero * z).sum(axis=0) + pseudo) / (weight_zero.sum(axis=0) + 2 * pseudo)
    n = z.shape[0]
    prior_one = (post_one.sum(axis=0) + pseudo) / (n + 2 * pseudo)
    return hit_one, hit_zero, prior_one


def _ds_e_step(z: np.ndarray, hit_one, hit_zero, prior_one, pseudo: float):
    def log_lik(hit):
        return (z * np.log(hit)[None] + (1 - z) * np.log1p(-hit)[None]).sum(axis=1)

    post_one, evidence = _log_marginal(np.log(prior_one)[None] + log_lik(hit_one),
                                       np.log1p(-prior_one)[None] + log_lik(hit_zero))
    log_prior = (pseudo * (np.log(hit_one) + np.log1p(-hit_one) + np.log(hit_zero) + np.log1p(-hit_zero)).sum()
                 + pseudo * (np.log(prior_one) + np.log1p(-prior_one)).sum())
    return post_one, evidence + float(log_prior)


def dawid_skene(z, em_iters: int = 100, tol: float = 1e-6) -> BaselineResult:
    """Per-worker confusion matrices and a class prior, started from majority-vote proportions.

    Stops when the largest change of a label posterior drops below ``tol`` or
    after ``em_iters`` rounds. Worker scores are the balanced accuracy implied
    by each confusion matrix.
    """
    ValidationService.require(ValidationService.validate_positive_int(em_iters, 'EM iterations'))
    z = _as_votes(z).astype(float)
    pseudo = BaselineConstants.DS_PSEUDO_COUNT

    post_one = z.mean(axis=1)
    trace = []
    iterations = 0
    for iterations in range(1, em_iters + 1):
        hit_one, hit_zero, prior_one = _ds_m_step(z, post_one, pseudo)
        new_post, objective = _ds_e_step(z, hit_one, hit_zero, prior_one, pseudo)
        trace.append(objective)
        change = float(np.abs(new_post - post_one).max())
        post_one = new_post
        if change < tol:
            break
    logger.debug(f"Dawid-Skene finished after {iterations} iteration(s), objective {trace[-1]:.6f}")

    return BaselineResult(
        method='dawid_skene',
        nu=_posterior_labels(post_one),
        worker_scores=(hit_one + (1.0 - hit_zero)) / 2.0,
        scores=post_one,
        iterations_run=iterations,
        log_likelihoods=trace,
    )


# GLAD

def glad_agreement(z: np.ndarray, post_one: np.ndarray) -> np.ndarray:
    """Posterior probability that each answer equals the true label."""
    post = post_one[:, None, :]
    return post * z + (1.0 - post) * (1.0 - z)


def glad_logits(alpha: np.ndarray, log_beta: np.ndarray) -> np.ndarray:
    return alpha[None, :, :] * np.exp(log_beta)[:, None, :]


def glad_objective(alpha: np.ndarray, log_beta: np.ndarray, agreement: np.ndarray) -> float:
    """Expected complete-data log-likelihood of the answers as a function of abilities and log difficulties."""
    x = glad_logits(alpha, log_beta)
    return float((agreement * log_expit(x) + (1.0 - agreement) * log_expit(-x)).sum())


def glad_gradient(alpha: np.ndarray, log_beta: np.ndarray, agreement: np.ndarray):
    """Gradient of :func:`glad_objective` with respect to (alpha, log_beta)."""
    x = glad_logits(alpha, log_beta)
    residual = agreement - expit(x)
    grad_alpha = (residual * np.exp(log_beta)[:, None, :]).sum(axis=0)
    grad_log_beta = (residual * x).sum(axis=1)
    return grad_alpha, grad_log_beta


def glad_posterior(z, alpha, log_beta, prior_one):
    """P(y = 1 | answers) per (instance, class) and the log evidence under fixed GLAD parameters."""
    x = glad_logits(alpha, log_beta)
    right, wrong = log_expit(x), log_expit(-x)
    log_lik_one = np.where(z == 1, right, wrong).sum(axis=1)
    log_lik_zero = np.where(z == 0, right, wrong).sum(axis=1)
    return _log_marginal(np.log(prior_one)[None] + log_lik_one, np.log1p(-prior_one)[None] + log_lik_zero)


def _glad_m_step(z, post_one, alpha, log_beta, step: float):
    n, m, _ = z.shape
    agreement = glad_agreement(z, post_one)
    current = glad_objective(alpha, log_beta, agreement)
    for _ in range(BaselineConstants.GLAD_GRADIENT_STEPS):
        grad_alpha, grad_log_beta = glad_gradient(alpha, log_beta, agreement)
        rate = step
        improved = False
        while rate >= BaselineConstants.GLAD_MIN_STEP:
            cand_alpha = alpha + rate * grad_alpha / n
            cand_log_beta = log_beta + rate * grad_log_beta / m
            candidate = glad_objective(cand_alpha, cand_log_beta, agreement)
            if candidate >= current:
                alpha, log_beta, current = cand_alpha, cand_log_beta, candidate
                improved = True
                break
            rate /= 2.0
        if not improved:
            break
    prior_one = np.clip(post_one.mean(axis=0), PRIOR_FLOOR, 1.0 - PRIOR_FLOOR)
    return alpha, log_beta, prior_one


def glad(z, em_iters: int = 100, step: float = 0.01) -> BaselineResult:
    """Worker abilities alpha and positive instance difficulties beta = exp(log_beta).

    P(answer correct) = sigmoid(alpha_a * beta_i). The M-step runs a bounded
    number of gradient-ascent steps with backtracking, so the objective never
    decreases. Worker scores are the fitted abilities.
    """
    ValidationService.require(ValidationService.validate_positive_int(em_iters, 'EM iterations'))
    if not step > 0:
        raise ValidationError(f"GLAD step must be positive (got {step})")
    z = _as_votes(z).astype(float)
    n, m, k = z.shape

    alpha = np.ones((m, k))
    log_beta = np.zeros((n, k))
    prior_one = np.full(k, 0.5)

    post_one, evidence = glad_posterior(z, alpha, log_beta, prior_one)
    trace = [evidence]
    for _ in range(em_iters):
        alpha, log_beta, prior_one = _glad_m_step(z, post_one, alpha, log_beta, step)
        post_one, evidence = glad_posterior(z, alpha, log_beta, prior_one)
        trace.append(evidence)
    logger.debug(f"GLAD abilities after {em_iters} iteration(s): {np.round(alpha[:, 0], 4).tolist()}")

    return BaselineResult(
        method='glad',
        nu=_posterior_labels(post_one),
        worker_scores=alpha,
        scores=post_one,
        iterations_run=em_iters,
        log_likelihoods=trace,
    )


# MACE

def _mace_likelihoods(z, theta, spam_one):
    """P(answer | y = 1) and P(answer | y = 0) per (instance, worker, class)."""
    theta, spam_one = theta[None], spam_one[None]
    spam_answer = np.where(z == 1, spam_one, 1.0 - spam_one)
    honest = 1.0 - theta
    lik_one = theta * (z == 1) + honest * spam_answer
    lik_zero = theta * (z == 0) + honest * spam_answer
    return lik_one, lik_zero


def _mace_e_step(z, theta, spam_one, pseudo):
    lik_one, lik_zero = _mace_likelihoods(z, theta, spam_one)
    log_half = np.log(0.5)
    post_one, evidence = _log_marginal(log_half + np.log(lik_one).sum(axis=1),
                                       log_half + np.log(lik_zero).sum(axis=1))
    log_prior = pseudo * float((np.log(theta) + np.log1p(-theta) + np.log(spam_one) + np.log1p(-spam_one)).sum())
    return post_one, evidence + log_prior


def _mace_m_step(z, post_one, theta, spam_one, pseudo):
    lik_one, lik_zero = _mace_likelihoods(z, theta, spam_one)
    post = post_one[:, None, :]
    # Posterior that the worker was not spamming, given each candidate truth
    honest_one = theta[None] * (z == 1) / lik_one
    honest_zero = theta[None] * (z == 0) / lik_zero
    honest = post * honest_one + (1.0 - post) * honest_zero
    spamming = 1.0 - honest

    n = z.shape[0]
    new_theta = (honest.sum(axis=0) + pseudo) / (n + 2 * pseudo)
    new_spam_one = ((spamming * z).sum(axis=0) + pseudo) / (spamming.sum(axis=0) + 2 * pseudo)
    return new_theta, new_spam_one


def mace(z, em_iters: int = 100, seed: int = 0) -> BaselineResult:
    """Each answer is honest with probability theta_a, otherwise drawn from the worker's spam distribution.

    Uses a uniform label prior. Worker scores are the fitted probabilities
    of not spamming.
    """
    ValidationService.require(ValidationService.validate_positive_int(em_iters, 'EM iterations'))
    z = _as_votes(z).astype(float)
    _, m, k = z.shape
    pseudo = BaselineConstants.MACE_PSEUDO_COUNT
    jitter = BaselineConstants.MACE_JITTER

    rng = make_rng(seed, 'mace')
    theta = 0.5 + rng.uniform(-jitter, jitter, size=(m, k))
    spam_one = 0.5 + rng.uniform(-jitter, jitter, size=(m, k))

    post_one, objective = _mace_e_step(z, theta, spam_one, pseudo)
    trace = [objective]
    for _ in range(em_iters):
        theta, spam_one = _mace_m_step(z, post_one, theta, spam_one, pseudo)
        post_one, objective = _mace_e_step(z, theta, spam_one, pseudo)
        trace.append(objective)
    logger.debug(f"MACE honesty after {em_iters} iteration(s): {np.round(theta[:, 0], 4).tolist()}")

    return BaselineResult(
        method='mace',
        nu=_posterior_labels(post_one),
        worker_scores=theta,
        scores=post_one,
        iterations_run=em_iters,
        log_likelihoods=trace,
    )
