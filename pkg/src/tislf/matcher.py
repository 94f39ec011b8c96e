"""Descriptor matching with a nearest-neighbor ratio test and RANSAC
homography verification.

The inlier count divided by a keypoint total is the matching probability
every later stage builds on. Brute-force L2 is used throughout: keypoint
counts are capped upstream, so an index would not pay for itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import MatchParams, RansacParams
from .local_features import FeatureSet

RANSAC_CONFIDENCE = 0.995
RANSAC_CHUNK = 256
SINGLE_NEIGHBOR_DIST = 0.3  # absolute L2 acceptance when no second neighbor exists
_MIN_SAMPLE = 4


@dataclass
class MatchCandidates:
    """Ratio-test survivors: unique pairs (query_idx, train_idx) + distances."""

    pairs: np.ndarray  # (n, 2) int64
    distances: np.ndarray  # (n,) float64

    def __len__(self) -> int:
        return int(self.pairs.shape[0])


@dataclass
class MatchResult:
    """Geometric verification outcome for one ordered image pair."""

    pairs: np.ndarray  # (n, 2) int64 inlier (query_idx, train_idx)
    distances: np.ndarray  # (n,) float64 descriptor distances of the inliers
    n_query_keypoints: int
    n_train_keypoints: int
    model: np.ndarray | None = None  # 3x3 homography query -> train
    degenerate: bool = False  # a zero-keypoint side was involved

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def inliers(self) -> list[tuple[int, int, float]]:
        return [
            (int(q), int(t), float(d))
            for (q, t), d in zip(self.pairs, self.distances)
        ]


def _empty_candidates() -> MatchCandidates:
    return MatchCandidates(np.zeros((0, 2), dtype=np.int64), np.zeros(0))


def match_descriptors(
    a: FeatureSet, b: FeatureSet, ratio: float = 0.75
) -> MatchCandidates:
    """Nearest-neighbor ratio test from a's descriptors into b's.

    A pair survives iff d1/d2 < ratio (or d1 == 0); when b holds a single
    descriptor there is no second neighbor, so acceptance falls back to an
    absolute distance threshold. Matches are made one-to-one by keeping the
    closest query per train index.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    na, nb = len(a), len(b)
    if na == 0 or nb == 0:
        return _empty_candidates()

    da = a.descriptors.astype(np.float32)
    db = b.descriptors.astype(np.float32)
    d2 = (
        np.sum(da * da, axis=1)[:, None]
        + np.sum(db * db, axis=1)[None, :]
        - 2.0 * (da @ db.T)
    )
    np.clip(d2, 0.0, None, out=d2)

    if nb == 1:
        d1 = np.sqrt(d2[:, 0].astype(np.float64))
        qs = np.nonzero(d1 < SINGLE_NEIGHBOR_DIST)[0]
        ts = np.zeros(qs.size, dtype=np.int64)
        dists = d1[qs]
    else:
        part = np.argpartition(d2, 1, axis=1)[:, :2]
        vals = np.take_along_axis(d2, part, axis=1).astype(np.float64)
        swap = vals[:, 0] > vals[:, 1]
        vals[swap] = vals[swap][:, ::-1]
        part[swap] = part[swap][:, ::-1]
        d1sq, d2sq = vals[:, 0], vals[:, 1]
        accept = (d1sq < ratio * ratio * d2sq) | (d1sq == 0.0)
        qs = np.nonzero(accept)[0]
        ts = part[qs, 0].astype(np.int64)
        dists = np.sqrt(d1sq[qs])

    if qs.size == 0:
        return _empty_candidates()

    # One-to-one: keep the smallest-distance query per train index.
    order = np.lexsort((qs, dists))
    qs, ts, dists = qs[order], ts[order], dists[order]
    _, first = np.unique(ts, return_index=True)
    first.sort()
    qs, ts, dists = qs[first], ts[first], dists[first]
    qorder = np.argsort(qs, kind="stable")
    pairs = np.stack([qs[qorder], ts[qorder]], axis=1)
    return MatchCandidates(pairs=pairs, distances=dists[qorder])


def _hartley_normalize(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched similarity normalization. pts: (..., n, 2) -> (pts_n, T)."""
    mean = pts.mean(axis=-2, keepdims=True)
    centered = pts - mean
    scale = np.sqrt((centered**2).sum(axis=-1).mean(axis=-1))
    scale = np.where(scale < 1e-12, 1.0, scale)
    s = np.sqrt(2.0) / scale
    pts_n = centered * s[..., None, None]
    t = np.zeros(pts.shape[:-2] + (3, 3))
    t[..., 0, 0] = s
    t[..., 1, 1] = s
    t[..., 2, 2] = 1.0
    t[..., 0, 2] = -s * mean[..., 0, 0]
    t[..., 1, 2] = -s * mean[..., 0, 1]
    return pts_n, t


def _dlt_homographies(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Batched DLT fit mapping src -> dst. src/dst: (b, n, 2). Returns (b, 3, 3).

    Rows with a failed fit come back as all-NaN matrices.
    """
    src_n, t_src = _hartley_normalize(src)
    dst_n, t_dst = _hartley_normalize(dst)
    b, n = src.shape[0], src.shape[1]
    A = np.zeros((b, 2 * n, 9))
    x, y = src_n[..., 0], src_n[..., 1]
    xp, yp = dst_n[..., 0], dst_n[..., 1]
    A[:, 0::2, 0] = -x
    A[:, 0::2, 1] = -y
    A[:, 0::2, 2] = -1.0
    A[:, 0::2, 6] = x * xp
    A[:, 0::2, 7] = y * xp
    A[:, 0::2, 8] = xp
    A[:, 1::2, 3] = -x
    A[:, 1::2, 4] = -y
    A[:, 1::2, 5] = -1.0
    A[:, 1::2, 6] = x * yp
    A[:, 1::2, 7] = y * yp
    A[:, 1::2, 8] = yp
    try:
        _, _, vt = np.linalg.svd(A)
        h = vt[:, -1, :].reshape(b, 3, 3)
    except np.linalg.LinAlgError:
        h = np.full((b, 3, 3), np.nan)
        for i in range(b):
            try:
                _, _, vti = np.linalg.svd(A[i])
                h[i] = vti[-1].reshape(3, 3)
            except np.linalg.LinAlgError:
                pass
    # Denormalize: H = T_dst^-1 Hn T_src
    t_dst_inv = np.linalg.inv(t_dst)
    H = t_dst_inv @ h @ t_src
    w = H[:, 2, 2].copy()
    bad = np.abs(w) < 1e-12
    w[bad] = 1.0
    H = H / w[:, None, None]
    H[bad] = np.nan
    return H


def _sample_degenerate(pts: np.ndarray) -> np.ndarray:
    """(b,) mask of 4-point samples with any collinear or coincident triple."""
    b = pts.shape[0]
    bad = np.zeros(b, dtype=bool)
    idx_triples = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    span = np.ptp(pts.reshape(b, -1), axis=1)
    tol = np.maximum(span, 1.0) ** 2 * 1e-6
    for i, j, k in idx_triples:
        v1 = pts[:, j] - pts[:, i]
        v2 = pts[:, k] - pts[:, i]
        cross = np.abs(v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])
        bad |= cross < tol
    return bad


def _projection_errors(H: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Squared reprojection errors. H: (b,3,3), src/dst: (n,2) -> (b,n)."""
    ones = np.ones((src.shape[0], 1))
    src_h = np.concatenate([src, ones], axis=1)  # (n, 3)
    proj = np.einsum("bij,nj->bni", H, src_h)
    w = proj[..., 2]
    safe_w = np.where(np.abs(w) < 1e-12, np.nan, w)
    xy = proj[..., :2] / safe_w[..., None]
    err = ((xy - dst[None]) ** 2).sum(axis=-1)
    return np.where(np.isfinite(err), err, np.inf)


def ransac_verify(
    candidates: MatchCandidates,
    a: FeatureSet,
    b: FeatureSet,
    params: RansacParams = RansacParams(),
) -> MatchResult:
    """Fit a homography by 4-point minimal samples and keep the consensus set.

    Deterministic for a fixed seed. Fewer than 4 candidates pass through
    unverified (no model); if no sample ever reaches 4 inliers the result is
    empty with no model.
    """
    n = len(candidates)
    base = dict(n_query_keypoints=len(a), n_train_keypoints=len(b))
    if n < _MIN_SAMPLE:
        return MatchResult(
            pairs=candidates.pairs.copy(),
            distances=candidates.distances.copy(),
            model=None,
            **base,
        )

    src = np.stack(
        [a.xs[candidates.pairs[:, 0]], a.ys[candidates.pairs[:, 0]]], axis=1
    ).astype(np.float64)
    dst = np.stack(
        [b.xs[candidates.pairs[:, 1]], b.ys[candidates.pairs[:, 1]]], axis=1
    ).astype(np.float64)

    rng = np.random.default_rng(params.seed)
    eps2 = params.epsilon_px**2
    best_mask: np.ndarray | None = None
    best_count = 0
    iters_done = 0
    while iters_done < params.max_iters:
        chunk = min(RANSAC_CHUNK, params.max_iters - iters_done)
        iters_done += chunk
        keys = rng.random((chunk, n))
        samples = np.argsort(keys, axis=1)[:, :_MIN_SAMPLE]
        s_src = src[samples]
        s_dst = dst[samples]
        valid = ~(_sample_degenerate(s_src) | _sample_degenerate(s_dst))
        if not np.any(valid):
            continue
        H = np.full((chunk, 3, 3), np.nan)
        H[valid] = _dlt_homographies(s_src[valid], s_dst[valid])
        finite = np.all(np.isfinite(H.reshape(chunk, 9)), axis=1)
        if not np.any(finite):
            continue
        errs = _projection_errors(H[finite], src, dst)
        inl = errs < eps2
        counts = inl.sum(axis=1)
        top = int(np.argmax(counts))
        if counts[top] > best_count:
            best_count = int(counts[top])
            best_mask = inl[top]
        if best_count >= _MIN_SAMPLE:
            ratio = best_count / n
            p_good = max(min(ratio**_MIN_SAMPLE, 1.0 - 1e-12), 1e-12)
            needed = np.log(1.0 - RANSAC_CONFIDENCE) / np.log(1.0 - p_good)
            if iters_done >= needed:
                break

    if best_mask is None or best_count < _MIN_SAMPLE:
        return MatchResult(
            pairs=np.zeros((0, 2), dtype=np.int64),
            distances=np.zeros(0),
            model=None,
            **base,
        )

    refit = _dlt_homographies(src[best_mask][None], dst[best_mask][None])[0]
    if not np.all(np.isfinite(refit)):
        refit = None
    return MatchResult(
        pairs=candidates.pairs[best_mask].copy(),
        distances=candidates.distances[best_mask].copy(),
        model=refit,
        **base,
    )


def match_pair(
    a: FeatureSet,
    b: FeatureSet,
    match_params: MatchParams = MatchParams(),
    ransac_params: RansacParams = RansacParams(),
) -> MatchResult:
    """Ratio test then geometric verification for an ordered pair."""
    if len(a) == 0 or len(b) == 0:
        return MatchResult(
            pairs=np.zeros((0, 2), dtype=np.int64),
            distances=np.zeros(0),
            n_query_keypoints=len(a),
            n_train_keypoints=len(b),
            model=None,
            degenerate=True,
        )
    cands = match_descriptors(a, b, match_params.ratio)
    return ransac_verify(cands, a, b, ransac_params)


def probability_from_result(
    result: MatchResult, denominator: str = "second"
) -> float:
    """Inlier count over a keypoint total; 0.0 when the total is empty."""
    n_inl = len(result)
    if denominator == "second":
        total = result.n_train_keypoints
    elif denominator == "min":
        total = min(result.n_query_keypoints, result.n_train_keypoints)
    elif denominator == "union":
        total = result.n_query_keypoints + result.n_train_keypoints - n_inl
    else:
        raise ValueError(f"unknown denominator mode {denominator!r}")
    if total <= 0:
        return 0.0
    return n_inl / total


def match_probability(
    a: FeatureSet,
    b: FeatureSet,
    match_params: MatchParams = MatchParams(),
    ransac_params: RansacParams = RansacParams(),
    denominator: str | None = None,
) -> float:
    """Probability that b's content appears in a (or frame-pair similarity).

    ``denominator`` defaults to the mode configured in match_params.
    """
    mode = denominator or match_params.denominator
    result = match_pair(a, b, match_params, ransac_params)
    return probability_from_result(result, mode)
