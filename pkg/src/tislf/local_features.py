"""Scale- and rotation-invariant local features, built from scratch.

Difference-of-Gaussians extrema over an octave pyramid, batched subpixel
refinement, dominant-orientation assignment from a 36-bin gradient histogram,
and 4x4x8 gradient descriptors with trilinear binning. Everything is
vectorized numpy; the only external primitive is the separable Gaussian
filter. Output is deterministic for identical input and parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .config import FeatureParams
from .errors import ImageTooSmall
from .frame_io import GrayFrame

SIGMA0 = 1.6  # blur of the first pyramid level
ASSUMED_BLUR = 0.5  # blur assumed present in the input image
MIN_IMAGE_SIZE = 16
BORDER = 5  # ignore extrema this close to an image edge
MAX_REFINE_STEPS = 5

ORI_BINS = 36
ORI_SIGMA_FACTOR = 1.5
ORI_RADIUS_FACTOR = 3.0
ORI_PEAK_RATIO = 0.8

DESCR_WIDTH = 4
DESCR_BINS = 8
DESCR_SCALE_FACTOR = 3.0
DESCR_CLAMP = 0.2

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    scale: float
    orientation: float
    response: float


@dataclass
class FeatureSet:
    """Keypoints plus parallel descriptor rows for one image.

    Rows are canonically ordered by (scale desc, response desc, y, x).
    Positions are float64 so geometric fits keep full precision; descriptors
    are float32 for matching throughput.
    """

    xs: np.ndarray
    ys: np.ndarray
    scales: np.ndarray
    orientations: np.ndarray
    responses: np.ndarray
    descriptors: np.ndarray  # (n, 128) float32, unit L2 norm
    width: int
    height: int
    n_degenerate: int = 0

    def __len__(self) -> int:
        return int(self.xs.shape[0])

    @property
    def keypoints(self) -> list[Keypoint]:
        return [
            Keypoint(float(x), float(y), float(s), float(o), float(r))
            for x, y, s, o, r in zip(
                self.xs, self.ys, self.scales, self.orientations, self.responses
            )
        ]

    def positions(self) -> np.ndarray:
        """(n, 2) array of (x, y) positions."""
        return np.stack([self.xs, self.ys], axis=1)


def empty_feature_set(width: int, height: int, n_degenerate: int = 0) -> FeatureSet:
    z = np.zeros(0, dtype=np.float64)
    return FeatureSet(
        xs=z,
        ys=z.copy(),
        scales=z.copy(),
        orientations=z.copy(),
        responses=z.copy(),
        descriptors=np.zeros((0, 128), dtype=np.float32),
        width=width,
        height=height,
        n_degenerate=n_degenerate,
    )


def _auto_octaves(height: int, width: int) -> int:
    return max(1, int(np.floor(np.log2(min(height, width) / 8.0))))


def _build_pyramid(base: np.ndarray, n_octaves: int, s: int) -> list[list[np.ndarray]]:
    k = 2.0 ** (1.0 / s)
    sig_prev = SIGMA0 * k ** np.arange(s + 2)
    sig_incr = np.sqrt((sig_prev * k) ** 2 - sig_prev**2)
    pyramid: list[list[np.ndarray]] = []
    img = base
    for _ in range(n_octaves):
        levels = [img]
        for inc in sig_incr:
            levels.append(ndimage.gaussian_filter(levels[-1], inc, mode="nearest"))
        pyramid.append(levels)
        img = levels[s][::2, ::2]
        if min(img.shape) < 2 * BORDER + 3:
            break
    return pyramid


def _max8(a: np.ndarray) -> np.ndarray:
    """Max over the 8 in-plane neighbors, evaluated on the interior grid."""
    views = (
        a[:-2, :-2], a[:-2, 1:-1], a[:-2, 2:],
        a[1:-1, :-2], a[1:-1, 2:],
        a[2:, :-2], a[2:, 1:-1], a[2:, 2:],
    )
    m = views[0]
    for v in views[1:]:
        m = np.maximum(m, v)
    return m


def _max9(a: np.ndarray) -> np.ndarray:
    m = np.maximum(np.maximum(a[:-2], a[1:-1]), a[2:])
    return np.maximum(np.maximum(m[:, :-2], m[:, 1:-1]), m[:, 2:])


def _extrema_positions(
    lower: np.ndarray, center: np.ndarray, upper: np.ndarray, pre_thresh: float
) -> tuple[np.ndarray, np.ndarray]:
    c = center[1:-1, 1:-1]
    is_max = (c > pre_thresh) & (c > _max8(center)) & (c > _max9(lower)) & (c > _max9(upper))
    is_min = (
        (c < -pre_thresh)
        & (c < -_max8(-center))
        & (c < -_max9(-lower))
        & (c < -_max9(-upper))
    )
    ys, xs = np.nonzero(is_max | is_min)
    return ys + 1, xs + 1


def _refine_octave(
    dogs: np.ndarray,
    ys: np.ndarray,
    xs: np.ndarray,
    ls: np.ndarray,
    params: FeatureParams,
) -> dict[str, np.ndarray]:
    """Batched subpixel refinement plus contrast/edge rejection.

    Returns arrays for the surviving candidates of one octave:
    integer window centers, subpixel offsets, layer, and response.
    """
    s = params.scales_per_octave
    n_layers, h, w = dogs.shape
    y = ys.astype(np.int64)
    x = xs.astype(np.int64)
    l = ls.astype(np.int64)

    out: dict[str, list[np.ndarray]] = {k: [] for k in ("y", "x", "l", "oy", "ox", "ol", "resp")}

    def collect(yk, xk, lk, off, vk, grads, hess):
        dx, dy, ds = grads
        dxx, dyy, dss, dxy, dxs, dys = hess
        val = vk + 0.5 * (dx * off[:, 0] + dy * off[:, 1] + ds * off[:, 2])
        keep = np.abs(val) >= params.contrast_thresh / s
        tr = dxx + dyy
        det2 = dxx * dyy - dxy * dxy
        r = params.edge_thresh
        keep &= (det2 > 0) & (tr * tr * r < (r + 1.0) ** 2 * det2)
        if not np.any(keep):
            return
        out["y"].append(yk[keep])
        out["x"].append(xk[keep])
        out["l"].append(lk[keep])
        out["ox"].append(off[keep, 0])
        out["oy"].append(off[keep, 1])
        out["ol"].append(off[keep, 2])
        out["resp"].append(np.abs(val[keep]))

    for _ in range(MAX_REFINE_STEPS):
        if y.size == 0:
            break
        v = dogs[l, y, x].astype(np.float64)
        dx = 0.5 * (dogs[l, y, x + 1] - dogs[l, y, x - 1]).astype(np.float64)
        dy = 0.5 * (dogs[l, y + 1, x] - dogs[l, y - 1, x]).astype(np.float64)
        ds = 0.5 * (dogs[l + 1, y, x] - dogs[l - 1, y, x]).astype(np.float64)
        dxx = (dogs[l, y, x + 1] - 2 * v + dogs[l, y, x - 1]).astype(np.float64)
        dyy = (dogs[l, y + 1, x] - 2 * v + dogs[l, y - 1, x]).astype(np.float64)
        dss = (dogs[l + 1, y, x] - 2 * v + dogs[l - 1, y, x]).astype(np.float64)
        dxy = 0.25 * (
            dogs[l, y + 1, x + 1]
            - dogs[l, y + 1, x - 1]
            - dogs[l, y - 1, x + 1]
            + dogs[l, y - 1, x - 1]
        ).astype(np.float64)
        dxs = 0.25 * (
            dogs[l + 1, y, x + 1]
            - dogs[l + 1, y, x - 1]
            - dogs[l - 1, y, x + 1]
            + dogs[l - 1, y, x - 1]
        ).astype(np.float64)
        dys = 0.25 * (
            dogs[l + 1, y + 1, x]
            - dogs[l + 1, y - 1, x]
            - dogs[l - 1, y + 1, x]
            + dogs[l - 1, y - 1, x]
        ).astype(np.float64)

        # 3x3 solve via adjugate: off = -H^-1 g
        c00 = dyy * dss - dys * dys
        c01 = dxs * dys - dxy * dss
        c02 = dxy * dys - dxs * dyy
        c11 = dxx * dss - dxs * dxs
        c12 = dxy * dxs - dxx * dys
        c22 = dxx * dyy - dxy * dxy
        det = dxx * c00 + dxy * c01 + dxs * c02
        ok = np.abs(det) > 1e-30
        inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        off = np.empty((y.size, 3), dtype=np.float64)
        off[:, 0] = -(c00 * dx + c01 * dy + c02 * ds) * inv_det
        off[:, 1] = -(c01 * dx + c11 * dy + c12 * ds) * inv_det
        off[:, 2] = -(c02 * dx + c12 * dy + c22 * ds) * inv_det

        converged = ok & np.all(np.abs(off) < 0.5, axis=1)
        if np.any(converged):
            collect(
                y[converged], x[converged], l[converged], off[converged], v[converged],
                (dx[converged], dy[converged], ds[converged]),
                (
                    dxx[converged], dyy[converged], dss[converged],
                    dxy[converged], dxs[converged], dys[converged],
                ),
            )

        moving = ok & ~converged
        if not np.any(moving):
            y = x = l = np.zeros(0, dtype=np.int64)
            break
        step = np.rint(np.clip(off[moving], -1.0, 1.0)).astype(np.int64)
        x = x[moving] + step[:, 0]
        y = y[moving] + step[:, 1]
        l = l[moving] + step[:, 2]
        inb = (
            (x >= BORDER) & (x < w - BORDER)
            & (y >= BORDER) & (y < h - BORDER)
            & (l >= 1) & (l <= s)
        )
        y, x, l = y[inb], x[inb], l[inb]

    if not out["y"]:
        return {k: np.zeros(0) for k in out}
    merged = {k: np.concatenate(vs) for k, vs in out.items()}

    # Deduplicate candidates that converged to the same cell, keeping the
    # strongest response; order is made deterministic first.
    order = np.lexsort(
        (merged["ox"], merged["oy"], -merged["resp"], merged["x"], merged["y"], merged["l"])
    )
    merged = {k: v[order] for k, v in merged.items()}
    cells = np.stack([merged["l"], merged["y"], merged["x"]], axis=1)
    _, first = np.unique(cells, axis=0, return_index=True)
    first.sort()
    return {k: v[first] for k, v in merged.items()}


@dataclass
class _Candidates:
    """Flat candidate arrays carried between detection stages."""

    octave: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    layer: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    yc: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    xc: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    x_img: np.ndarray = field(default_factory=lambda: np.zeros(0))
    y_img: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sigma_img: np.ndarray = field(default_factory=lambda: np.zeros(0))
    response: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return int(self.octave.shape[0])

    def take(self, idx: np.ndarray) -> "_Candidates":
        return _Candidates(**{k: getattr(self, k)[idx] for k in self.__dataclass_fields__})


def _gradient_maps(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    gx[:, 1:-1] = 0.5 * (img[:, 2:] - img[:, :-2])
    gy[1:-1, :] = 0.5 * (img[:-2, :] - img[2:, :])  # y axis points up for angles
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx) % _TWO_PI
    return mag, ang


def _smooth_circular(hist: np.ndarray) -> np.ndarray:
    for _ in range(2):
        hist = (
            6.0 * hist
            + 4.0 * (np.roll(hist, 1, axis=1) + np.roll(hist, -1, axis=1))
            + np.roll(hist, 2, axis=1)
            + np.roll(hist, -2, axis=1)
        ) / 16.0
    return hist


def _assign_orientations(
    cand: _Candidates, grads: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]], s: int
) -> _Candidates:
    """Expand candidates into oriented keypoints (one per histogram peak)."""
    pieces: list[_Candidates] = []
    groups = sorted(set(zip(cand.octave.tolist(), cand.layer.tolist())))
    for oct_idx, layer in groups:
        sel = np.nonzero((cand.octave == oct_idx) & (cand.layer == layer))[0]
        grp = cand.take(sel)
        mag, ang = grads[(oct_idx, layer)]
        h, w = mag.shape
        sigma_oct = SIGMA0 * 2.0 ** (layer / s)
        sigma_ori = ORI_SIGMA_FACTOR * sigma_oct
        radius = int(round(ORI_RADIUS_FACTOR * sigma_ori))
        offs = np.arange(-radius, radius + 1)
        dyg, dxg = np.meshgrid(offs, offs, indexing="ij")
        dyg = dyg.ravel()
        dxg = dxg.ravel()
        w_gauss = np.exp(-(dyg**2 + dxg**2) / (2.0 * sigma_ori**2))

        ys_abs = grp.yc[:, None] + dyg[None, :]
        xs_abs = grp.xc[:, None] + dxg[None, :]
        valid = (ys_abs >= 1) & (ys_abs < h - 1) & (xs_abs >= 1) & (xs_abs < w - 1)
        ys_cl = np.clip(ys_abs, 0, h - 1)
        xs_cl = np.clip(xs_abs, 0, w - 1)
        m = mag[ys_cl, xs_cl] * valid
        a = ang[ys_cl, xs_cl]
        bins = np.floor(a * (ORI_BINS / _TWO_PI)).astype(np.int64) % ORI_BINS
        weights = m * w_gauss[None, :]
        k = len(grp)
        flat = (np.arange(k)[:, None] * ORI_BINS + bins).ravel()
        hist = np.bincount(flat, weights=weights.ravel(), minlength=k * ORI_BINS)
        hist = _smooth_circular(hist.reshape(k, ORI_BINS))

        hmax = hist.max(axis=1)
        prev = np.roll(hist, 1, axis=1)
        nxt = np.roll(hist, -1, axis=1)
        peaks = (
            (hist > prev)
            & (hist > nxt)
            & (hist >= ORI_PEAK_RATIO * hmax[:, None])
            & (hmax[:, None] > 0)
        )
        kp_idx, bin_idx = np.nonzero(peaks)
        if kp_idx.size == 0:
            continue
        lv = prev[kp_idx, bin_idx]
        cv = hist[kp_idx, bin_idx]
        rv = nxt[kp_idx, bin_idx]
        denom = lv - 2.0 * cv + rv
        interp = np.where(np.abs(denom) > 1e-12, 0.5 * (lv - rv) / denom, 0.0)
        theta = (_TWO_PI * (bin_idx + 0.5 + interp) / ORI_BINS) % _TWO_PI

        expanded = grp.take(kp_idx)
        expanded.theta = theta
        pieces.append(expanded)

    if not pieces:
        return _Candidates()
    return _Candidates(
        **{
            k: np.concatenate([getattr(p, k) for p in pieces])
            for k in _Candidates.__dataclass_fields__
        }
    )


def _compute_descriptors(
    cand: _Candidates, grads: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]], s: int
) -> np.ndarray:
    """(n, 128) descriptors for oriented candidates, in candidate order."""
    n = len(cand)
    desc = np.zeros((n, 128), dtype=np.float64)
    groups = sorted(set(zip(cand.octave.tolist(), cand.layer.tolist())))
    d = DESCR_WIDTH
    nb = DESCR_BINS
    for oct_idx, layer in groups:
        sel = np.nonzero((cand.octave == oct_idx) & (cand.layer == layer))[0]
        grp = cand.take(sel)
        mag, ang = grads[(oct_idx, layer)]
        h, w = mag.shape
        sigma_oct = SIGMA0 * 2.0 ** (layer / s)
        hist_width = DESCR_SCALE_FACTOR * sigma_oct
        half_w = int(round(hist_width * np.sqrt(2) * (d + 1) * 0.5))
        half_w = min(half_w, int(np.hypot(h, w)))
        offs = np.arange(-half_w, half_w + 1)
        dyg, dxg = np.meshgrid(offs, offs, indexing="ij")
        dyg = dyg.ravel().astype(np.float64)
        dxg = dxg.ravel().astype(np.float64)

        ys_abs = grp.yc[:, None] + dyg.astype(np.int64)[None, :]
        xs_abs = grp.xc[:, None] + dxg.astype(np.int64)[None, :]
        valid = (ys_abs >= 1) & (ys_abs < h - 1) & (xs_abs >= 1) & (xs_abs < w - 1)

        cos_t = np.cos(grp.theta)[:, None]
        sin_t = np.sin(grp.theta)[:, None]
        u = dxg[None, :]
        v = -dyg[None, :]  # y-up, consistent with the gradient angle convention
        c_rot = (cos_t * u + sin_t * v) / hist_width
        r_rot = (-sin_t * u + cos_t * v) / hist_width
        rbin = r_rot + 0.5 * d - 0.5
        cbin = c_rot + 0.5 * d - 0.5
        inside = (rbin > -1.0) & (rbin < d) & (cbin > -1.0) & (cbin < d) & valid

        kp_of = np.broadcast_to(np.arange(len(grp))[:, None], inside.shape)[inside]
        ys_g = np.clip(ys_abs, 0, h - 1)[inside]
        xs_g = np.clip(xs_abs, 0, w - 1)[inside]
        m = mag[ys_g, xs_g].astype(np.float64)
        keepm = m > 0
        kp_of = kp_of[keepm]
        m = m[keepm]
        a = ang[ys_g, xs_g][keepm].astype(np.float64)
        rb = rbin[inside][keepm]
        cb = cbin[inside][keepm]
        rr = r_rot[inside][keepm]
        cc = c_rot[inside][keepm]
        theta_of = grp.theta[kp_of]

        weight = np.exp(-(rr * rr + cc * cc) * (2.0 / d**2)) * m
        obin = ((a - theta_of) % _TWO_PI) * (nb / _TWO_PI)

        rb0 = np.floor(rb).astype(np.int64)
        cb0 = np.floor(cb).astype(np.int64)
        ob0 = np.floor(obin).astype(np.int64)
        rf = rb - rb0
        cf = cb - cb0
        of = obin - ob0

        side = d + 2
        acc = np.zeros(len(grp) * side * side * nb)
        for dr in (0, 1):
            wr = weight * (rf if dr else 1.0 - rf)
            for dc in (0, 1):
                wc = wr * (cf if dc else 1.0 - cf)
                for do in (0, 1):
                    wo = wc * (of if do else 1.0 - of)
                    idx = (
                        kp_of * (side * side * nb)
                        + (rb0 + 1 + dr) * (side * nb)
                        + (cb0 + 1 + dc) * nb
                        + ((ob0 + do) % nb)
                    )
                    acc += np.bincount(idx, weights=wo, minlength=acc.size)
        tensor = acc.reshape(len(grp), side, side, nb)[:, 1 : d + 1, 1 : d + 1, :]
        desc[sel] = tensor.reshape(len(grp), d * d * nb)
    return desc


def _normalize_descriptors(desc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit-normalize, clamp at DESCR_CLAMP, renormalize. Returns (desc, ok)."""
    norms = np.linalg.norm(desc, axis=1)
    ok = norms > 1e-12
    safe = np.where(ok, norms, 1.0)
    desc = desc / safe[:, None]
    desc = np.minimum(desc, DESCR_CLAMP)
    norms2 = np.linalg.norm(desc, axis=1)
    ok &= norms2 > 1e-12
    safe2 = np.where(ok, norms2, 1.0)
    desc = desc / safe2[:, None]
    return desc.astype(np.float32), ok


def detect_and_describe(
    frame: GrayFrame | np.ndarray, params: FeatureParams = FeatureParams()
) -> FeatureSet:
    """Detect keypoints and compute descriptors for one grayscale image."""
    img = frame.pixels if isinstance(frame, GrayFrame) else np.asarray(frame)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    h, w = img.shape
    if min(h, w) < MIN_IMAGE_SIZE:
        raise ImageTooSmall(f"image {w}x{h} below minimum {MIN_IMAGE_SIZE}px")
    if img.dtype == np.uint8:
        img_f = img.astype(np.float32) / 255.0
    else:
        img_f = img.astype(np.float32)

    s = params.scales_per_octave
    base = ndimage.gaussian_filter(
        img_f, np.sqrt(max(SIGMA0**2 - ASSUMED_BLUR**2, 0.01)), mode="nearest"
    )
    n_octaves = params.octaves if params.octaves is not None else _auto_octaves(h, w)
    pyramid = _build_pyramid(base, n_octaves, s)

    pre_thresh = 0.5 * params.contrast_thresh / s
    per_octave: list[dict[str, np.ndarray]] = []
    for oct_idx, levels in enumerate(pyramid):
        dogs = np.stack([levels[i + 1] - levels[i] for i in range(s + 2)])
        ys_all, xs_all, ls_all = [], [], []
        oh, ow = dogs.shape[1:]
        if oh < 2 * BORDER + 3 or ow < 2 * BORDER + 3:
            continue
        for layer in range(1, s + 1):
            ys, xs = _extrema_positions(dogs[layer - 1], dogs[layer], dogs[layer + 1], pre_thresh)
            keep = (
                (ys >= BORDER) & (ys < oh - BORDER) & (xs >= BORDER) & (xs < ow - BORDER)
            )
            ys_all.append(ys[keep])
            xs_all.append(xs[keep])
            ls_all.append(np.full(int(keep.sum()), layer, dtype=np.int64))
        if not ys_all:
            continue
        refined = _refine_octave(
            dogs,
            np.concatenate(ys_all),
            np.concatenate(xs_all),
            np.concatenate(ls_all),
            params,
        )
        if refined["y"].size:
            refined["octave"] = np.full(refined["y"].size, oct_idx, dtype=np.int64)
            per_octave.append(refined)

    if not per_octave:
        return empty_feature_set(w, h)

    scale_pow = {k: np.concatenate([r[k] for r in per_octave]) for k in per_octave[0]}
    octave = scale_pow["octave"].astype(np.int64)
    layer = scale_pow["l"].astype(np.int64)
    factor = 2.0**octave
    layer_f = layer + scale_pow["ol"]
    cand = _Candidates(
        octave=octave,
        layer=layer,
        yc=scale_pow["y"].astype(np.int64),
        xc=scale_pow["x"].astype(np.int64),
        x_img=(scale_pow["x"] + scale_pow["ox"]) * factor,
        y_img=(scale_pow["y"] + scale_pow["oy"]) * factor,
        sigma_img=SIGMA0 * 2.0 ** (octave + layer_f / s),
        response=scale_pow["resp"],
        theta=np.zeros(octave.size),
    )

    # Bound the orientation/descriptor cost before expansion.
    if len(cand) > params.max_keypoints:
        order = np.lexsort((cand.x_img, cand.y_img, -cand.sigma_img, -cand.response))
        cand = cand.take(order[: params.max_keypoints])

    grads: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
    for oct_idx, lay in set(zip(cand.octave.tolist(), cand.layer.tolist())):
        grads[(oct_idx, lay)] = _gradient_maps(pyramid[oct_idx][lay])

    oriented = _assign_orientations(cand, grads, s)
    if len(oriented) == 0:
        return empty_feature_set(w, h)

    desc, ok = _normalize_descriptors(_compute_descriptors(oriented, grads, s))
    n_degenerate = int((~ok).sum())
    oriented = oriented.take(np.nonzero(ok)[0])
    desc = desc[ok]

    if len(oriented) > params.max_keypoints:
        order = np.lexsort(
            (oriented.x_img, oriented.y_img, -oriented.sigma_img, -oriented.response)
        )[: params.max_keypoints]
        oriented = oriented.take(order)
        desc = desc[order]

    final = np.lexsort(
        (oriented.x_img, oriented.y_img, -oriented.response, -oriented.sigma_img)
    )
    oriented = oriented.take(final)
    desc = desc[final]

    return FeatureSet(
        xs=oriented.x_img.astype(np.float64),
        ys=oriented.y_img.astype(np.float64),
        scales=oriented.sigma_img.astype(np.float64),
        orientations=oriented.theta.astype(np.float64),
        responses=oriented.response.astype(np.float64),
        descriptors=np.ascontiguousarray(desc),
        width=w,
        height=h,
        n_degenerate=n_degenerate,
    )


def dump_features(fs: FeatureSet, path) -> None:
    """Write one keypoint per line: x y scale orientation response + 128 values."""
    with open(path, "w") as fh:
        for i in range(len(fs)):
            head = [fs.xs[i], fs.ys[i], fs.scales[i], fs.orientations[i], fs.responses[i]]
            parts = [f"{v:.9g}" for v in head] + [f"{v:.9g}" for v in fs.descriptors[i]]
            fh.write(" ".join(parts) + "\n")
